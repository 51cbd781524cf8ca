#pragma once

// Routing mechanisms and their page-stack effects.
//
// Ten mechanisms reach other pages: five <navigator> open-types and five
// imperative APIs. Each maps to exactly one stack effect:
//
//   mechanism                    effect      stack depth
//   navigate / wx.navigateTo     push        +1 (target must not be a tab page)
//   navigateBack / wx.navigateBack  pop      -1
//   redirect / wx.redirectTo     replace      0
//   reLaunch / wx.reLaunch       clear-open   -> 1
//   switchTab / wx.switchTab     clear-tab    -> 1 (target must be a tab page)

#include <optional>
#include <string>
#include <string_view>

namespace miniscope {

enum class Mechanism {
  NavigatorNavigate,
  NavigatorNavigateBack,
  NavigatorRedirect,
  NavigatorReLaunch,
  NavigatorSwitchTab,
  ApiNavigateTo,
  ApiNavigateBack,
  ApiRedirectTo,
  ApiReLaunch,
  ApiSwitchTab,
};

enum class StackEffect { Push, Pop, Replace, ClearOpen, ClearTab };

constexpr StackEffect stack_effect(Mechanism m) {
  switch (m) {
    case Mechanism::NavigatorNavigate:
    case Mechanism::ApiNavigateTo:
      return StackEffect::Push;
    case Mechanism::NavigatorNavigateBack:
    case Mechanism::ApiNavigateBack:
      return StackEffect::Pop;
    case Mechanism::NavigatorRedirect:
    case Mechanism::ApiRedirectTo:
      return StackEffect::Replace;
    case Mechanism::NavigatorReLaunch:
    case Mechanism::ApiReLaunch:
      return StackEffect::ClearOpen;
    case Mechanism::NavigatorSwitchTab:
    case Mechanism::ApiSwitchTab:
      return StackEffect::ClearTab;
  }
  return StackEffect::Push;
}

inline const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::NavigatorNavigate: return "navigate";
    case Mechanism::NavigatorNavigateBack: return "navigateBack";
    case Mechanism::NavigatorRedirect: return "redirect";
    case Mechanism::NavigatorReLaunch: return "reLaunch";
    case Mechanism::NavigatorSwitchTab: return "switchTab";
    case Mechanism::ApiNavigateTo: return "wx.navigateTo";
    case Mechanism::ApiNavigateBack: return "wx.navigateBack";
    case Mechanism::ApiRedirectTo: return "wx.redirectTo";
    case Mechanism::ApiReLaunch: return "wx.reLaunch";
    case Mechanism::ApiSwitchTab: return "wx.switchTab";
  }
  return "?";
}

inline const char* to_string(StackEffect e) {
  switch (e) {
    case StackEffect::Push: return "push";
    case StackEffect::Pop: return "pop";
    case StackEffect::Replace: return "replace";
    case StackEffect::ClearOpen: return "clear-open";
    case StackEffect::ClearTab: return "clear-tab";
  }
  return "?";
}

inline std::optional<Mechanism> parse_mechanism(std::string_view s) {
  if (s == "navigate") return Mechanism::NavigatorNavigate;
  if (s == "navigateBack") return Mechanism::NavigatorNavigateBack;
  if (s == "redirect") return Mechanism::NavigatorRedirect;
  if (s == "reLaunch") return Mechanism::NavigatorReLaunch;
  if (s == "switchTab") return Mechanism::NavigatorSwitchTab;
  if (s == "wx.navigateTo") return Mechanism::ApiNavigateTo;
  if (s == "wx.navigateBack") return Mechanism::ApiNavigateBack;
  if (s == "wx.redirectTo") return Mechanism::ApiRedirectTo;
  if (s == "wx.reLaunch") return Mechanism::ApiReLaunch;
  if (s == "wx.switchTab") return Mechanism::ApiSwitchTab;
  return std::nullopt;
}

// <navigator open-type="...">; the default open-type is "navigate".
inline std::optional<Mechanism> navigator_open_type(std::string_view v) {
  if (v.empty() || v == "navigate") return Mechanism::NavigatorNavigate;
  if (v == "navigateBack") return Mechanism::NavigatorNavigateBack;
  if (v == "redirect") return Mechanism::NavigatorRedirect;
  if (v == "reLaunch") return Mechanism::NavigatorReLaunch;
  if (v == "switchTab") return Mechanism::NavigatorSwitchTab;
  return std::nullopt;
}

// Routing API by dotted callee path ("wx.navigateTo" -> ApiNavigateTo).
inline std::optional<Mechanism> routing_api(std::string_view dotted) {
  if (dotted == "wx.navigateTo") return Mechanism::ApiNavigateTo;
  if (dotted == "wx.navigateBack") return Mechanism::ApiNavigateBack;
  if (dotted == "wx.redirectTo") return Mechanism::ApiRedirectTo;
  if (dotted == "wx.reLaunch") return Mechanism::ApiReLaunch;
  if (dotted == "wx.switchTab") return Mechanism::ApiSwitchTab;
  return std::nullopt;
}

constexpr bool is_back(Mechanism m) {
  return m == Mechanism::NavigatorNavigateBack || m == Mechanism::ApiNavigateBack;
}

// Symbolic target of back navigation; the concrete page depends on the
// runtime stack.
inline constexpr const char* kBackTarget = "#back";

}  // namespace miniscope
