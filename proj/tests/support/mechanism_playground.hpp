#pragma once

// A two-page runtime whose screens carry one widget per routing
// mechanism, so randomized sequences can exercise every stack effect
// through the public step operation.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "miniscope/explorer.hpp"
#include "miniscope/routing.hpp"
#include "miniscope/runtime.hpp"

namespace testsupport {

inline const std::vector<miniscope::Mechanism>& all_mechanisms() {
  static const std::vector<miniscope::Mechanism> kAll = {
      miniscope::Mechanism::NavigatorNavigate,    miniscope::Mechanism::NavigatorNavigateBack,
      miniscope::Mechanism::NavigatorRedirect,    miniscope::Mechanism::NavigatorReLaunch,
      miniscope::Mechanism::NavigatorSwitchTab,   miniscope::Mechanism::ApiNavigateTo,
      miniscope::Mechanism::ApiNavigateBack,      miniscope::Mechanism::ApiRedirectTo,
      miniscope::Mechanism::ApiReLaunch,          miniscope::Mechanism::ApiSwitchTab,
  };
  return kAll;
}

// Both pages expose the same widgets: button[k] fires mechanism k.
// Push-effect handlers also declare an API event so rejected steps can
// be checked for leaking observations.
inline miniscope::RuntimeManifest mechanism_playground() {
  using namespace miniscope;
  RuntimeManifest m;
  m.launch = "pages/home/home";
  RuntimePage page;
  const auto& mechanisms = all_mechanisms();
  for (size_t i = 0; i < mechanisms.size(); ++i) {
    Mechanism mech = mechanisms[i];
    std::string handler = std::string("go_") + to_string(mech);
    RuntimeWidget w;
    w.xpath = "/page/button[" + std::to_string(i + 1) + "]";
    w.attrs = {{"type", "button"}, {"text", to_string(mech)}};
    w.actions = {"tap"};
    w.bindings["tap"] = handler;
    page.widgets.push_back(std::move(w));

    RuntimeHandler h;
    RouteAction route;
    route.mechanism = mech;
    if (!is_back(mech))
      route.target = stack_effect(mech) == StackEffect::ClearTab ? "pages/home/home"
                                                                 : "pages/alt/alt";
    h.route = route;
    if (stack_effect(mech) == StackEffect::Push)
      h.api_events.push_back({"wx.getLocation", "type"});
    page.handlers[handler] = std::move(h);
  }
  m.pages["pages/home/home"] = page;
  m.pages["pages/alt/alt"] = page;
  return m;
}

struct SequenceReport {
  int violations = 0;
  std::string first_violation;
  int pops_at_root = 0;    // navigateBack attempts on a depth-1 stack
  int stack_rejections = 0;  // pushes rejected at the depth cap
};

// Replays `sequences` random walks of `steps_per_sequence` mechanism
// picks and checks every step against the effect table: push +1 (or a
// StackFull rejection at the cap), pop -1 (or an IllegalAction rejection
// at depth 1), replace +-0, clear-open and clear-tab land on depth 1.
inline SequenceReport replay_mechanism_sequences(int sequences, int steps_per_sequence,
                                                 uint32_t seed, size_t stack_limit = 10) {
  using namespace miniscope;
  SequenceReport report;
  RuntimeManifest manifest = mechanism_playground();
  const auto& mechanisms = all_mechanisms();
  std::mt19937 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, mechanisms.size() - 1);

  auto fail = [&](const std::string& why) {
    ++report.violations;
    if (report.first_violation.empty()) report.first_violation = why;
  };

  for (int s = 0; s < sequences; ++s) {
    SimulatedRuntime rt(manifest, stack_limit);
    rt.launch();
    for (int i = 0; i < steps_per_sequence; ++i) {
      size_t k = pick(rng);
      Mechanism mech = mechanisms[k];
      size_t depth = rt.stack().size();
      size_t observed = rt.observed().size();

      UiWidget widget;
      widget.xpath = "/page/button[" + std::to_string(k + 1) + "]";
      StepOutcome out = step(rt, widget, "tap");

      size_t new_depth = rt.stack().size();
      switch (stack_effect(mech)) {
        case StackEffect::Push:
          if (depth >= stack_limit) {
            ++report.stack_rejections;
            if (out.ok || out.error != ErrorCode::StackFull || new_depth != depth)
              fail("push at the cap must reject with StackFull and keep depth");
            if (rt.observed().size() != observed)
              fail("rejected push must not commit its API events");
          } else if (!out.ok || new_depth != depth + 1) {
            fail("push must deepen the stack by one");
          } else if (rt.observed().size() != observed + 1) {
            fail("accepted push must commit its declared API event");
          }
          break;
        case StackEffect::Pop:
          if (depth == 1) {
            ++report.pops_at_root;
            if (out.ok || out.error != ErrorCode::IllegalAction || new_depth != 1)
              fail("pop at depth 1 must reject with IllegalAction");
          } else if (!out.ok || new_depth != depth - 1) {
            fail("pop must shrink the stack by one");
          }
          break;
        case StackEffect::Replace:
          if (!out.ok || new_depth != depth) fail("replace must keep the depth");
          break;
        case StackEffect::ClearOpen:
        case StackEffect::ClearTab:
          if (!out.ok || new_depth != 1) fail("clear effects must land on depth 1");
          break;
      }
    }
  }
  return report;
}

}  // namespace testsupport
