#pragma once

/// Declarative runtime: a recorded description of how the app behaves on
/// a device, replayed by a small navigation-stack simulator.
///
/// The manifest pins, per page: the rendered widgets (with the handler
/// each action fires), what every handler does (API events, optionally
/// one route), the API events of each lifecycle stage, and whether the
/// page renders at all. Blocked pages present an empty screen.
///
/// Simulator rules:
///   - the stack holds at most `stack_limit` pages; a push onto a full
///     stack rejects the whole step, including its API events
///   - popping the last remaining page is illegal
///   - routing into a page of a not-yet-loaded subpackage loads that
///     subpackage first and reports it, so the caller can mirror the
///     merge on the static side
///   - entering a page forward (push, replace, clear) fires its
///     lifecycle events in order onLoad, onShow, onReady; returning to a
///     page by popping fires nothing

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "miniscope/common.hpp"
#include "miniscope/fuzzy.hpp"
#include "miniscope/routing.hpp"

namespace miniscope {

struct ApiEvent {
  std::string api;
  std::string args_digest;

  auto operator<=>(const ApiEvent&) const = default;
};

struct RouteAction {
  Mechanism mechanism = Mechanism::ApiNavigateTo;
  std::string target;  // empty for back mechanisms
};

struct RuntimeHandler {
  std::optional<RouteAction> route;
  std::vector<ApiEvent> api_events;
};

struct RuntimeWidget {
  std::string xpath;
  std::map<std::string, std::string> attrs;
  std::vector<std::string> actions;
  std::map<std::string, std::string> bindings;  // action -> handler name

  UiWidget as_ui() const { return {xpath, attrs, actions}; }
};

struct RuntimePage {
  std::vector<RuntimeWidget> widgets;
  std::map<std::string, RuntimeHandler> handlers;
  std::map<std::string, std::vector<ApiEvent>> lifecycle_api_events;
  bool blocked = false;
};

struct RuntimeManifest {
  std::string launch;
  std::map<std::string, RuntimePage> pages;
  std::map<std::string, std::string> subpackages;  // root prefix -> content dir
};

namespace detail {

inline const nlohmann::json& expect(const nlohmann::json& j, const char* key,
                                    nlohmann::json::value_t type, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end() || it->type() != type)
    throw Error(ErrorCode::MalformedManifest, where + ": missing or mistyped '" + key + "'");
  return *it;
}

inline std::vector<ApiEvent> parse_api_events(const nlohmann::json& arr, const std::string& where) {
  if (!arr.is_array()) throw Error(ErrorCode::MalformedManifest, where + ": api events must be an array");
  std::vector<ApiEvent> out;
  for (const auto& e : arr) {
    if (!e.is_object() || !e.contains("api") || !e["api"].is_string())
      throw Error(ErrorCode::MalformedManifest, where + ": api event needs an 'api' string");
    ApiEvent ev;
    ev.api = e["api"].get<std::string>();
    if (e.contains("args_digest") && e["args_digest"].is_string())
      ev.args_digest = e["args_digest"].get<std::string>();
    out.push_back(std::move(ev));
  }
  return out;
}

}  // namespace detail

inline RuntimeManifest parse_runtime_manifest(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedManifest, "runtime manifest must be an object");
  RuntimeManifest m;
  m.launch = detail::expect(j, "launch", nlohmann::json::value_t::string, "manifest").get<std::string>();
  const auto& pages = detail::expect(j, "pages", nlohmann::json::value_t::object, "manifest");
  for (auto it = pages.begin(); it != pages.end(); ++it) {
    const std::string& path = it.key();
    const nlohmann::json& pj = it.value();
    if (!pj.is_object()) throw Error(ErrorCode::MalformedManifest, path + ": page must be an object");
    RuntimePage page;
    page.blocked = pj.value("blocked", false);
    if (pj.contains("widgets")) {
      if (!pj["widgets"].is_array())
        throw Error(ErrorCode::MalformedManifest, path + ": widgets must be an array");
      for (const auto& wj : pj["widgets"]) {
        RuntimeWidget w;
        if (!wj.is_object() || !wj.contains("xpath") || !wj["xpath"].is_string())
          throw Error(ErrorCode::MalformedManifest, path + ": widget needs an 'xpath' string");
        w.xpath = wj["xpath"].get<std::string>();
        static const std::set<std::string> kAttrKeys = {"name", "type", "text", "bounds",
                                                        "resource_id"};
        if (wj.contains("attrs"))
          for (auto a = wj["attrs"].begin(); a != wj["attrs"].end(); ++a) {
            if (!kAttrKeys.count(a.key()))
              throw Error(ErrorCode::MalformedManifest,
                          path + ": widget attribute '" + a.key() + "' is not recognized");
            w.attrs[a.key()] = a.value().is_string() ? a.value().get<std::string>() : a.value().dump();
          }
        if (wj.contains("actions"))
          for (const auto& act : wj["actions"]) w.actions.push_back(act.get<std::string>());
        if (wj.contains("bindings"))
          for (auto b = wj["bindings"].begin(); b != wj["bindings"].end(); ++b)
            w.bindings[b.key()] = b.value().get<std::string>();
        page.widgets.push_back(std::move(w));
      }
    }
    if (pj.contains("handlers")) {
      if (!pj["handlers"].is_object())
        throw Error(ErrorCode::MalformedManifest, path + ": handlers must be an object");
      for (auto h = pj["handlers"].begin(); h != pj["handlers"].end(); ++h) {
        RuntimeHandler handler;
        const nlohmann::json& hj = h.value();
        if (!hj.is_object())
          throw Error(ErrorCode::MalformedManifest, path + ": handler must be an object");
        if (hj.contains("route")) {
          const nlohmann::json& rj = hj["route"];
          if (!rj.is_object() || !rj.contains("mechanism") || !rj["mechanism"].is_string())
            throw Error(ErrorCode::MalformedManifest, path + ": route needs a 'mechanism'");
          auto mech = parse_mechanism(rj["mechanism"].get<std::string>());
          if (!mech)
            throw Error(ErrorCode::MalformedManifest,
                        path + ": unknown mechanism '" + rj["mechanism"].get<std::string>() + "'");
          RouteAction route;
          route.mechanism = *mech;
          if (rj.contains("target") && rj["target"].is_string()) {
            auto norm = normalize_page_path(rj["target"].get<std::string>());
            if (norm) route.target = *norm;
          }
          if (!is_back(route.mechanism) && route.target.empty())
            throw Error(ErrorCode::MalformedManifest, path + ": route needs a page target");
          handler.route = route;
        }
        if (hj.contains("api_events"))
          handler.api_events = detail::parse_api_events(hj["api_events"], path);
        page.handlers[h.key()] = std::move(handler);
      }
    }
    if (pj.contains("lifecycle_api_events")) {
      if (!pj["lifecycle_api_events"].is_object())
        throw Error(ErrorCode::MalformedManifest, path + ": lifecycle_api_events must be an object");
      for (auto l = pj["lifecycle_api_events"].begin(); l != pj["lifecycle_api_events"].end(); ++l)
        page.lifecycle_api_events[l.key()] = detail::parse_api_events(l.value(), path);
    }
    m.pages[path] = std::move(page);
  }
  if (!m.pages.count(m.launch))
    throw Error(ErrorCode::MalformedManifest, "launch page '" + m.launch + "' is not described");
  if (j.contains("subpackages")) {
    if (!j["subpackages"].is_object())
      throw Error(ErrorCode::MalformedManifest, "subpackages must be an object");
    for (auto it = j["subpackages"].begin(); it != j["subpackages"].end(); ++it)
      m.subpackages[it.key()] = it.value().get<std::string>();
  }
  return m;
}

inline RuntimeManifest load_runtime_manifest(const std::string& path) {
  auto text = read_file(path);
  if (!text) throw Error(ErrorCode::IoError, "cannot read runtime manifest " + path);
  nlohmann::json j = nlohmann::json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded())
    throw Error(ErrorCode::MalformedManifest, "runtime manifest " + path + " is not valid JSON");
  return parse_runtime_manifest(j);
}

struct ObservedApiEvent {
  std::string page;
  std::string source;  // "lifecycle:<stage>" or "handler:<name>"
  ApiEvent event;

  auto operator<=>(const ObservedApiEvent&) const = default;
};

struct StepOutcome {
  bool ok = true;
  std::optional<ErrorCode> error;  // StackFull or IllegalAction when !ok
  std::string message;
  std::vector<ObservedApiEvent> events;
  std::optional<std::string> loaded_subpackage;  // root prefix, when a load happened
  std::optional<std::string> routed_to;          // page shown after the step
};

class SimulatedRuntime {
 public:
  explicit SimulatedRuntime(RuntimeManifest manifest, size_t stack_limit = 10)
      : manifest_(std::move(manifest)), stack_limit_(stack_limit) {}

  const RuntimeManifest& manifest() const { return manifest_; }
  const std::vector<std::string>& stack() const { return stack_; }
  std::string current_page() const { return stack_.empty() ? "" : stack_.back(); }
  const std::vector<ObservedApiEvent>& observed() const { return observed_; }
  const std::set<std::string>& loaded_subpackages() const { return loaded_; }

  // Launch page visible at depth 1, lifecycle events fired.
  StepOutcome launch() {
    stack_.assign(1, manifest_.launch);
    StepOutcome out;
    out.routed_to = manifest_.launch;
    enter_page(manifest_.launch, out.events);
    commit(out.events);
    return out;
  }

  StepOutcome relaunch() { return launch(); }

  // Empty when nothing renders: no current page, unknown page, or a
  // page marked blocked.
  std::vector<RuntimeWidget> screen_widgets() const {
    auto it = manifest_.pages.find(current_page());
    if (it == manifest_.pages.end() || it->second.blocked) return {};
    return it->second.widgets;
  }

  bool page_blocked(const std::string& page) const {
    auto it = manifest_.pages.find(page);
    return it != manifest_.pages.end() && it->second.blocked;
  }

  // Fires one named handler on the current page. Nothing is committed
  // unless every part of the step is legal.
  StepOutcome fire_handler(const std::string& handler_name) {
    StepOutcome out;
    const std::string page = current_page();
    auto page_it = manifest_.pages.find(page);
    if (page == "" || page_it == manifest_.pages.end())
      return reject(ErrorCode::IllegalAction, "no current page");
    if (page_it->second.blocked)
      return reject(ErrorCode::EmptyScreen, "page '" + page + "' presents an empty screen");
    auto h_it = page_it->second.handlers.find(handler_name);
    if (h_it == page_it->second.handlers.end())
      return reject(ErrorCode::IllegalAction,
                    "page '" + page + "' has no handler '" + handler_name + "'");

    for (const ApiEvent& e : h_it->second.api_events)
      out.events.push_back({page, "handler:" + handler_name, e});

    std::vector<std::string> new_stack = stack_;
    if (h_it->second.route) {
      const RouteAction& route = *h_it->second.route;
      switch (stack_effect(route.mechanism)) {
        case StackEffect::Pop:
          if (new_stack.size() <= 1)
            return reject(ErrorCode::IllegalAction, "cannot navigate back from the first page");
          new_stack.pop_back();
          break;
        case StackEffect::Push:
          if (new_stack.size() >= stack_limit_)
            return reject(ErrorCode::StackFull,
                          "navigation stack already holds " + std::to_string(stack_limit_) + " pages");
          if (auto err = ensure_page(route.target, out)) return *err;
          new_stack.push_back(route.target);
          enter_page(route.target, out.events);
          break;
        case StackEffect::Replace:
          if (auto err = ensure_page(route.target, out)) return *err;
          new_stack.back() = route.target;
          enter_page(route.target, out.events);
          break;
        case StackEffect::ClearOpen:
        case StackEffect::ClearTab:
          if (auto err = ensure_page(route.target, out)) return *err;
          new_stack.assign(1, route.target);
          enter_page(route.target, out.events);
          break;
      }
    }
    stack_ = std::move(new_stack);
    out.routed_to = current_page();
    if (out.loaded_subpackage) loaded_.insert(*out.loaded_subpackage);
    commit(out.events);
    return out;
  }

 private:
  StepOutcome reject(ErrorCode code, std::string message) {
    StepOutcome out;
    out.ok = false;
    out.error = code;
    out.message = std::move(message);
    out.events.clear();
    return out;
  }

  // Marks a pending subpackage load when the target lives under a known
  // root that has not been loaded yet. Unknown pages reject the step.
  std::optional<StepOutcome> ensure_page(const std::string& target, StepOutcome& out) {
    for (const auto& [root, dir] : manifest_.subpackages)
      if (!loaded_.count(root) && (target == root || target.starts_with(root + "/"))) {
        out.loaded_subpackage = root;
        break;
      }
    if (!manifest_.pages.count(target))
      return reject(ErrorCode::IllegalAction, "page '" + target + "' is not described by the runtime");
    return std::nullopt;
  }

  void enter_page(const std::string& page, std::vector<ObservedApiEvent>& events) {
    auto it = manifest_.pages.find(page);
    if (it == manifest_.pages.end() || it->second.blocked) return;  // nothing runs behind a wall
    for (const char* stage : {"onLoad", "onShow", "onReady"}) {
      auto l_it = it->second.lifecycle_api_events.find(stage);
      if (l_it == it->second.lifecycle_api_events.end()) continue;
      for (const ApiEvent& e : l_it->second)
        events.push_back({page, std::string("lifecycle:") + stage, e});
    }
  }

  void commit(const std::vector<ObservedApiEvent>& events) {
    for (const ObservedApiEvent& e : events) observed_.push_back(e);
  }

  RuntimeManifest manifest_;
  size_t stack_limit_;
  std::vector<std::string> stack_;
  std::set<std::string> loaded_;
  std::vector<ObservedApiEvent> observed_;
};

}  // namespace miniscope
