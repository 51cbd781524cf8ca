#pragma once

/// Two-phase directed exploration against a simulated runtime.
///
/// Phase one chases subpackages: every statically found route into a
/// not-yet-loaded subpackage is replayed breadth-first, shortest routes
/// first. After every step the page on screen is checked against the
/// route's expectation; a failed route is re-enqueued once, then
/// abandoned. Reaching a target drops all remaining routes into the
/// same subpackage.
///
/// Phase two chases privacy practices on the complete package: each
/// reachable practice is driven to completion in queue order (navigate
/// to its entry page, fire its entry), and the API events the runtime
/// declares for the fired handlers become the dynamic observation log.
/// Practices that cannot be driven (blocked page, unreachable entry)
/// are recorded as static-only evidence.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "miniscope/api_catalog.hpp"
#include "miniscope/fuzzy.hpp"
#include "miniscope/mdg.hpp"
#include "miniscope/practices.hpp"
#include "miniscope/runtime.hpp"

namespace miniscope {

struct TraceStep {
  std::string screen_page;     // page shown when the step began
  std::string action;          // "launch" | "relaunch" | event name | "fire"
  std::string handler;         // runtime handler fired, when any
  std::optional<MatchResult> match;  // widget located, for event steps
  std::string resulting_page;
  std::string new_subpackage;  // root prefix when the step loaded one
  bool ok = true;
  std::string note;
};

struct TraceObservation {
  ApiEvent event;
  std::string page;
  std::string trigger;  // handler or lifecycle stage name
  int step = -1;        // index into ExplorationTrace::steps
};

struct ExplorationTrace {
  int phase = 1;
  std::vector<TraceStep> steps;
  std::vector<TraceObservation> observed;
  Diagnostics diagnostics;
};

// Fires `action` on a widget of the current screen. The widget must be
// on screen and support the action; the handler bound to that action
// runs with its declared route, subpackage load, and API events.
inline StepOutcome step(SimulatedRuntime& rt, const UiWidget& widget, const std::string& action) {
  auto illegal = [](std::string message) {
    StepOutcome out;
    out.ok = false;
    out.error = ErrorCode::IllegalAction;
    out.message = std::move(message);
    return out;
  };
  const std::vector<RuntimeWidget> screen = rt.screen_widgets();
  const RuntimeWidget* found = nullptr;
  for (const RuntimeWidget& w : screen)
    if (w.xpath == widget.xpath) {
      found = &w;
      break;
    }
  if (!found) return illegal("widget '" + widget.xpath + "' is not on the current screen");
  if (std::find(found->actions.begin(), found->actions.end(), action) == found->actions.end())
    return illegal("widget '" + widget.xpath + "' does not support '" + action + "'");
  auto binding = found->bindings.find(action);
  if (binding == found->bindings.end())
    return illegal("no handler bound to '" + action + "' on '" + widget.xpath + "'");
  return rt.fire_handler(binding->second);
}

namespace detail {

inline std::string bare_trigger(const std::string& source) {
  auto colon = source.find(':');
  return colon == std::string::npos ? source : source.substr(colon + 1);
}

inline void record_events(ExplorationTrace& trace, const std::vector<ObservedApiEvent>& events,
                          int step_index) {
  for (const ObservedApiEvent& e : events)
    trace.observed.push_back({e.event, e.page, bare_trigger(e.source), step_index});
}

inline int record_step(ExplorationTrace& trace, TraceStep step) {
  trace.steps.push_back(std::move(step));
  return static_cast<int>(trace.steps.size()) - 1;
}

inline void reset_to_launch(ExplorationTrace& trace, SimulatedRuntime& rt, bool first) {
  TraceStep step;
  step.screen_page = rt.current_page();
  step.action = first ? "launch" : "relaunch";
  StepOutcome out = rt.relaunch();
  step.resulting_page = rt.current_page();
  int idx = record_step(trace, std::move(step));
  record_events(trace, out.events, idx);
}

// Records the fired step and verifies the landing page. An edge with an
// empty target does not constrain where the runtime ends up.
inline bool finish_step(SimulatedRuntime& rt, ExplorationTrace& trace, const TransitionEdge& edge,
                        TraceStep step, StepOutcome out) {
  step.resulting_page = rt.current_page();
  if (!out.ok) {
    step.ok = false;
    step.note = out.message;
    record_step(trace, std::move(step));
    return false;
  }
  if (out.loaded_subpackage) step.new_subpackage = *out.loaded_subpackage;
  bool landed = edge.target.empty() || rt.current_page() == edge.target;
  if (!landed) {
    step.ok = false;
    step.note = "expected page '" + edge.target + "', runtime shows '" + rt.current_page() + "'";
  }
  int idx = record_step(trace, std::move(step));
  record_events(trace, out.events, idx);
  return landed;
}

// Drives one transition edge: locate the widget (for widget triggers),
// resolve the handler it fires, fire it, and verify the landing page.
inline bool replay_edge(const Mdg& mdg, SimulatedRuntime& rt, ExplorationTrace& trace,
                        const TransitionEdge& edge) {
  TraceStep step;
  step.screen_page = rt.current_page();
  std::string handler;

  if (edge.trigger.kind == TransitionTrigger::Kind::Widget) {
    step.action = edge.trigger.event.empty() ? "tap" : edge.trigger.event;
    auto screen_widgets = rt.screen_widgets();
    std::vector<UiWidget> screen;
    for (const RuntimeWidget& w : screen_widgets) screen.push_back(w.as_ui());

    auto doc_it = mdg.wxml.find(edge.from_page);
    const WxmlNode* node =
        doc_it == mdg.wxml.end() ? nullptr : find_by_xpath(doc_it->second.root, edge.trigger.widget_xpath);
    if (!node) {
      step.ok = false;
      step.note = "widget '" + edge.trigger.widget_xpath + "' not in markup";
      step.resulting_page = rt.current_page();
      record_step(trace, std::move(step));
      return false;
    }
    try {
      step.match = locate_widget(*node, screen);
    } catch (const Error&) {
      step.ok = false;
      step.note = "empty screen";
      step.resulting_page = rt.current_page();
      record_step(trace, std::move(step));
      return false;
    }
    const RuntimeWidget& matched = screen_widgets[static_cast<size_t>(step.match->index)];
    auto binding = matched.bindings.find(step.action);
    if (binding == matched.bindings.end()) {
      step.ok = false;
      step.note = "matched widget has no '" + step.action + "' binding";
      step.resulting_page = rt.current_page();
      record_step(trace, std::move(step));
      return false;
    }
    handler = binding->second;
    step.handler = handler;
    StepOutcome out = miniscope::step(rt, matched.as_ui(), step.action);
    return finish_step(rt, trace, edge, std::move(step), std::move(out));
  }

  step.action = "fire";
  handler = edge.trigger.handler;
  step.handler = handler;
  StepOutcome out = rt.fire_handler(handler);
  return finish_step(rt, trace, edge, std::move(step), std::move(out));
}

}  // namespace detail

struct BfsResult {
  ExplorationTrace trace;
  std::vector<std::pair<std::string, std::string>> loaded;  // (root prefix, content dir)
};

inline BfsResult explore_bfs_subpackages(const Mdg& mdg, SimulatedRuntime& rt) {
  BfsResult result;
  result.trace.phase = 1;
  ExplorationTrace& trace = result.trace;

  std::deque<TransitionPath> queue;
  for (TransitionPath& p : subpackage_transition_paths(mdg)) queue.push_back(std::move(p));

  // Subpackage pages no static route reaches cannot be chased at all.
  std::set<std::string> routed;
  for (const TransitionPath& p : queue) routed.insert(p.target);
  for (const SubpackageSpec& sp : mdg.pkg.subpackages) {
    if (sp.loaded) continue;
    for (const std::string& page : sp.page_paths)
      if (!routed.count(page))
        trace.diagnostics.push_back({"unreachable-subpackage",
                                     "no static route from the launch page to '" + page + "'",
                                     sp.root_prefix});
  }

  std::map<std::string, int> retries;  // by target page
  bool first = true;

  while (!queue.empty()) {
    TransitionPath path = std::move(queue.front());
    queue.pop_front();
    if (rt.loaded_subpackages().count(path.subpackage_root)) continue;

    detail::reset_to_launch(trace, rt, first);
    first = false;

    bool completed = true;
    for (const TransitionEdge& edge : path.steps) {
      if (rt.current_page() != edge.from_page) { completed = false; break; }
      if (!detail::replay_edge(mdg, rt, trace, edge)) { completed = false; break; }
    }

    if (completed) {
      // All remaining routes into this subpackage are now redundant.
      std::deque<TransitionPath> keep;
      for (TransitionPath& p : queue)
        if (p.subpackage_root != path.subpackage_root) keep.push_back(std::move(p));
      queue = std::move(keep);
      continue;
    }
    if (retries[path.target]++ < 1) {
      queue.push_back(std::move(path));
    } else {
      trace.diagnostics.push_back({"path-abandoned",
                                   "route to '" + path.target + "' failed twice and was dropped",
                                   path.subpackage_root});
    }
  }

  for (const std::string& root : rt.loaded_subpackages()) {
    auto it = rt.manifest().subpackages.find(root);
    result.loaded.emplace_back(root, it == rt.manifest().subpackages.end() ? "" : it->second);
  }
  return result;
}

inline ExplorationTrace explore_dfs_practices(const Mdg& mdg, SimulatedRuntime& rt,
                                              const ApiCatalog& catalog) {
  ExplorationTrace trace;
  trace.phase = 2;

  // Shortest navigation route to every page, once.
  const std::string launch = mdg.pkg.launch_page();
  std::vector<TransitionEdge> sorted = mdg.utg.edges;
  std::sort(sorted.begin(), sorted.end());
  std::map<std::string, std::vector<const TransitionEdge*>> adj;
  for (const TransitionEdge& e : sorted)
    if (!e.target.empty() && e.target != kBackTarget) adj[e.from_page].push_back(&e);
  std::map<std::string, const TransitionEdge*> parent;
  std::set<std::string> seen = {launch};
  std::vector<std::string> frontier = {launch};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const std::string& cur : frontier)
      for (const TransitionEdge* e : adj[cur])
        if (seen.insert(e->target).second) {
          parent[e->target] = e;
          next.push_back(e->target);
        }
    frontier = std::move(next);
  }
  auto route_to = [&](const std::string& page) -> std::optional<std::vector<TransitionEdge>> {
    if (page == launch) return std::vector<TransitionEdge>{};
    if (!seen.count(page)) return std::nullopt;
    std::vector<TransitionEdge> steps;
    for (std::string cur = page; cur != launch;) {
      const TransitionEdge* e = parent.at(cur);
      steps.push_back(*e);
      cur = e->from_page;
    }
    std::reverse(steps.begin(), steps.end());
    return steps;
  };

  std::deque<PrivacyPractice> queue;
  for (PrivacyPractice& p : reachable_practices(mdg, catalog))
    if (p.verdict == "reachable") queue.push_back(std::move(p));

  bool first = true;
  while (!queue.empty()) {
    PrivacyPractice practice = std::move(queue.front());
    queue.pop_front();
    std::string where = practice.site.file + "#" + std::to_string(practice.site.call_node);

    if (practice.entry_page.empty()) {
      trace.diagnostics.push_back(
          {"static-only-evidence", "app-level practice " + practice.site.api + " cannot be driven",
           where});
      continue;
    }
    auto steps = route_to(practice.entry_page);
    if (!steps) {
      trace.diagnostics.push_back({"static-only-evidence",
                                   "no runtime route to page '" + practice.entry_page + "'", where});
      continue;
    }

    detail::reset_to_launch(trace, rt, first);
    first = false;

    bool arrived = true;
    for (const TransitionEdge& edge : *steps) {
      if (rt.current_page() != edge.from_page || !detail::replay_edge(mdg, rt, trace, edge)) {
        arrived = false;
        break;
      }
    }
    if (!arrived || rt.current_page() != practice.entry_page) {
      trace.diagnostics.push_back({"static-only-evidence",
                                   "navigation to '" + practice.entry_page + "' failed", where});
      continue;
    }
    if (rt.page_blocked(practice.entry_page)) {
      trace.diagnostics.push_back({"static-only-evidence",
                                   "page '" + practice.entry_page + "' presents an empty screen",
                                   where});
      continue;
    }

    if (practice.entry_kind == "lifecycle") {
      // Entry events already fired while navigating in; check the log.
      bool observed = false;
      for (const TraceObservation& o : trace.observed)
        if (o.page == practice.entry_page && o.event.api == practice.site.api) observed = true;
      if (!observed)
        trace.diagnostics.push_back({"static-only-evidence",
                                     "lifecycle entry did not surface " + practice.site.api, where});
      continue;
    }

    // GUI entry: locate the bound widget on the live screen and fire it.
    TransitionEdge pseudo;
    pseudo.from_page = practice.entry_page;
    pseudo.target = "";  // landing page is not constrained
    pseudo.trigger.kind = TransitionTrigger::Kind::Widget;
    pseudo.trigger.page = practice.entry_page;
    pseudo.trigger.handler = practice.entry_handler;
    const std::vector<BindCall>* binds = nullptr;
    if (auto it = mdg.bind_calls.find(practice.entry_page); it != mdg.bind_calls.end())
      binds = &it->second;
    if (binds)
      for (const BindCall& bc : *binds)
        if (bc.handler == practice.entry_handler) {
          pseudo.trigger.widget_xpath = bc.widget_xpath;
          pseudo.trigger.event = bc.event;
          break;
        }
    if (pseudo.trigger.widget_xpath.empty()) {
      trace.diagnostics.push_back({"static-only-evidence",
                                   "no markup binding fires '" + practice.entry_handler + "'", where});
      continue;
    }
    size_t before = trace.observed.size();
    detail::replay_edge(mdg, rt, trace, pseudo);  // landing mismatch is fine here
    bool observed = false;
    for (size_t i = before; i < trace.observed.size(); ++i)
      if (trace.observed[i].event.api == practice.site.api) observed = true;
    if (!observed)
      trace.diagnostics.push_back({"static-only-evidence",
                                   "firing '" + practice.entry_handler + "' did not surface " +
                                       practice.site.api,
                                   where});
  }
  return trace;
}

// ---- serialization ----

inline nlohmann::json to_json(const MatchResult& m) {
  nlohmann::json j;
  j["xpath"] = m.candidate.xpath;
  j["method"] = m.method;
  if (m.method == "iou")
    j["score"] = m.iou.value();
  else
    j["distance"] = m.distance;
  return j;
}

inline nlohmann::json to_json(const ExplorationTrace& t) {
  nlohmann::json j;
  j["phase"] = t.phase;
  nlohmann::json steps = nlohmann::json::array();
  for (const TraceStep& s : t.steps) {
    nlohmann::json sj;
    sj["screen_page"] = s.screen_page;
    sj["action"] = s.action;
    sj["handler"] = s.handler;
    if (s.match) sj["match"] = to_json(*s.match);
    sj["resulting_page"] = s.resulting_page;
    if (!s.new_subpackage.empty()) sj["new_subpackage"] = s.new_subpackage;
    sj["ok"] = s.ok;
    if (!s.note.empty()) sj["note"] = s.note;
    steps.push_back(std::move(sj));
  }
  j["steps"] = std::move(steps);
  nlohmann::json observed = nlohmann::json::array();
  for (const TraceObservation& o : t.observed)
    observed.push_back({{"api", o.event.api},
                        {"args_digest", o.event.args_digest},
                        {"page", o.page},
                        {"trigger", o.trigger},
                        {"step", o.step}});
  j["observed"] = std::move(observed);
  nlohmann::json diags = nlohmann::json::array();
  for (const Diagnostic& d : t.diagnostics) diags.push_back(to_json(d));
  j["diagnostics"] = std::move(diags);
  return j;
}

// Dynamic observation log in the shape cross-validation expects.
inline std::vector<ObservedApiEvent> trace_events(const ExplorationTrace& t) {
  std::vector<ObservedApiEvent> out;
  for (const TraceObservation& o : t.observed) out.push_back({o.page, o.trigger, o.event});
  return out;
}

}  // namespace miniscope
