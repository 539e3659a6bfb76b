#include "autonode/exploration.hpp"

#include <algorithm>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/text.hpp"

namespace autonode::exploration {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ElementDescriptor descriptor(const world::UiElement& e) { return {e.id, e.text, e.kind, e.bbox}; }

std::string base_step_id(const std::string& id) {
  const auto pos = id.find(".m");
  return pos == std::string::npos ? id : id.substr(0, pos);
}

}  // namespace

std::string workflow_of(const ExplorationEvent& event) {
  const auto pos = event.event_id.rfind('#');
  return pos == std::string::npos ? std::string() : event.event_id.substr(0, pos);
}

std::string fingerprint(const world::WorldState& state) {
  std::vector<std::string> ids;
  ids.reserve(state.visible.size());
  for (const auto& e : state.visible) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  std::string key = state.page_id;
  for (const auto& id : ids) {
    key.push_back('\0');
    key += id;
  }
  return state.page_id + "#" + text::hex64(text::fnv1a(key));
}

std::string page_of(const std::string& fp) {
  const auto pos = fp.rfind('#');
  return pos == std::string::npos ? fp : fp.substr(0, pos);
}

ActionStep tau_explore(const ExplorationEvent& event, const world::ActionCommand& command, std::size_t index) {
  ActionStep step;
  step.step_id = workflow_of(event) + "#s" + std::to_string(index);
  step.source_event = event.event_id;
  auto& t = step.command_template;
  const std::string target = event.element ? event.element->text : std::string();
  std::visit(overloaded{
                 [&](const world::Click&) {
                   t.kind = decision::DecisionKind::click;
                   t.target_text = target;
                 },
                 [&](const world::Hover&) {
                   t.kind = decision::DecisionKind::hover;
                   t.target_text = target;
                 },
                 [&](const world::TypeText& tt) {
                   t.kind = decision::DecisionKind::type;
                   t.payload_text = tt.text;
                   if (event.element) t.target_text = target;
                 },
                 [&](const world::Scroll& s) {
                   t.kind = decision::DecisionKind::scroll;
                   t.scroll_amount = s.amount;
                 },
             },
             command);
  return step;
}

ExplorationTrace record_session(const world::SiteModel& site, ActionSource& driver, const std::string& workflow_id,
                                const std::string& objective_text, StateRegistry& registry, int step_cap) {
  ExplorationTrace trace;
  trace.workflow_id = workflow_id;
  trace.objective_text = objective_text;

  world::WorldState state = world::settle(world::initial_state(site), site);
  registry.register_state(fingerprint(state));

  while (auto cmd = driver.next()) {
    if (static_cast<int>(trace.events.size()) >= step_cap) {
      throw StepCapExceeded("workflow '" + workflow_id + "' exceeds " + std::to_string(step_cap) + " steps");
    }
    ExplorationEvent ev;
    ev.event_id = workflow_id + "#e" + std::to_string(trace.events.size());
    ev.action_type = world::kind_of(*cmd);
    ev.pre_page = fingerprint(state);

    const world::UiElement* element = std::visit(
        overloaded{
            [&](const world::Click& c) { return world::element_at(state, c.x, c.y); },
            [&](const world::Hover& h) { return world::element_at(state, h.x, h.y); },
            [&](const world::TypeText&) {
              return state.focused ? world::find_visible(state, *state.focused) : nullptr;
            },
            [&](const world::Scroll&) -> const world::UiElement* { return nullptr; },
        },
        *cmd);
    if (element) ev.element = descriptor(*element);

    const std::string verb = world::to_string(ev.action_type);
    std::visit(overloaded{
                   [&](const world::TypeText& t) {
                     ev.action_description = "type \"" + t.text + "\" into " +
                                             (element ? element->text : std::string("nothing")) + " on " +
                                             state.page_id;
                   },
                   [&](const world::Scroll& s) {
                     ev.action_description = "scroll " + std::to_string(s.amount) + " on " + state.page_id;
                   },
                   [&](const auto&) {
                     ev.action_description =
                         verb + " " + (element ? element->text : std::string("empty space")) + " on " + state.page_id;
                   },
               },
               *cmd);

    state = world::settle(world::transition(state, *cmd, site), site);
    ev.timestamp = state.step_counter;
    ev.post_page = fingerprint(state);
    registry.register_state(ev.post_page);

    trace.steps.push_back(tau_explore(ev, *cmd, trace.events.size()));
    trace.events.push_back(std::move(ev));
  }
  trace.status = TraceStatus::pending_review;
  return trace;
}

ExplorationTrace teach_apply(const ExplorationTrace& trace, const std::vector<TeachDecision>& decisions) {
  if (trace.status == TraceStatus::finalized) throw AlreadyFinalized("trace '" + trace.workflow_id + "'");
  if (trace.status == TraceStatus::recording) throw Error("trace '" + trace.workflow_id + "' is still recording");

  ExplorationTrace out = trace;
  for (const auto& d : decisions) {
    auto it = std::find_if(out.steps.begin(), out.steps.end(),
                           [&](const ActionStep& s) { return s.step_id == d.step_id; });
    if (it == out.steps.end()) throw UnknownStep("'" + d.step_id + "' in trace '" + trace.workflow_id + "'");
    std::visit(overloaded{
                   [&](const Confirm&) { it->confirmed = true; },
                   [&](const Modify& m) {
                     const std::string base = base_step_id(it->step_id);
                     int revision = 1;
                     if (const auto pos = it->step_id.find(".m"); pos != std::string::npos)
                       revision = std::stoi(it->step_id.substr(pos + 2)) + 1;
                     it->modified_from = it->step_id;
                     it->step_id = base + ".m" + std::to_string(revision);
                     it->command_template = m.command_template;
                     it->confirmed = true;
                   },
               },
               d.action);
  }
  const bool all_confirmed =
      std::all_of(out.steps.begin(), out.steps.end(), [](const ActionStep& s) { return s.confirmed; });
  if (all_confirmed) out.status = TraceStatus::finalized;
  return out;
}

ExplorationTrace finalize(const ExplorationTrace& trace) {
  if (trace.status == TraceStatus::finalized) return trace;
  for (const auto& s : trace.steps) {
    if (!s.confirmed) throw NotFinalized("step '" + s.step_id + "' is not confirmed");
  }
  ExplorationTrace out = trace;
  out.status = TraceStatus::finalized;
  return out;
}

std::vector<ReplayedStep> replay_trace(const world::SiteModel& site, const ExplorationTrace& trace) {
  std::vector<ReplayedStep> out;
  out.reserve(trace.steps.size());
  world::WorldState state = world::settle(world::initial_state(site), site);
  bool diverged = false;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    const auto& tmpl = step.command_template;
    if (step.modified_from) diverged = true;
    if (!diverged && i < trace.events.size() && fingerprint(state) != trace.events[i].pre_page) {
      throw ReplayFailure("state before step '" + step.step_id + "' no longer matches the recording");
    }

    auto locate = [&]() -> world::Point {
      if (!step.modified_from && i < trace.events.size() && trace.events[i].element) {
        if (const auto* e = world::find_visible(state, trace.events[i].element->id)) return e->bbox.center();
      }
      const std::string want = text::fold(tmpl.target_text.value_or(""));
      for (const auto& e : state.visible) {
        if (text::fold(e.text) == want) return e.bbox.center();
      }
      throw ReplayFailure("target '" + tmpl.target_text.value_or("") + "' of step '" + step.step_id +
                          "' not on screen");
    };

    world::ActionCommand cmd;
    switch (tmpl.kind) {
      case decision::DecisionKind::click: {
        const auto p = locate();
        cmd = world::Click{static_cast<int>(p.x), static_cast<int>(p.y)};
        break;
      }
      case decision::DecisionKind::hover: {
        const auto p = locate();
        cmd = world::Hover{static_cast<int>(p.x), static_cast<int>(p.y)};
        break;
      }
      case decision::DecisionKind::type: cmd = world::TypeText{tmpl.payload_text.value_or("")}; break;
      case decision::DecisionKind::scroll: cmd = world::Scroll{tmpl.scroll_amount.value_or(0)}; break;
      default: throw ReplayFailure("step '" + step.step_id + "' holds a terminal decision");
    }
    world::WorldState next = world::settle(world::transition(state, cmd, site), site);
    out.push_back({state, cmd, next});
    state = std::move(next);
  }
  return out;
}

// --- JSON -----------------------------------------------------------------

std::string to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::recording: return "recording";
    case TraceStatus::pending_review: return "pending_review";
    case TraceStatus::finalized: return "finalized";
  }
  return "recording";
}

namespace {

TraceStatus status_from_string(const std::string& s) {
  if (s == "recording") return TraceStatus::recording;
  if (s == "pending_review") return TraceStatus::pending_review;
  if (s == "finalized") return TraceStatus::finalized;
  throw SchemaError("unknown trace status '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const ExplorationTrace& trace) {
  using nlohmann::json;
  json events = json::array();
  for (const auto& e : trace.events) {
    json element = nullptr;
    if (e.element) {
      element = json{{"id", e.element->id},
                     {"text", e.element->text},
                     {"kind", world::to_string(e.element->kind)},
                     {"bbox", world::to_json(e.element->bbox)}};
    }
    events.push_back(json{{"id", e.event_id},
                          {"ts", e.timestamp},
                          {"type", world::to_string(e.action_type)},
                          {"desc", e.action_description},
                          {"element", std::move(element)},
                          {"pre", e.pre_page},
                          {"post", e.post_page}});
  }
  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back(json{{"id", s.step_id},
                         {"event", s.source_event},
                         {"cmd", decision::to_json(s.command_template)},
                         {"confirmed", s.confirmed},
                         {"modified_from", s.modified_from ? json(*s.modified_from) : json(nullptr)}});
  }
  return json{{"workflow_id", trace.workflow_id},
              {"objective", trace.objective_text},
              {"status", to_string(trace.status)},
              {"events", std::move(events)},
              {"steps", std::move(steps)}};
}

ExplorationTrace trace_from_json(const nlohmann::json& j) {
  ExplorationTrace t;
  try {
    t.workflow_id = json_io::require_string(j, "workflow_id");
    t.objective_text = json_io::require_string(j, "objective");
    t.status = status_from_string(json_io::require_string(j, "status"));
    for (const auto& e : json_io::require(j, "events")) {
      ExplorationEvent ev;
      ev.event_id = json_io::require_string(e, "id");
      ev.timestamp = json_io::require(e, "ts").get<std::uint64_t>();
      ev.action_type = world::action_kind_from_string(json_io::require_string(e, "type"));
      ev.action_description = json_io::require_string(e, "desc");
      const auto& el = json_io::require(e, "element");
      if (!el.is_null()) {
        ev.element = ElementDescriptor{json_io::require_string(el, "id"), json_io::require_string(el, "text"),
                                       world::element_kind_from_string(json_io::require_string(el, "kind")),
                                       world::bbox_from_json(json_io::require(el, "bbox"))};
      }
      ev.pre_page = json_io::require_string(e, "pre");
      ev.post_page = json_io::require_string(e, "post");
      if (!t.events.empty() && ev.timestamp <= t.events.back().timestamp)
        throw SchemaError("event timestamps must strictly increase");
      t.events.push_back(std::move(ev));
    }
    for (const auto& s : json_io::require(j, "steps")) {
      ActionStep st;
      st.step_id = json_io::require_string(s, "id");
      st.source_event = json_io::require_string(s, "event");
      st.command_template = decision::parsed_decision_from_json(json_io::require(s, "cmd"));
      st.confirmed = json_io::require(s, "confirmed").get<bool>();
      const auto& mf = json_io::require(s, "modified_from");
      if (!mf.is_null()) st.modified_from = mf.get<std::string>();
      if (st.modified_from && !st.confirmed) throw SchemaError("modified step must be confirmed");
      t.steps.push_back(std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  }
  if (t.status != TraceStatus::recording && t.steps.size() != t.events.size())
    throw SchemaError("trace must hold one step per event");
  if (t.status == TraceStatus::finalized) {
    for (const auto& s : t.steps)
      if (!s.confirmed) throw SchemaError("finalized trace has unconfirmed step '" + s.step_id + "'");
  }
  return t;
}

std::vector<TeachDecision> teach_decisions_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("teach decisions must be an array");
  std::vector<TeachDecision> out;
  for (const auto& d : j) {
    TeachDecision td;
    td.step_id = json_io::require_string(d, "step");
    const std::string action = json_io::require_string(d, "action");
    if (action == "confirm") {
      td.action = Confirm{};
    } else if (action == "modify") {
      // the command is either a one-line decision or its structured form
      const auto& cmd = json_io::require(d, "cmd");
      if (cmd.is_string()) {
        try {
          td.action = Modify{decision::parse(decision::RawDecision{cmd.get<std::string>()})};
        } catch (const ParseError& e) {
          throw SchemaError(std::string("step ") + td.step_id + ": " + e.what());
        }
      } else {
        td.action = Modify{decision::parsed_decision_from_json(cmd)};
      }
    } else {
      throw SchemaError("teach action must be confirm or modify, got '" + action + "'");
    }
    out.push_back(std::move(td));
  }
  return out;
}

nlohmann::json to_json(const std::vector<TeachDecision>& decisions) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : decisions) {
    if (const auto* m = std::get_if<Modify>(&d.action)) {
      out.push_back({{"step", d.step_id}, {"action", "modify"}, {"cmd", decision::to_json(m->command_template)}});
    } else {
      out.push_back({{"step", d.step_id}, {"action", "confirm"}});
    }
  }
  return out;
}

}  // namespace autonode::exploration
