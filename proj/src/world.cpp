#include "autonode/world.hpp"

#include <algorithm>
#include <set>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/rng.hpp"

namespace autonode::world {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::vector<UiElement>& page_elements(const SiteModel& model, const std::string& page) {
  static const std::vector<UiElement> kEmpty;
  const auto it = model.pages.find(page);
  return it == model.pages.end() ? kEmpty : it->second;
}

int max_scroll_offset(const SiteModel& model, const WorldState& state) {
  int lowest = 0;
  for (const auto& e : page_elements(model, state.page_id)) lowest = std::max(lowest, e.bbox.y);
  for (const auto& e : state.revealed) lowest = std::max(lowest, e.bbox.y);
  return lowest / kScrollRowHeight;
}

// Visible window: elements scrolled above the top edge disappear, the rest
// shift up by whole rows.
void render(WorldState& state, const SiteModel& model) {
  const int shift = state.scroll_offset * kScrollRowHeight;
  state.visible.clear();
  auto place = [&](const UiElement& e) {
    if (e.bbox.y < shift) return;
    UiElement shown = e;
    shown.bbox.y -= shift;
    state.visible.push_back(std::move(shown));
  };
  for (const auto& e : page_elements(model, state.page_id)) place(e);
  for (const auto& e : state.revealed) place(e);
  if (state.focused && !find_visible(state, *state.focused)) state.focused.reset();
}

void tick_pending(WorldState& state) {
  std::vector<PendingReveal> still_pending;
  for (auto& p : state.pending_reveals) {
    if (--p.steps_remaining <= 0) {
      state.revealed.push_back(p.element);
    } else {
      still_pending.push_back(p);
    }
  }
  state.pending_reveals = std::move(still_pending);
}

bool known_on_page(const WorldState& state, const SiteModel& model, const std::string& id) {
  for (const auto& e : page_elements(model, state.page_id))
    if (e.id == id) return true;
  for (const auto& e : state.revealed)
    if (e.id == id) return true;
  for (const auto& p : state.pending_reveals)
    if (p.element.id == id) return true;
  return false;
}

void apply_effect(WorldState& state, const SiteModel& model, const Effect& effect) {
  std::visit(overloaded{
                 [&](const GotoPage& g) {
                   state.page_id = g.page;
                   state.revealed.clear();
                   state.pending_reveals.clear();
                   state.scroll_offset = 0;
                   state.focused.reset();
                   state.hovered.reset();
                 },
                 [&](const RevealElement& r) {
                   if (known_on_page(state, model, r.element.id)) return;
                   const int delay = r.delay_steps.value_or(model.faults.default_reveal_delay);
                   if (delay <= 0) {
                     state.revealed.push_back(r.element);
                   } else {
                     state.pending_reveals.push_back({r.element, delay});
                   }
                 },
                 [&](const SetBuffer& s) { state.typed_buffers[s.element] = s.value; },
                 [](const NoOp&) {},
             },
             effect);
}

void fire(WorldState& state, const SiteModel& model, const std::string& element_id, ActionKind kind) {
  if (const auto* rule = model.find_transition(state.page_id, element_id, kind)) {
    apply_effect(state, model, rule->effect);
  }
}

}  // namespace

ActionKind kind_of(const ActionCommand& cmd) {
  return std::visit(overloaded{
                        [](const Click&) { return ActionKind::click; },
                        [](const TypeText&) { return ActionKind::type; },
                        [](const Scroll&) { return ActionKind::scroll; },
                        [](const Hover&) { return ActionKind::hover; },
                    },
                    cmd);
}

const TransitionRule* SiteModel::find_transition(const std::string& page, const std::string& element,
                                                 ActionKind action) const {
  for (const auto& t : transitions) {
    if (t.page == page && t.element == element && t.action == action) return &t;
  }
  return nullptr;
}

WorldState initial_state(const SiteModel& model) {
  WorldState s;
  s.page_id = model.start_page;
  render(s, model);
  return s;
}

const UiElement* element_at(const WorldState& state, double x, double y) {
  for (auto it = state.visible.rbegin(); it != state.visible.rend(); ++it) {
    if (it->bbox.contains(x, y)) return &*it;
  }
  return nullptr;
}

const UiElement* find_visible(const WorldState& state, const std::string& element_id) {
  for (const auto& e : state.visible)
    if (e.id == element_id) return &e;
  return nullptr;
}

WorldState transition(const WorldState& state, const ActionCommand& action, const SiteModel& model) {
  WorldState next = state;
  next.step_counter += 1;
  tick_pending(next);

  std::visit(overloaded{
                 [&](const Click& c) {
                   const UiElement* target = element_at(state, c.x, c.y);
                   if (!target) {
                     next.focused.reset();
                     return;
                   }
                   next.focused = target->kind == ElementKind::textfield
                                      ? std::optional<std::string>(target->id)
                                      : std::nullopt;
                   fire(next, model, target->id, ActionKind::click);
                 },
                 [&](const TypeText& t) {
                   if (!state.focused) return;
                   const UiElement* field = find_visible(state, *state.focused);
                   if (!field || field->kind != ElementKind::textfield) return;
                   next.typed_buffers[field->id] += t.text;
                   fire(next, model, field->id, ActionKind::type);
                 },
                 [&](const Scroll& s) {
                   next.scroll_offset =
                       std::clamp(state.scroll_offset + s.amount, 0, max_scroll_offset(model, next));
                 },
                 [&](const Hover& h) {
                   const UiElement* target = element_at(state, h.x, h.y);
                   next.hovered = target ? std::optional<std::string>(target->id) : std::nullopt;
                   if (target) fire(next, model, target->id, ActionKind::hover);
                 },
             },
             action);

  render(next, model);
  return next;
}

WorldState advance_time(const WorldState& state, const SiteModel& model) {
  WorldState next = state;
  next.step_counter += 1;
  tick_pending(next);
  render(next, model);
  return next;
}

WorldState settle(const WorldState& state, const SiteModel& model) {
  WorldState s = state;
  while (!s.pending_reveals.empty()) s = advance_time(s, model);
  return s;
}

Frame screenshot(const WorldState& state, const SiteModel& model, std::uint64_t seed) {
  Frame frame;
  frame.screen = model.screen;
  frame.elements.reserve(state.visible.size() + model.faults.spurious_pool.size());
  for (const auto& e : state.visible) frame.elements.push_back({e, SourceKind::real});

  Rng rng(derive_seed(seed, {0x5c4ee2ULL}));
  for (const auto& decoy : model.faults.spurious_pool) {
    if (!rng.bernoulli(model.faults.spurious_prob)) continue;
    const auto pos = rng.range(0, static_cast<std::int64_t>(frame.elements.size()));
    frame.elements.insert(frame.elements.begin() + pos, RenderedElement{decoy, SourceKind::spurious});
  }
  return frame;
}

SiteModel without_faults(SiteModel model) {
  model.faults = FaultConfig{};
  return model;
}

std::string describe(const ActionCommand& cmd) {
  return std::visit(overloaded{
                        [](const Click& c) { return "click(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; },
                        [](const TypeText& t) { return "type(\"" + t.text + "\")"; },
                        [](const Scroll& s) { return "scroll(" + std::to_string(s.amount) + ")"; },
                        [](const Hover& h) { return "hover(" + std::to_string(h.x) + "," + std::to_string(h.y) + ")"; },
                    },
                    cmd);
}

// --- enums ----------------------------------------------------------------

std::string to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::button: return "button";
    case ElementKind::textfield: return "textfield";
    case ElementKind::link: return "link";
    case ElementKind::icon: return "icon";
    case ElementKind::label: return "label";
  }
  return "button";
}

ElementKind element_kind_from_string(const std::string& s) {
  if (s == "button") return ElementKind::button;
  if (s == "textfield") return ElementKind::textfield;
  if (s == "link") return ElementKind::link;
  if (s == "icon") return ElementKind::icon;
  if (s == "label") return ElementKind::label;
  throw SchemaError("unknown element kind '" + s + "'");
}

std::string to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::click: return "click";
    case ActionKind::type: return "type";
    case ActionKind::scroll: return "scroll";
    case ActionKind::hover: return "hover";
  }
  return "click";
}

ActionKind action_kind_from_string(const std::string& s) {
  if (s == "click") return ActionKind::click;
  if (s == "type") return ActionKind::type;
  if (s == "scroll") return ActionKind::scroll;
  if (s == "hover") return ActionKind::hover;
  throw SchemaError("unknown action kind '" + s + "'");
}

// --- JSON -----------------------------------------------------------------

using nlohmann::json;

json to_json(const BBox& box) { return json::array({box.x, box.y, box.w, box.h}); }

BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw SchemaError("bbox must be [x,y,w,h]");
  for (const auto& v : j)
    if (!v.is_number_integer()) throw SchemaError("bbox entries must be integers");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

json to_json(const UiElement& e) {
  return json{{"id", e.id}, {"kind", to_string(e.kind)}, {"text", e.text}, {"bbox", to_json(e.bbox)}};
}

UiElement element_from_json(const json& j) {
  UiElement e;
  e.id = json_io::require_string(j, "id");
  e.kind = element_kind_from_string(json_io::require_string(j, "kind"));
  e.text = json_io::require_string(j, "text");
  e.bbox = bbox_from_json(json_io::require(j, "bbox"));
  return e;
}

json to_json(const ActionCommand& cmd) {
  return std::visit(overloaded{
                        [](const Click& c) { return json{{"type", "click"}, {"x", c.x}, {"y", c.y}}; },
                        [](const TypeText& t) { return json{{"type", "type"}, {"text", t.text}}; },
                        [](const Scroll& s) { return json{{"type", "scroll"}, {"amount", s.amount}}; },
                        [](const Hover& h) { return json{{"type", "hover"}, {"x", h.x}, {"y", h.y}}; },
                    },
                    cmd);
}

ActionCommand command_from_json(const json& j) {
  switch (action_kind_from_string(json_io::require_string(j, "type"))) {
    case ActionKind::click: return Click{json_io::require_int(j, "x"), json_io::require_int(j, "y")};
    case ActionKind::type: return TypeText{json_io::require_string(j, "text")};
    case ActionKind::scroll: return Scroll{json_io::require_int(j, "amount")};
    case ActionKind::hover: return Hover{json_io::require_int(j, "x"), json_io::require_int(j, "y")};
  }
  throw SchemaError("unreachable command type");
}

namespace {

json effect_to_json(const Effect& effect) {
  return std::visit(overloaded{
                        [](const GotoPage& g) { return json{{"goto", g.page}}; },
                        [](const RevealElement& r) {
                          json j{{"reveal", to_json(r.element)}};
                          if (r.delay_steps) j["delay"] = *r.delay_steps;
                          return j;
                        },
                        [](const SetBuffer& s) {
                          return json{{"set_buffer", json{{"element", s.element}, {"value", s.value}}}};
                        },
                        [](const NoOp&) { return json{{"no_op", true}}; },
                    },
                    effect);
}

Effect effect_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("effect must be an object");
  if (j.contains("goto")) return GotoPage{json_io::require_string(j, "goto")};
  if (j.contains("reveal")) {
    RevealElement r{element_from_json(j.at("reveal")), std::nullopt};
    if (j.contains("delay")) r.delay_steps = json_io::require_int(j, "delay");
    return r;
  }
  if (j.contains("set_buffer")) {
    const auto& s = j.at("set_buffer");
    return SetBuffer{json_io::require_string(s, "element"), json_io::require_string(s, "value")};
  }
  if (j.contains("no_op")) return NoOp{};
  throw SchemaError("effect must be one of goto/reveal/set_buffer/no_op");
}

void check_element(const UiElement& e, const ScreenBounds& screen, const std::string& where) {
  if (e.id.empty()) throw SchemaError(where + ": element id must be non-empty");
  if (!e.bbox.within(screen)) throw ConsistencyError(where + ": bbox of '" + e.id + "' outside screen");
  if (e.text.empty() && e.kind != ElementKind::icon)
    throw ConsistencyError(where + ": element '" + e.id + "' has empty text but is not an icon");
}

void validate(const SiteModel& m) {
  if (m.screen.width <= 0 || m.screen.height <= 0) throw ConsistencyError("screen must be positive");
  if (!m.pages.contains(m.start_page)) throw ConsistencyError("start_page '" + m.start_page + "' not a page");

  std::set<std::string> all_ids;
  std::map<std::string, std::set<std::string>> ids_on_page;
  std::set<std::string> textfields;
  for (const auto& [page, elements] : m.pages) {
    auto& ids = ids_on_page[page];
    for (const auto& e : elements) {
      check_element(e, m.screen, "page " + page);
      if (!ids.insert(e.id).second) throw ConsistencyError("duplicate element id '" + e.id + "' on page " + page);
      all_ids.insert(e.id);
      if (e.kind == ElementKind::textfield) textfields.insert(e.id);
    }
  }
  // The same element may be revealed by several transitions, but it must not
  // shadow a static element of its page.
  std::map<std::pair<std::string, std::string>, UiElement> reveals;
  for (const auto& t : m.transitions) {
    const auto* r = std::get_if<RevealElement>(&t.effect);
    if (!r) continue;
    check_element(r->element, m.screen, "reveal on " + t.page);
    if (r->delay_steps && *r->delay_steps < 0) throw ConsistencyError("negative reveal delay");
    const auto key = std::make_pair(t.page, r->element.id);
    if (const auto it = reveals.find(key); it != reveals.end()) {
      if (it->second != r->element)
        throw ConsistencyError("conflicting reveals of '" + r->element.id + "' on page " + t.page);
      continue;
    }
    if (ids_on_page[t.page].contains(r->element.id))
      throw ConsistencyError("revealed element '" + r->element.id + "' collides on page " + t.page);
    reveals.emplace(key, r->element);
    ids_on_page[t.page].insert(r->element.id);
    all_ids.insert(r->element.id);
    if (r->element.kind == ElementKind::textfield) textfields.insert(r->element.id);
  }

  std::set<std::tuple<std::string, std::string, ActionKind>> seen;
  for (const auto& t : m.transitions) {
    if (!m.pages.contains(t.page)) throw ConsistencyError("transition on unknown page '" + t.page + "'");
    if (!ids_on_page[t.page].contains(t.element))
      throw ConsistencyError("transition source '" + t.element + "' not on page " + t.page);
    if (!seen.insert({t.page, t.element, t.action}).second)
      throw ConsistencyError("duplicate transition for '" + t.element + "' on " + t.page);
    if (const auto* g = std::get_if<GotoPage>(&t.effect); g && !m.pages.contains(g->page))
      throw ConsistencyError("transition targets unknown page '" + g->page + "'");
    if (const auto* s = std::get_if<SetBuffer>(&t.effect); s && !textfields.contains(s->element))
      throw ConsistencyError("set_buffer targets unknown textfield '" + s->element + "'");
  }

  const auto& f = m.faults;
  if (f.spurious_prob < 0.0 || f.spurious_prob > 1.0) throw ConsistencyError("spurious_prob outside [0,1]");
  if (f.text_noise_rate < 0.0 || f.text_noise_rate > 1.0) throw ConsistencyError("text_noise_rate outside [0,1]");
  if (f.default_reveal_delay < 0) throw ConsistencyError("default_reveal_delay must be >= 0");
  std::set<std::string> pool_ids;
  for (const auto& e : f.spurious_pool) {
    check_element(e, m.screen, "spurious_pool");
    if (all_ids.contains(e.id)) throw ConsistencyError("spurious element '" + e.id + "' collides with a real id");
    if (!pool_ids.insert(e.id).second) throw ConsistencyError("duplicate spurious id '" + e.id + "'");
  }
}

}  // namespace

SiteModel load_site_model(const json& doc) {
  SiteModel m;
  try {
    const auto& screen = json_io::require(doc, "screen");
    m.screen = {json_io::require_int(screen, "w"), json_io::require_int(screen, "h")};
    m.start_page = json_io::require_string(doc, "start_page");

    const auto& pages = json_io::require(doc, "pages");
    if (!pages.is_object()) throw SchemaError("pages must be an object");
    for (const auto& [page, elements] : pages.items()) {
      if (!elements.is_array()) throw SchemaError("page '" + page + "' must be an array");
      auto& list = m.pages[page];
      for (const auto& e : elements) list.push_back(element_from_json(e));
    }

    const auto& transitions = json_io::require(doc, "transitions");
    if (!transitions.is_array()) throw SchemaError("transitions must be an array");
    for (const auto& t : transitions) {
      m.transitions.push_back({json_io::require_string(t, "page"), json_io::require_string(t, "element"),
                               action_kind_from_string(json_io::require_string(t, "action")),
                               effect_from_json(json_io::require(t, "effect"))});
    }

    const auto& faults = json_io::require(doc, "faults");
    m.faults.spurious_prob = json_io::require_number(faults, "spurious_prob");
    m.faults.text_noise_rate = json_io::require_number(faults, "text_noise_rate");
    m.faults.default_reveal_delay = json_io::require_int(faults, "default_reveal_delay");
    const auto& pool = json_io::require(faults, "spurious_pool");
    if (!pool.is_array()) throw SchemaError("spurious_pool must be an array");
    for (const auto& e : pool) m.faults.spurious_pool.push_back(element_from_json(e));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  }
  validate(m);
  return m;
}

SiteModel load_site_model_file(const std::filesystem::path& path) {
  return load_site_model(json_io::read_file(path));
}

json to_json(const SiteModel& m) {
  json pages = json::object();
  for (const auto& [page, elements] : m.pages) {
    json list = json::array();
    for (const auto& e : elements) list.push_back(to_json(e));
    pages[page] = std::move(list);
  }
  json transitions = json::array();
  for (const auto& t : m.transitions) {
    transitions.push_back(json{{"page", t.page},
                               {"element", t.element},
                               {"action", to_string(t.action)},
                               {"effect", effect_to_json(t.effect)}});
  }
  json pool = json::array();
  for (const auto& e : m.faults.spurious_pool) pool.push_back(to_json(e));
  return json{{"screen", json{{"w", m.screen.width}, {"h", m.screen.height}}},
              {"start_page", m.start_page},
              {"pages", std::move(pages)},
              {"transitions", std::move(transitions)},
              {"faults", json{{"spurious_prob", m.faults.spurious_prob},
                              {"spurious_pool", std::move(pool)},
                              {"text_noise_rate", m.faults.text_noise_rate},
                              {"default_reveal_delay", m.faults.default_reveal_delay}}}};
}

}  // namespace autonode::world
