#pragma once

// Deterministic simulated GUI world: pages of elements, a transition table,
// and configurable faults (spurious overlays, delayed element reveals).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace autonode::world {

struct ScreenBounds {
  int width = 0;
  int height = 0;

  bool operator==(const ScreenBounds&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

struct BBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  Point center() const { return {x + w / 2.0, y + h / 2.0}; }
  bool contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  bool overlaps(const BBox& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  bool within(const ScreenBounds& s) const {
    return w > 0 && h > 0 && x >= 0 && y >= 0 && x + w <= s.width && y + h <= s.height;
  }

  bool operator==(const BBox&) const = default;
};

enum class ElementKind { button, textfield, link, icon, label };

struct UiElement {
  std::string id;
  ElementKind kind = ElementKind::button;
  std::string text;
  BBox bbox;

  bool operator==(const UiElement&) const = default;
};

// Action space: Click / Type / Scroll / Hover.
enum class ActionKind { click, type, scroll, hover };

struct Click {
  int x = 0;
  int y = 0;
  bool operator==(const Click&) const = default;
};
struct TypeText {
  std::string text;
  bool operator==(const TypeText&) const = default;
};
struct Scroll {
  int amount = 0;  // rows; positive scrolls down
  bool operator==(const Scroll&) const = default;
};
struct Hover {
  int x = 0;
  int y = 0;
  bool operator==(const Hover&) const = default;
};

using ActionCommand = std::variant<Click, TypeText, Scroll, Hover>;

ActionKind kind_of(const ActionCommand& cmd);

// Transition effects fired when an element receives an action.
struct GotoPage {
  std::string page;
  bool operator==(const GotoPage&) const = default;
};
struct RevealElement {
  UiElement element;
  std::optional<int> delay_steps;  // falls back to FaultConfig::default_reveal_delay
  bool operator==(const RevealElement&) const = default;
};
struct SetBuffer {
  std::string element;
  std::string value;
  bool operator==(const SetBuffer&) const = default;
};
struct NoOp {
  bool operator==(const NoOp&) const = default;
};

using Effect = std::variant<GotoPage, RevealElement, SetBuffer, NoOp>;

struct TransitionRule {
  std::string page;
  std::string element;
  ActionKind action = ActionKind::click;
  Effect effect;

  bool operator==(const TransitionRule&) const = default;
};

struct FaultConfig {
  double spurious_prob = 0.0;
  std::vector<UiElement> spurious_pool;
  double text_noise_rate = 0.0;
  int default_reveal_delay = 0;

  bool operator==(const FaultConfig&) const = default;
};

struct SiteModel {
  ScreenBounds screen;
  std::map<std::string, std::vector<UiElement>> pages;
  std::vector<TransitionRule> transitions;
  std::string start_page;
  FaultConfig faults;

  const TransitionRule* find_transition(const std::string& page, const std::string& element,
                                        ActionKind action) const;

  bool operator==(const SiteModel&) const = default;
};

struct PendingReveal {
  UiElement element;
  int steps_remaining = 1;

  bool operator==(const PendingReveal&) const = default;
};

// Immutable value; transition() returns a fresh state.
struct WorldState {
  std::string page_id;
  std::vector<UiElement> visible;  // screen coordinates after scrolling
  std::vector<PendingReveal> pending_reveals;
  std::vector<UiElement> revealed;  // revealed on the current page, page coordinates
  std::uint64_t step_counter = 0;
  std::map<std::string, std::string> typed_buffers;
  std::optional<std::string> focused;
  std::optional<std::string> hovered;
  int scroll_offset = 0;

  bool operator==(const WorldState&) const = default;
};

// Ground truth for where a rendered element came from. Only the frame carries
// it; perception hides it from everything but test code.
enum class SourceKind { real, spurious, unknown };

struct RenderedElement {
  UiElement element;
  SourceKind source = SourceKind::real;

  bool operator==(const RenderedElement&) const = default;
};

struct Frame {
  ScreenBounds screen;
  std::vector<RenderedElement> elements;

  bool operator==(const Frame&) const = default;
};

inline constexpr int kScrollRowHeight = 40;

WorldState initial_state(const SiteModel& model);

// g(S_t, A_t) -> S_{t+1}. Never throws: misdirected actions are no-op steps.
WorldState transition(const WorldState& state, const ActionCommand& action, const SiteModel& model);

// One step of waiting: pending reveals tick down, nothing else changes.
WorldState advance_time(const WorldState& state, const SiteModel& model);

// Advances time until no reveal is pending.
WorldState settle(const WorldState& state, const SiteModel& model);

Frame screenshot(const WorldState& state, const SiteModel& model, std::uint64_t seed);

// Topmost visible element containing the point, if any.
const UiElement* element_at(const WorldState& state, double x, double y);
const UiElement* find_visible(const WorldState& state, const std::string& element_id);

// Strips all faults; used when a noiseless view of the site is required.
SiteModel without_faults(SiteModel model);

// --- JSON -----------------------------------------------------------------

SiteModel load_site_model(const nlohmann::json& doc);
SiteModel load_site_model_file(const std::filesystem::path& path);
nlohmann::json to_json(const SiteModel& model);

nlohmann::json to_json(const UiElement& element);
UiElement element_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ActionCommand& cmd);
ActionCommand command_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BBox& box);
BBox bbox_from_json(const nlohmann::json& j);

std::string to_string(ElementKind kind);
ElementKind element_kind_from_string(const std::string& s);
std::string to_string(ActionKind kind);
ActionKind action_kind_from_string(const std::string& s);

std::string describe(const ActionCommand& cmd);

}  // namespace autonode::world
