#pragma once

// Guided exploration: record a demonstrated workflow as events plus
// symbolic action steps, detect newly reached states, and apply teach-mode
// confirmations and corrections.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "autonode/decision.hpp"
#include "autonode/world.hpp"

namespace autonode::exploration {

inline constexpr int kDefaultStepCap = 20;

struct ElementDescriptor {
  std::string id;
  std::string text;
  world::ElementKind kind = world::ElementKind::button;
  world::BBox bbox;

  bool operator==(const ElementDescriptor&) const = default;
};

struct ExplorationEvent {
  std::string event_id;  // "<workflow_id>#e<n>"
  std::uint64_t timestamp = 0;
  world::ActionKind action_type = world::ActionKind::click;
  std::string action_description;
  std::optional<ElementDescriptor> element;
  std::string pre_page;   // fingerprint
  std::string post_page;  // fingerprint

  bool operator==(const ExplorationEvent&) const = default;
};

struct ActionStep {
  std::string step_id;
  std::string source_event;
  decision::ParsedDecision command_template;
  bool confirmed = false;
  std::optional<std::string> modified_from;

  bool operator==(const ActionStep&) const = default;
};

enum class TraceStatus { recording, pending_review, finalized };

struct ExplorationTrace {
  std::string workflow_id;
  std::string objective_text;
  std::vector<ExplorationEvent> events;
  std::vector<ActionStep> steps;
  TraceStatus status = TraceStatus::recording;

  bool operator==(const ExplorationTrace&) const = default;
};

// Workflow id encoded in an event id ("<workflow_id>#e<n>").
std::string workflow_of(const ExplorationEvent& event);

class ActionSource {
 public:
  virtual ~ActionSource() = default;
  // nullopt when the demonstration is over.
  virtual std::optional<world::ActionCommand> next() = 0;
};

class ScriptedDemonstration final : public ActionSource {
 public:
  explicit ScriptedDemonstration(std::vector<world::ActionCommand> commands) : commands_(std::move(commands)) {}
  std::optional<world::ActionCommand> next() override {
    if (cursor_ >= commands_.size()) return std::nullopt;
    return commands_[cursor_++];
  }

 private:
  std::vector<world::ActionCommand> commands_;
  std::size_t cursor_ = 0;
};

// Known states of the world interface, keyed by fingerprint.
class StateRegistry {
 public:
  // True when the fingerprint was new.
  bool register_state(const std::string& fingerprint) { return known_.insert(fingerprint).second; }
  bool contains(const std::string& fingerprint) const { return known_.contains(fingerprint); }
  std::size_t size() const { return known_.size(); }
  const std::set<std::string>& states() const { return known_; }

 private:
  std::set<std::string> known_;
};

// "<page_id>#<16 hex>" over the page id and sorted visible element ids.
// Typed buffer contents are deliberately not part of it.
std::string fingerprint(const world::WorldState& state);
std::string page_of(const std::string& fingerprint);

// Runs the demonstration; the recorder waits for pending reveals to settle
// after every action. Throws StepCapExceeded past `step_cap` actions.
ExplorationTrace record_session(const world::SiteModel& site, ActionSource& driver, const std::string& workflow_id,
                                const std::string& objective_text, StateRegistry& registry,
                                int step_cap = kDefaultStepCap);

// Event -> symbolic step (target by element text, not coordinates).
ActionStep tau_explore(const ExplorationEvent& event, const world::ActionCommand& command, std::size_t index);

struct Confirm {};
struct Modify {
  decision::ParsedDecision command_template;
};

struct TeachDecision {
  std::string step_id;
  std::variant<Confirm, Modify> action;
};

ExplorationTrace teach_apply(const ExplorationTrace& trace, const std::vector<TeachDecision>& decisions);

// Marks the trace finalized when every step is confirmed; throws otherwise.
ExplorationTrace finalize(const ExplorationTrace& trace);

struct ReplayedStep {
  world::WorldState pre;
  world::ActionCommand command;
  world::WorldState post;
};

// Re-executes the trace's steps on `site`, resolving symbolic targets by
// exact (case-folded) text. Throws ReplayFailure when a target is missing or
// an unmodified prefix no longer reproduces the recorded fingerprints.
std::vector<ReplayedStep> replay_trace(const world::SiteModel& site, const ExplorationTrace& trace);

nlohmann::json to_json(const ExplorationTrace& trace);
ExplorationTrace trace_from_json(const nlohmann::json& j);
std::vector<TeachDecision> teach_decisions_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<TeachDecision>& decisions);

std::string to_string(TraceStatus status);

}  // namespace autonode::exploration
