#pragma once

// Decision layer: the pluggable model interface, the one-line decision
// grammar and its parser, the action history, and a deterministic scripted
// model used by tests and benchmarks.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "autonode/world.hpp"

namespace autonode::decision {

enum class Level { L1, L2, L3 };

struct Objective {
  std::string id;
  std::string text;
  std::optional<std::vector<std::string>> instruction_set;
  int expected_steps = 0;
  Level level = Level::L1;

  bool operator==(const Objective&) const = default;
};

enum class Outcome { applied, retried, verified_fail };

struct HistoryEntry {
  std::size_t step_index = 0;
  world::ActionCommand command;
  std::string target_text;
  Outcome outcome = Outcome::applied;

  bool operator==(const HistoryEntry&) const = default;
};

struct HistoryLog {
  std::vector<HistoryEntry> entries;

  std::size_t applied_count() const;
  bool operator==(const HistoryLog&) const = default;
};

// Append-only; `step.step_index` must equal the current length.
HistoryLog append_history(HistoryLog log, HistoryEntry step);

enum class DecisionKind { click, type, scroll, hover, done, fail };

struct ParsedDecision {
  DecisionKind kind = DecisionKind::done;
  std::optional<std::string> target_text;
  std::optional<std::string> payload_text;
  std::optional<int> scroll_amount;

  bool terminal() const { return kind == DecisionKind::done || kind == DecisionKind::fail; }
  bool operator==(const ParsedDecision&) const = default;
};

struct RawDecision {
  std::string payload;
  bool operator==(const RawDecision&) const = default;
};

struct DecisionRequest {
  std::vector<std::pair<std::string, world::BBox>> frame_summary;
  std::string prompt;
  HistoryLog history;
  std::optional<std::vector<std::string>> instructions;
  Objective objective;
};

// Grammar: CLICK :: <target> | TYPE :: <text> | SCROLL :: <+-int> |
//          HOVER :: <target> | DONE | FAIL :: <reason>
ParsedDecision parse(const RawDecision& raw);
std::string format(const ParsedDecision& decision);

class DecisionModel {
 public:
  virtual ~DecisionModel() = default;
  // May throw ModelUnavailable. Must be safe to call from several sessions.
  virtual RawDecision decide(const DecisionRequest& request) const = 0;
};

RawDecision decide(const DecisionModel& model, const DecisionRequest& request);

// Follows a fixed rule table indexed by the number of actions already
// applied. With probability `error_rate` a click/hover names another
// on-screen element instead (a hallucinated target).
class ScriptedDecisionModel final : public DecisionModel {
 public:
  ScriptedDecisionModel(std::vector<ParsedDecision> rules, double error_rate, std::uint64_t seed);

  static ScriptedDecisionModel from_lines(const std::vector<std::string>& lines, double error_rate,
                                          std::uint64_t seed);

  RawDecision decide(const DecisionRequest& request) const override;

  const std::vector<ParsedDecision>& rules() const { return rules_; }

 private:
  std::vector<ParsedDecision> rules_;
  double error_rate_;
  std::uint64_t seed_;
};

inline constexpr const char* kDefaultPromptTemplate =
    "Objective: {objective}\n"
    "Visible elements:\n{elements}\n"
    "Actions so far:\n{history}\n"
    "Instructions:\n{instructions}\n"
    "Reply with exactly one line: CLICK :: <text> | TYPE :: <text> | SCROLL :: <rows> | "
    "HOVER :: <text> | DONE | FAIL :: <reason>\n";

std::string render_prompt(const std::string& tmpl, const DecisionRequest& request);

Level classify_level(int expected_steps);
std::string to_string(Level level);
Level level_from_string(const std::string& s);
std::string to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& s);
std::string to_string(DecisionKind kind);

nlohmann::json to_json(const HistoryLog& log);
HistoryLog history_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParsedDecision& d);
ParsedDecision parsed_decision_from_json(const nlohmann::json& j);

}  // namespace autonode::decision
