#pragma once

// Session loops for the three process modes. A: perceive, decide, act.
// B: adds the instruction set and verification with retries. C: replaces the
// decision model with graph traversal, node selection and spatial grounding,
// and consults objective memory before planning.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autonode/decision.hpp"
#include "autonode/exploration.hpp"
#include "autonode/graph.hpp"
#include "autonode/grounding.hpp"
#include "autonode/memory.hpp"
#include "autonode/perception.hpp"
#include "autonode/verification.hpp"
#include "autonode/world.hpp"

namespace autonode::engine {

enum class Mode { A, B, C };

struct Goal {
  std::string page;
  std::map<std::string, std::string> buffers;  // element id -> required contents

  bool operator==(const Goal&) const = default;
};

struct Workflow {
  decision::Objective objective;
  std::vector<world::ActionCommand> demonstration;
  Goal goal;

  bool operator==(const Workflow&) const = default;
};

bool goal_reached(const Goal& goal, const world::WorldState& state);

struct EngineConfig {
  Mode mode = Mode::C;
  int max_steps = 20;
  int max_depth = 40;
  grounding::GroundingParams grounding;
  double verify_threshold = 0.75;
  int max_retries = 3;  // attempts per step, including the first
  perception::PerceptionConfig perception;
  graph::SearchParams search;
  double recall_threshold = memory::kDefaultRecallThreshold;
  std::uint64_t seed = 0;
  double scripted_error_rate = 0.0;
  int passes = 2;
  std::string prompt_template = decision::kDefaultPromptTemplate;

  void validate() const;
  bool operator==(const EngineConfig&) const = default;
};

struct RunReport {
  std::string objective_id;
  Mode mode = Mode::C;
  bool success = false;
  int steps_taken = 0;
  int decision_calls = 0;
  int selector_calls = 0;
  int verify_calls = 0;
  std::optional<int> fallback_step;
  std::optional<std::string> recalled_entry;
  // done, fail, completed, replayed, step_cap, verification_exhausted,
  // model_unavailable
  std::string terminal;
  decision::HistoryLog history;
  double wall_time_ms = 0.0;
};

// Optional collaborators. A missing model is replaced by a scripted model
// following the workflow's instruction set; a missing selector or verifier
// by the deterministic defaults.
struct RunResources {
  const decision::DecisionModel* model = nullptr;
  const graph::SiteGraph* graph = nullptr;
  memory::MemoryStore* memory = nullptr;
  const graph::NodeSelector* selector = nullptr;
  const verification::Verifier* verifier = nullptr;
};

// Throws ConfigError when the mode's prerequisites are missing.
RunReport run(const EngineConfig& config, const world::SiteModel& site, const Workflow& workflow,
              const RunResources& resources = {});

// Up to `passes` runs (one for mode A), each restarting from the initial
// state with a derived seed, stopping at the first success.
std::vector<RunReport> run_passes(const EngineConfig& config, const world::SiteModel& site, const Workflow& workflow,
                                  const RunResources& resources, int passes);

decision::ScriptedDecisionModel scripted_model_for(const Workflow& workflow, double error_rate, std::uint64_t seed);

// Records the workflow's demonstration, confirms every step and finalizes.
exploration::ExplorationTrace demonstrate(const world::SiteModel& site, const Workflow& workflow,
                                          exploration::StateRegistry& registry);

// Demonstrates every workflow on the fault-free site and ingests the traces.
graph::SiteGraph learn_graph(const world::SiteModel& site, const std::vector<Workflow>& workflows,
                             const graph::SiteGraph& base = {});

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

nlohmann::json to_json(const EngineConfig& config);
EngineConfig engine_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Workflow& workflow);
Workflow workflow_from_json(const nlohmann::json& j);
// `stable` leaves out wall time so identical runs serialize identically.
nlohmann::json to_json(const RunReport& report, bool stable);
RunReport run_report_from_json(const nlohmann::json& j);

}  // namespace autonode::engine
