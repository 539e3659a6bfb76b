#pragma once

// Success-rate harness over workflows, modes and seeds, reported per
// step-count level with first-pass and multi-pass rates.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autonode/engine.hpp"

namespace autonode::benchmark {

struct Options {
  std::vector<engine::Mode> modes{engine::Mode::A, engine::Mode::B, engine::Mode::C};
  std::vector<std::uint64_t> seeds{0};
  int passes = 2;
  int jobs = 1;
};

struct Tally {
  int runs = 0;
  int first_pass = 0;
  int multi_pass = 0;

  double first_pass_rate() const { return runs == 0 ? 0.0 : 100.0 * first_pass / runs; }
  double multi_pass_rate() const { return runs == 0 ? 0.0 : 100.0 * multi_pass / runs; }
  bool operator==(const Tally&) const = default;
};

struct ModeResult {
  Tally overall;
  std::map<decision::Level, Tally> levels;
  bool operator==(const ModeResult&) const = default;
};

struct Report {
  std::map<engine::Mode, ModeResult> modes;
  std::size_t workflows = 0;
  std::vector<std::uint64_t> seeds;
  int passes = 1;
  bool operator==(const Report&) const = default;
};

// Each (mode, workflow, seed) session runs independently; `graph` is shared
// read-only and required when mode C is requested.
Report run(const engine::EngineConfig& base, const world::SiteModel& site,
           const std::vector<engine::Workflow>& workflows, const graph::SiteGraph* graph, const Options& options);

// Multi-pass figures are only meaningful for verified modes; A reports none.
bool has_multi_pass(engine::Mode mode);

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);
std::string format_table(const Report& report);

// "0..9" or "1,4,7".
std::vector<std::uint64_t> parse_seeds(const std::string& spec);

}  // namespace autonode::benchmark
