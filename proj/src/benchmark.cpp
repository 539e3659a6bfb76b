#include "autonode/benchmark.hpp"

#include <atomic>
#include <cstdio>
#include <thread>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/text.hpp"

namespace autonode::benchmark {

bool has_multi_pass(engine::Mode mode) { return mode != engine::Mode::A; }

Report run(const engine::EngineConfig& base, const world::SiteModel& site,
           const std::vector<engine::Workflow>& workflows, const graph::SiteGraph* graph, const Options& options) {
  if (options.passes < 1) throw ConfigError("passes must be >= 1");
  if (options.jobs < 1) throw ConfigError("jobs must be >= 1");
  for (auto m : options.modes)
    if (m == engine::Mode::C && !graph) throw ConfigError("ProcessC benchmarking requires a site graph");

  struct Job {
    engine::Mode mode;
    std::size_t workflow;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (auto m : options.modes)
    for (std::size_t w = 0; w < workflows.size(); ++w)
      for (auto s : options.seeds) jobs.push_back({m, w, s});

  // 0 = failed, 1 = succeeded on a later pass, 2 = succeeded on the first
  std::vector<int> outcome(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      engine::EngineConfig cfg = base;
      cfg.mode = job.mode;
      cfg.seed = job.seed;
      engine::RunResources res;
      res.graph = graph;
      const auto reports = engine::run_passes(cfg, site, workflows[job.workflow], res, options.passes);
      if (reports.back().success) outcome[i] = reports.size() == 1 ? 2 : 1;
    }
  };
  const int threads = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Report report;
  report.workflows = workflows.size();
  report.seeds = options.seeds;
  report.passes = options.passes;
  for (auto m : options.modes) report.modes[m];
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& mode = report.modes[jobs[i].mode];
    for (Tally* t : {&mode.overall, &mode.levels[workflows[jobs[i].workflow].objective.level]}) {
      ++t->runs;
      if (outcome[i] == 2) ++t->first_pass;
      if (outcome[i] >= 1) ++t->multi_pass;
    }
  }
  return report;
}

namespace {

nlohmann::json tally_json(const Tally& t, bool multi) {
  nlohmann::json j{{"runs", t.runs},
                   {"first_pass_successes", t.first_pass},
                   {"first_pass_rate", t.first_pass_rate()}};
  if (multi) {
    j["multi_pass_successes"] = t.multi_pass;
    j["multi_pass_rate"] = t.multi_pass_rate();
  } else {
    j["multi_pass_successes"] = nullptr;
    j["multi_pass_rate"] = nullptr;
  }
  return j;
}

Tally tally_from_json(const nlohmann::json& j) {
  Tally t;
  t.runs = json_io::require_int(j, "runs");
  t.first_pass = json_io::require_int(j, "first_pass_successes");
  const auto& m = json_io::require(j, "multi_pass_successes");
  t.multi_pass = m.is_null() ? t.first_pass : m.get<int>();
  return t;
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const Report& r) {
  nlohmann::json modes = nlohmann::json::object();
  for (const auto& [mode, result] : r.modes) {
    const bool multi = has_multi_pass(mode) && r.passes > 1;
    nlohmann::json levels = nlohmann::json::object();
    for (const auto& [level, t] : result.levels) levels[decision::to_string(level)] = tally_json(t, multi);
    auto j = tally_json(result.overall, multi);
    j["levels"] = std::move(levels);
    modes[engine::to_string(mode)] = std::move(j);
  }
  return {{"workflows", r.workflows}, {"seeds", r.seeds}, {"passes", r.passes}, {"modes", std::move(modes)}};
}

Report report_from_json(const nlohmann::json& j) {
  Report r;
  try {
    r.workflows = json_io::require(j, "workflows").get<std::size_t>();
    r.seeds = json_io::require(j, "seeds").get<std::vector<std::uint64_t>>();
    r.passes = json_io::require_int(j, "passes");
    for (const auto& [name, m] : json_io::require(j, "modes").items()) {
      ModeResult result;
      result.overall = tally_from_json(m);
      for (const auto& [level, t] : json_io::require(m, "levels").items())
        result.levels[decision::level_from_string(level)] = tally_from_json(t);
      r.modes[engine::mode_from_string(name)] = std::move(result);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  }
  return r;
}

std::string format_table(const Report& r) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Mode", "Success Rate", "Multi-pass", "L1", "L2", "L3", "Runs"});
  for (const auto& [mode, result] : r.modes) {
    const bool multi = has_multi_pass(mode) && r.passes > 1;
    std::vector<std::string> row{engine::to_string(mode), cell(result.overall.first_pass_rate()),
                                 multi ? cell(result.overall.multi_pass_rate()) : "-"};
    for (auto level : {decision::Level::L1, decision::Level::L2, decision::Level::L3}) {
      const auto it = result.levels.find(level);
      row.push_back(it == result.levels.end() ? "-" : cell(it->second.first_pass_rate()));
    }
    row.push_back(std::to_string(result.overall.runs));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 ? row[c] + pad : "  " + pad + row[c];
    }
    out += "\n";
  }
  out += "levels: L1 < 5 steps, L2 5-10 steps, L3 > 10 steps; level columns are first-pass rates\n";
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) -> std::uint64_t {
    const std::string t = text::trim(s);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("bad seed '" + s + "' in '" + spec + "'");
    return std::stoull(t);
  };
  if (const auto dots = spec.find(".."); dots != std::string::npos) {
    const auto lo = number(spec.substr(0, dots));
    const auto hi = number(spec.substr(dots + 2));
    if (hi < lo) throw ConfigError("empty seed range '" + spec + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& part : text::split(spec, ',')) out.push_back(number(part));
  if (out.empty()) throw ConfigError("no seeds in '" + spec + "'");
  return out;
}

}  // namespace autonode::benchmark
