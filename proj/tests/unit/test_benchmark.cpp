#include "autonode/benchmark.hpp"
#include "autonode/errors.hpp"
#include "autonode/synthetic.hpp"
#include "autonode/text.hpp"
#include "demo.hpp"
#include "doctest.h"

using namespace autonode;
using namespace autonode::benchmark;

namespace {

struct Fixture {
  synthetic::Suite suite;
  graph::SiteGraph graph;
};

Fixture small(double spurious, double noise) {
  Fixture f{synthetic::generate_suite({.workflows = 15, .seed = 1, .spurious_prob = spurious,
                                       .text_noise_rate = noise}),
            {}};
  f.graph = engine::learn_graph(world::without_faults(f.suite.site), f.suite.workflows);
  return f;
}

}  // namespace

TEST_CASE("every mode succeeds on a fault-free suite") {
  const auto f = small(0.0, 0.0);
  const auto r = run({}, f.suite.site, f.suite.workflows, &f.graph, {.seeds = {0, 1}});
  CHECK(r.workflows == 15);
  CHECK(r.passes == 2);
  REQUIRE(r.modes.size() == 3);
  for (const auto& [mode, m] : r.modes) {
    CHECK(m.overall.runs == 30);
    CHECK(m.overall.first_pass_rate() == 100.0);
    int level_runs = 0;
    for (const auto& [level, t] : m.levels) level_runs += t.runs;
    CHECK(level_runs == 30);
  }
}

TEST_CASE("multi-pass never falls below first pass") {
  const auto f = small(0.3, 0.1);
  engine::EngineConfig base;
  base.scripted_error_rate = 0.15;
  const auto r = run(base, f.suite.site, f.suite.workflows, &f.graph, {.seeds = {0, 1, 2}});
  for (const auto& [mode, m] : r.modes) {
    CHECK(m.overall.multi_pass >= m.overall.first_pass);
    for (const auto& [level, t] : m.levels) CHECK(t.multi_pass >= t.first_pass);
    if (!has_multi_pass(mode)) CHECK(m.overall.multi_pass == m.overall.first_pass);
  }
}

TEST_CASE("parallel runs give the same report as a serial run") {
  const auto f = small(0.3, 0.1);
  engine::EngineConfig base;
  base.scripted_error_rate = 0.15;
  const auto serial = run(base, f.suite.site, f.suite.workflows, &f.graph, {.seeds = {4, 5}, .jobs = 1});
  const auto parallel = run(base, f.suite.site, f.suite.workflows, &f.graph, {.seeds = {4, 5}, .jobs = 4});
  CHECK(serial == parallel);
  CHECK(format_table(serial) == format_table(parallel));
}

TEST_CASE("graph mode needs a graph") {
  const auto f = small(0.0, 0.0);
  CHECK_THROWS_AS(run({}, f.suite.site, f.suite.workflows, nullptr, {}), ConfigError);
  CHECK_NOTHROW(run({}, f.suite.site, f.suite.workflows, nullptr, {.modes = {engine::Mode::B}}));
}

TEST_CASE("report JSON round-trips") {
  const auto f = small(0.3, 0.1);
  const auto r = run({}, f.suite.site, f.suite.workflows, &f.graph, {.seeds = {0}});
  const std::string once = json_io::dump(to_json(r));
  const auto back = report_from_json(nlohmann::json::parse(once));
  CHECK(json_io::dump(to_json(back)) == once);
  CHECK(to_json(r)["modes"]["ProcessA"]["multi_pass_rate"].is_null());
  CHECK(to_json(r)["modes"]["ProcessB"]["multi_pass_rate"].is_number());
  CHECK_THROWS_AS(report_from_json(nlohmann::json::object()), SchemaError);
}

TEST_CASE("table layout") {
  Report r;
  r.passes = 2;
  r.modes[engine::Mode::A].overall = {4, 1, 1};
  r.modes[engine::Mode::A].levels[decision::Level::L1] = {4, 1, 1};
  r.modes[engine::Mode::C].overall = {4, 3, 4};
  const auto t = format_table(r);
  const auto lines = text::split(t, '\n');
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0].rfind("Mode", 0) == 0);
  CHECK(lines[1].find("25.0") != std::string::npos);
  CHECK(lines[1].find(" - ") != std::string::npos);
  CHECK(lines[2].find("75.0") != std::string::npos);
  CHECK(lines[2].find("100.0") != std::string::npos);
  CHECK(lines[0].size() == lines[1].size());
}

TEST_CASE("seed specifications") {
  CHECK(parse_seeds("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seeds("7") == std::vector<std::uint64_t>{7});
  CHECK(parse_seeds("1, 4,7") == std::vector<std::uint64_t>{1, 4, 7});
  CHECK_THROWS_AS(parse_seeds("3..1"), ConfigError);
  CHECK_THROWS_AS(parse_seeds("a"), ConfigError);
  CHECK_THROWS_AS(parse_seeds(""), ConfigError);
  CHECK_THROWS_AS(parse_seeds("1,,2"), ConfigError);
  CHECK_THROWS_AS(parse_seeds("-1"), ConfigError);
}

TEST_CASE("tally rates") {
  CHECK(Tally{}.first_pass_rate() == 0.0);
  CHECK(Tally{8, 2, 6}.first_pass_rate() == 25.0);
  CHECK(Tally{8, 2, 6}.multi_pass_rate() == 75.0);
}
