#include <sstream>

#include "autonode/cli.hpp"
#include "demo.hpp"
#include "doctest.h"

using namespace autonode;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "autonode");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path workdir() {
  const auto dir = std::filesystem::temp_directory_path() / "autonode_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string f(const std::string& rel) { return oracle::fixture(rel).string(); }

}  // namespace

TEST_CASE("record, teach, build and run form a pipeline") {
  const auto dir = workdir();
  const std::string trace = (dir / "trace.json").string();
  const std::string taught = (dir / "taught.json").string();
  const std::string graph = (dir / "graph.json").string();
  const std::string journal = (dir / "memory.ndjson").string();
  const std::string site = f("demo_crm/site.json");
  const std::string wf = f("demo_crm/workflow.json");

  auto r = invoke({"record", "--site", site, "--workflow", wf, "--out", trace});
  REQUIRE(r.code == 0);
  CHECK(r.out == "recorded 6 events for compose_email (3 states), awaiting review\n");

  // building from an unreviewed trace is a domain failure
  r = invoke({"build-graph", "--site", site, "--trace", trace, "--out", graph});
  CHECK(r.code == 1);

  r = invoke({"teach", "--trace", trace, "--confirm-all", "--out", taught});
  REQUIRE(r.code == 0);
  CHECK(r.out == "compose_email: 6 decisions applied, trace finalized\n");

  r = invoke({"build-graph", "--site", site, "--trace", taught, "--out", graph});
  REQUIRE(r.code == 0);
  CHECK(r.out == "graph v1: 6 nodes, 5 edges, 1 roots\n");
  CHECK(json_io::dump(json_io::read_file(graph)) ==
        json_io::dump(graph::to_json(demo::graph(demo::site(), demo::workflow()))));

  r = invoke({"run", "--site", site, "--workflow", wf, "--graph", graph, "--memory", journal, "--stable"});
  CHECK(r.code == 0);
  const auto report = engine::run_report_from_json(nlohmann::json::parse(r.out));
  CHECK(report.success);
  CHECK(report.mode == engine::Mode::C);
  CHECK(report.steps_taken == 6);

  r = invoke({"run", "--site", site, "--workflow", wf, "--graph", graph, "--memory", journal, "--out",
           (dir / "again.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("(replayed)") != std::string::npos);
  CHECK(r.out.find("selector calls 0") != std::string::npos);

  r = invoke({"run", "--site", f("demo_crm/renamed_site.json"), "--workflow", f("demo_crm/renamed_workflow.json"),
           "--graph", graph, "--memory", journal, "--out", (dir / "renamed.json").string()});
  CHECK(r.out.find("memory fallback at step 5") != std::string::npos);

  r = invoke({"replay", "--site", site, "--trace", taught, "--out", (dir / "replay.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "compose_email: replayed 6 steps, ends on page sent\n");
  r = invoke({"replay", "--site", f("delayed/site.json"), "--trace", taught});
  CHECK(r.code == 1);

  r = invoke({"graph-dump", "--graph", graph, "--query", "send"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("Send — click Send on compose\n", 0) == 0);
  r = invoke({"graph-dump", "--graph", graph, "--query", "zzzz"});
  CHECK(r.out == "\n");
  r = invoke({"graph-dump", "--graph", graph});
  CHECK(r.out.rfind("graph v1: 6 nodes, 5 edges\n", 0) == 0);
}

TEST_CASE("teach applies a decisions file") {
  const auto dir = workdir();
  const std::string trace = (dir / "trace.json").string();
  const std::string decisions = (dir / "decisions.json").string();
  REQUIRE(invoke({"record", "--site", f("demo_crm/site.json"), "--workflow", f("demo_crm/workflow.json"), "--out",
               trace})
              .code == 0);
  json_io::write_file(decisions, nlohmann::json::parse(
                                     R"([{"step":"compose_email#s5","action":"modify","cmd":"CLICK :: Discard"}])"));
  auto r = invoke({"teach", "--trace", trace, "--decisions", decisions});
  CHECK(r.code == 0);
  const auto t = exploration::trace_from_json(nlohmann::json::parse(r.out));
  CHECK(t.steps[5].step_id == "compose_email#s5.m1");
  CHECK(t.status == exploration::TraceStatus::pending_review);

  json_io::write_file(decisions, nlohmann::json::parse(R"([{"step":"ghost","action":"confirm"}])"));
  CHECK(invoke({"teach", "--trace", trace, "--decisions", decisions}).code == 1);
  CHECK(invoke({"teach", "--trace", trace}).code == 2);
  CHECK(invoke({"teach", "--trace", trace, "--decisions", decisions, "--confirm-all"}).code == 2);
}

TEST_CASE("stable outputs are byte-identical across invocations") {
  const std::vector<std::string> run{"run",     "--site", f("demo_crm/site.json"), "--workflow",
                                     f("demo_crm/workflow.json"), "--mode", "ProcessB", "--stable", "--seed", "5"};
  const auto a = invoke(run);
  CHECK(a.code == 0);
  CHECK(a.out == invoke(run).out);

  const std::vector<std::string> bench{"benchmark", "--synthetic", "8", "--seeds", "0..1", "--spurious-prob", "0.3",
                                       "--text-noise", "0.1", "--error-rate", "0.15", "--jobs", "3"};
  const auto b = invoke(bench);
  CHECK(b.code == 0);
  CHECK(b.out == invoke(bench).out);
  CHECK(b.out.find("Mode") != std::string::npos);
  CHECK(b.out.find("ProcessC") != std::string::npos);
}

TEST_CASE("a failed run exits with 1") {
  const auto r = invoke({"run", "--site", f("delayed/site.json"), "--workflow", f("delayed/workflow.json"), "--mode",
                      "ProcessA", "--stable"});
  CHECK(r.code == 1);
  CHECK_FALSE(engine::run_report_from_json(nlohmann::json::parse(r.out)).success);
}

TEST_CASE("usage and configuration errors exit with 2") {
  const auto dir = workdir();
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"fly"}).code == 2);
  CHECK(invoke({"run", "--bogus"}).code == 2);
  CHECK(invoke({"run", "--workflow", f("demo_crm/workflow.json")}).code == 2);
  CHECK(invoke({"run", "--site", f("demo_crm/site.json"), "--workflow", f("demo_crm/workflow.json")}).code == 2);
  CHECK(invoke({"run", "--site", f("demo_crm/site.json"), "--workflow", f("demo_crm/workflow.json"), "--mode", "X"})
            .code == 2);
  CHECK(invoke({"run", "--site", (dir / "missing.json").string(), "--workflow", f("demo_crm/workflow.json")}).code ==
        2);
  json_io::write_file(dir / "bad_config.json", nlohmann::json{{"max_steps", 0}});
  CHECK(invoke({"run", "--site", f("demo_crm/site.json"), "--workflow", f("demo_crm/workflow.json"), "--config",
             (dir / "bad_config.json").string()})
            .code == 2);
  CHECK(invoke({"benchmark", "--synthetic", "3", "--seeds", "9..1"}).code == 2);
  CHECK(invoke({"benchmark", "--synthetic", "3", "--jobs", "0"}).code == 2);
  CHECK(invoke({"serve", "--site", f("demo_crm/site.json"), "--workflow", f("demo_crm/workflow.json"), "--port",
             "70000"})
            .code == 2);
  const auto help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("benchmark") != std::string::npos);
}
