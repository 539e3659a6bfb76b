#include "autonode/cli.hpp"

#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>
#include <httplib.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "autonode/benchmark.hpp"
#include "autonode/engine.hpp"
#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/service.hpp"
#include "autonode/synthetic.hpp"
#include "autonode/text.hpp"

namespace autonode::cli {

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

void setup_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("autonode");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
  });
  if (const char* env = std::getenv("AUTONODE_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

struct Args {
  std::string config;
  std::string site;
  std::vector<std::string> workflows;
  std::vector<std::string> traces;
  std::string graph;
  std::string memory;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool stable = false;
  std::string out;

  std::string decisions;
  bool confirm_all = false;
  std::string mode;
  std::string modes = "A,B,C";
  std::string seeds = "0";
  std::optional<int> passes;
  std::size_t synthetic = 0;
  double spurious_prob = 0.0;
  double text_noise = 0.0;
  std::optional<double> error_rate;
  std::string query;
  std::string host = "127.0.0.1";
  int port = 8080;
};

engine::EngineConfig load_config(const Args& a) {
  engine::EngineConfig c = a.config.empty() ? engine::EngineConfig{} : engine::engine_config_from_json(json_io::read_file(a.config));
  if (a.seed) c.seed = *a.seed;
  if (!a.mode.empty()) c.mode = engine::mode_from_string(a.mode);
  if (a.error_rate) c.scripted_error_rate = *a.error_rate;
  if (a.passes) c.passes = *a.passes;
  c.validate();
  return c;
}

world::SiteModel load_site(const Args& a) {
  if (a.site.empty()) throw ConfigError("--site is required");
  return world::load_site_model_file(a.site);
}

std::vector<engine::Workflow> load_workflows(const Args& a) {
  std::vector<engine::Workflow> out;
  for (const auto& path : a.workflows) {
    const auto doc = json_io::read_file(path);
    if (doc.is_array()) {
      for (const auto& w : doc) out.push_back(engine::workflow_from_json(w));
    } else {
      out.push_back(engine::workflow_from_json(doc));
    }
  }
  if (out.empty()) throw ConfigError("--workflow is required");
  return out;
}

void emit(const Args& a, const nlohmann::json& doc, std::ostream& out) {
  if (a.out.empty()) {
    out << json_io::dump(doc);
  } else {
    json_io::write_file(a.out, doc);
  }
}

int cmd_record(const Args& a, std::ostream& out) {
  const auto site = load_site(a);
  const auto wfs = load_workflows(a);
  if (wfs.size() != 1) throw ConfigError("record takes exactly one workflow");
  exploration::StateRegistry registry;
  exploration::ScriptedDemonstration driver(wfs[0].demonstration);
  const auto trace =
      exploration::record_session(site, driver, wfs[0].objective.id, wfs[0].objective.text, registry);
  if (!a.out.empty())
    out << "recorded " << trace.events.size() << " events for " << trace.workflow_id << " ("
        << registry.size() << " states), awaiting review\n";
  emit(a, exploration::to_json(trace), out);
  return kOk;
}

int cmd_teach(const Args& a, std::ostream& out) {
  if (a.traces.size() != 1) throw ConfigError("teach takes exactly one --trace");
  if (a.confirm_all == !a.decisions.empty()) throw ConfigError("give either --decisions or --confirm-all");
  auto trace = exploration::trace_from_json(json_io::read_file(a.traces[0]));
  std::vector<exploration::TeachDecision> decisions;
  if (a.confirm_all) {
    for (const auto& s : trace.steps) decisions.push_back({s.step_id, exploration::Confirm{}});
  } else {
    decisions = exploration::teach_decisions_from_json(json_io::read_file(a.decisions));
  }
  trace = exploration::teach_apply(trace, decisions);
  if (!a.out.empty())
    out << trace.workflow_id << ": " << decisions.size() << " decisions applied, trace "
        << exploration::to_string(trace.status) << "\n";
  emit(a, exploration::to_json(trace), out);
  return kOk;
}

int cmd_build_graph(const Args& a, std::ostream& out) {
  const auto site = world::without_faults(load_site(a));
  const auto cfg = load_config(a);
  if (a.traces.empty()) throw ConfigError("build-graph needs at least one --trace");
  std::vector<exploration::ExplorationTrace> traces;
  for (const auto& p : a.traces) traces.push_back(exploration::trace_from_json(json_io::read_file(p)));
  const graph::SiteGraph base = a.graph.empty() ? graph::SiteGraph{} : graph::graph_from_json(json_io::read_file(a.graph));
  const auto g = graph::ingest_traces(base, site, traces, cfg.perception, cfg.grounding);
  if (!a.out.empty())
    out << "graph v" << g.version << ": " << g.nodes.size() << " nodes, " << g.edges.size() << " edges, "
        << g.roots.size() << " roots\n";
  emit(a, graph::to_json(g), out);
  return kOk;
}

int cmd_run(const Args& a, std::ostream& out) {
  const auto cfg = load_config(a);
  const auto site = load_site(a);
  const auto wfs = load_workflows(a);
  if (wfs.size() != 1) throw ConfigError("run takes exactly one workflow");
  std::optional<graph::SiteGraph> g;
  if (!a.graph.empty()) g = graph::graph_from_json(json_io::read_file(a.graph));
  std::optional<memory::MemoryStore> mem;
  if (!a.memory.empty()) mem.emplace(a.memory);

  engine::RunResources res;
  res.graph = g ? &*g : nullptr;
  res.memory = mem ? &*mem : nullptr;
  const auto report = engine::run(cfg, site, wfs[0], res);
  if (!a.out.empty()) {
    out << report.objective_id << " " << engine::to_string(report.mode) << ": "
        << (report.success ? "success" : "failure") << " after " << report.steps_taken << " steps (" << report.terminal
        << "), decision calls " << report.decision_calls << ", selector calls " << report.selector_calls
        << ", verify calls " << report.verify_calls;
    if (report.fallback_step) out << ", memory fallback at step " << *report.fallback_step;
    out << "\n";
  }
  emit(a, engine::to_json(report, a.stable), out);
  return report.success ? kOk : kFailed;
}

int cmd_replay(const Args& a, std::ostream& out) {
  const auto site = load_site(a);
  if (a.traces.size() != 1) throw ConfigError("replay takes exactly one --trace");
  const auto trace = exploration::trace_from_json(json_io::read_file(a.traces[0]));
  const auto steps = exploration::replay_trace(site, trace);
  nlohmann::json doc = nlohmann::json::array();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    doc.push_back({{"step", trace.steps[i].step_id},
                   {"command", world::to_json(steps[i].command)},
                   {"pre", exploration::fingerprint(steps[i].pre)},
                   {"post", exploration::fingerprint(steps[i].post)}});
  }
  if (!a.out.empty()) {
    const auto& last = steps.empty() ? world::initial_state(site) : steps.back().post;
    out << trace.workflow_id << ": replayed " << steps.size() << " steps, ends on page " << last.page_id << "\n";
  }
  emit(a, doc, out);
  return kOk;
}

int cmd_benchmark(const Args& a, std::ostream& out) {
  const auto cfg = load_config(a);
  world::SiteModel site;
  std::vector<engine::Workflow> workflows;
  if (a.synthetic > 0) {
    auto suite = synthetic::generate_suite({a.synthetic, a.seed.value_or(0), a.spurious_prob, a.text_noise});
    site = std::move(suite.site);
    workflows = std::move(suite.workflows);
  } else {
    site = load_site(a);
    workflows = load_workflows(a);
  }

  benchmark::Options opt;
  opt.modes.clear();
  for (const auto& m : text::split(a.modes, ',')) opt.modes.push_back(engine::mode_from_string(text::trim(m)));
  opt.seeds = benchmark::parse_seeds(a.seeds);
  opt.passes = cfg.passes;
  opt.jobs = a.jobs;

  std::optional<graph::SiteGraph> g;
  if (!a.graph.empty()) {
    g = graph::graph_from_json(json_io::read_file(a.graph));
  } else if (std::find(opt.modes.begin(), opt.modes.end(), engine::Mode::C) != opt.modes.end()) {
    g = engine::learn_graph(site, workflows);
  }
  const auto report = benchmark::run(cfg, site, workflows, g ? &*g : nullptr, opt);
  if (a.out.empty()) {
    out << json_io::dump(benchmark::to_json(report));
  } else {
    json_io::write_file(a.out, benchmark::to_json(report));
  }
  out << benchmark::format_table(report);
  return kOk;
}

int cmd_graph_dump(const Args& a, std::ostream& out) {
  if (a.graph.empty()) throw ConfigError("--graph is required");
  const auto cfg = load_config(a);
  const auto g = graph::graph_from_json(json_io::read_file(a.graph));
  if (a.query.empty()) {
    out << "graph v" << g.version << ": " << g.nodes.size() << " nodes, " << g.edges.size() << " edges\n";
    for (const auto& [id, n] : g.nodes) {
      out << "  " << id << "  [" << world::to_string(n.action_type) << " \"" << n.element_text << "\"] visits "
          << n.visit_count << "\n";
      for (const auto& e : g.edges)
        if (e.parent == id) out << "    -> " << e.child << " (" << e.relationship << ", " << e.norm_score << ")\n";
    }
    if (!a.out.empty()) json_io::write_file(a.out, graph::to_json(g));
    return kOk;
  }
  const auto sub = graph::retrieve_subgraph(g, a.query, cfg.search);
  const auto grounded = graph::ground_response(sub, a.query);
  out << graph::generate_response(grounded.context, grounded.grounded) << "\n";
  if (!a.out.empty()) json_io::write_file(a.out, graph::to_json(sub));
  return kOk;
}

int cmd_serve(const Args& a, std::ostream& out) {
  const auto cfg = load_config(a);
  auto site = load_site(a);
  auto workflows = load_workflows(a);
  graph::SiteGraph g = a.graph.empty() ? graph::SiteGraph{} : graph::graph_from_json(json_io::read_file(a.graph));
  auto mem = a.memory.empty() ? std::make_shared<memory::MemoryStore>() : std::make_shared<memory::MemoryStore>(a.memory);
  service::Service svc(std::move(site), std::move(workflows), cfg, mem, std::move(g));
  svc.record_all();
  httplib::Server server;
  svc.bind(server);
  out << "serving on http://" << a.host << ":" << a.port << "/api\n" << std::flush;
  if (!server.listen(a.host, a.port)) throw ConfigError("cannot listen on " + a.host + ":" + std::to_string(a.port));
  return kOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();
  Args a;
  CLI::App app{"Knowledge-graph driven GUI automation over a simulated site", "autonode"};
  app.require_subcommand(1, 1);

  auto common = [&](CLI::App* c) {
    c->add_option("--config", a.config, "engine config JSON");
    c->add_option("--seed", a.seed, "seed override");
    c->add_option("--out", a.out, "output JSON path (stdout when omitted)");
  };
  auto* record = app.add_subcommand("record", "record a workflow demonstration as a trace");
  common(record);
  record->add_option("--site", a.site)->required();
  record->add_option("--workflow", a.workflows)->required();

  auto* teach = app.add_subcommand("teach", "apply teach-mode decisions to a recorded trace");
  common(teach);
  teach->add_option("--trace", a.traces)->required();
  teach->add_option("--decisions", a.decisions, "JSON list of {step, action, cmd}");
  teach->add_flag("--confirm-all", a.confirm_all);

  auto* build = app.add_subcommand("build-graph", "ingest finalized traces into the site graph");
  common(build);
  build->add_option("--site", a.site)->required();
  build->add_option("--trace", a.traces)->required();
  build->add_option("--graph", a.graph, "base graph to extend");

  auto* run = app.add_subcommand("run", "run one workflow");
  common(run);
  run->add_option("--site", a.site)->required();
  run->add_option("--workflow", a.workflows)->required();
  run->add_option("--graph", a.graph);
  run->add_option("--memory", a.memory, "memory journal (NDJSON)");
  run->add_option("--mode", a.mode, "ProcessA | ProcessB | ProcessC");
  run->add_option("--error-rate", a.error_rate, "scripted model error rate");
  run->add_flag("--stable", a.stable, "omit wall time from the report");

  auto* replay = app.add_subcommand("replay", "re-execute a trace symbolically");
  common(replay);
  replay->add_option("--site", a.site)->required();
  replay->add_option("--trace", a.traces)->required();

  auto* bench = app.add_subcommand("benchmark", "success rates per mode and level");
  common(bench);
  bench->add_option("--site", a.site);
  bench->add_option("--workflow", a.workflows);
  bench->add_option("--graph", a.graph);
  bench->add_option("--modes", a.modes);
  bench->add_option("--seeds", a.seeds, "e.g. 0..9 or 1,2,3");
  bench->add_option("--passes", a.passes);
  bench->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
  bench->add_option("--synthetic", a.synthetic, "generate N workflows instead of loading them");
  bench->add_option("--spurious-prob", a.spurious_prob)->check(CLI::Range(0.0, 1.0));
  bench->add_option("--text-noise", a.text_noise)->check(CLI::Range(0.0, 1.0));
  bench->add_option("--error-rate", a.error_rate)->check(CLI::Range(0.0, 1.0));
  bench->add_flag("--stable", a.stable);

  auto* dump = app.add_subcommand("graph-dump", "print a graph or answer a query against it");
  common(dump);
  dump->add_option("--graph", a.graph)->required();
  dump->add_option("--query", a.query);

  auto* serve = app.add_subcommand("serve", "start the HTTP API");
  common(serve);
  serve->add_option("--site", a.site)->required();
  serve->add_option("--workflow", a.workflows)->required();
  serve->add_option("--graph", a.graph);
  serve->add_option("--memory", a.memory);
  serve->add_option("--host", a.host);
  serve->add_option("--port", a.port)->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*record) return cmd_record(a, out);
    if (*teach) return cmd_teach(a, out);
    if (*build) return cmd_build_graph(a, out);
    if (*run) return cmd_run(a, out);
    if (*replay) return cmd_replay(a, out);
    if (*bench) return cmd_benchmark(a, out);
    if (*dump) return cmd_graph_dump(a, out);
    if (*serve) return cmd_serve(a, out);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const SchemaError& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace autonode::cli
