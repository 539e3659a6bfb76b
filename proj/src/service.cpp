#include "autonode/service.hpp"

#include <regex>

#include <spdlog/spdlog.h>

#include "autonode/errors.hpp"
#include "autonode/text.hpp"

namespace autonode::service {

Response error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"code", code}, {"message", message}}};
}

namespace {

Response not_found(const std::string& what) { return error_response(404, "not_found", what); }
Response bad_request(const std::string& what) { return error_response(400, "bad_request", what); }
Response unprocessable(const std::string& what) { return error_response(422, "unprocessable", what); }

std::optional<std::uint64_t> revision_of(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("revision")) return std::nullopt;
  const auto& r = body.at("revision");
  if (!r.is_number_unsigned() && !(r.is_number_integer() && r.get<std::int64_t>() >= 0))
    throw SchemaError("revision must be a non-negative integer");
  return r.get<std::uint64_t>();
}

}  // namespace

Service::Service(world::SiteModel site, std::vector<engine::Workflow> workflows, engine::EngineConfig config,
                 std::shared_ptr<memory::MemoryStore> memory, graph::SiteGraph initial_graph)
    : site_(std::move(site)),
      config_(std::move(config)),
      memory_(memory ? std::move(memory) : std::make_shared<memory::MemoryStore>()),
      graphs_(std::move(initial_graph)) {
  for (auto& w : workflows) {
    const std::string id = w.objective.id;
    if (!workflows_.emplace(id, std::move(w)).second) throw ConfigError("duplicate workflow id '" + id + "'");
  }
}

Service::~Service() { wait_idle(); }

void Service::add_session(exploration::ExplorationTrace trace) {
  std::lock_guard lock(sessions_mu_);
  const std::string id = trace.workflow_id;
  auto s = std::make_shared<Session>();
  s->trace = std::move(trace);
  if (!sessions_.emplace(id, std::move(s)).second) throw Error("session '" + id + "' already exists");
}

void Service::record_all() {
  exploration::StateRegistry registry;
  for (const auto& [id, w] : workflows_) {
    exploration::ScriptedDemonstration driver(w.demonstration);
    add_session(exploration::record_session(world::without_faults(site_), driver, id, w.objective.text, registry));
  }
}

void Service::wait_idle() {
  std::vector<std::thread> workers;
  {
    std::unique_lock lock(runs_mu_);
    runs_cv_.wait(lock, [&] { return active_runs_ == 0; });
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) {
  std::lock_guard lock(sessions_mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

nlohmann::json Service::session_json(const std::string& id, const Session& s, bool with_trace) {
  std::size_t confirmed = 0;
  for (const auto& step : s.trace.steps) confirmed += step.confirmed ? 1 : 0;
  nlohmann::json j{{"id", id},
                   {"objective", s.trace.objective_text},
                   {"state", exploration::to_string(s.trace.status)},
                   {"revision", s.revision},
                   {"steps", s.trace.steps.size()},
                   {"confirmed", confirmed}};
  if (with_trace) j["trace"] = exploration::to_json(s.trace);
  return j;
}

nlohmann::json Service::run_json(const RunRecord& r) {
  nlohmann::json j{{"id", r.id}, {"workflow_id", r.workflow_id}, {"mode", engine::to_string(r.mode)},
                   {"status", r.status}};
  if (r.report) {
    j["report"] = engine::to_json(*r.report, true);
    j["steps"] = decision::to_json(r.report->history);
  } else {
    j["steps"] = nlohmann::json::array();
  }
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body_text) {
  static const std::regex session_re(R"(^/api/sessions/([^/]+)$)");
  static const std::regex step_re(R"(^/api/sessions/([^/]+)/steps/([^/]+)/(confirm|modify)$)");
  static const std::regex finalize_re(R"(^/api/sessions/([^/]+)/finalize$)");
  static const std::regex run_re(R"(^/api/runs/([^/]+)$)");

  nlohmann::json body;
  if (method == "POST" && !text::trim(body_text).empty()) {
    try {
      body = nlohmann::json::parse(body_text);
    } catch (const nlohmann::json::parse_error& e) {
      return bad_request(std::string("malformed JSON body: ") + e.what());
    }
  }

  try {
    std::smatch m;
    if (method == "GET") {
      if (path == "/api/sessions") return list_sessions();
      if (std::regex_match(path, m, session_re)) return get_session(m[1]);
      if (path == "/api/graph") return {200, graph::to_json(*graphs_.snapshot())};
      if (std::regex_match(path, m, run_re)) return get_run(m[1]);
      if (path == "/api/memory") return list_memory();
    } else if (method == "POST") {
      if (std::regex_match(path, m, step_re)) return mutate_step(m[1], m[2], m[3], body);
      if (std::regex_match(path, m, finalize_re)) return finalize_session(m[1], body);
      if (path == "/api/graph/build") return build_graph(body);
      if (path == "/api/runs") return start_run(body);
    }
    return not_found(method + " " + path);
  } catch (const SchemaError& e) {
    return bad_request(e.what());
  } catch (const ParseError& e) {
    return bad_request(e.what());
  } catch (const nlohmann::json::exception& e) {
    return bad_request(e.what());
  } catch (const Error& e) {
    return unprocessable(e.what());
  }
}

Response Service::list_sessions() {
  std::vector<std::pair<std::string, std::shared_ptr<Session>>> all;
  {
    std::lock_guard lock(sessions_mu_);
    all.assign(sessions_.begin(), sessions_.end());
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [id, s] : all) {
    std::lock_guard lock(s->mu);
    out.push_back(session_json(id, *s, false));
  }
  return {200, out};
}

Response Service::get_session(const std::string& id) {
  const auto s = find_session(id);
  if (!s) return not_found("no session '" + id + "'");
  std::lock_guard lock(s->mu);
  return {200, session_json(id, *s, true)};
}

Response Service::mutate_step(const std::string& id, const std::string& step, const std::string& verb,
                              const nlohmann::json& body) {
  const auto s = find_session(id);
  if (!s) return not_found("no session '" + id + "'");
  const auto revision = revision_of(body);
  if (!revision) return bad_request("missing revision");

  exploration::TeachDecision decision{step, exploration::Confirm{}};
  if (verb == "modify") {
    if (!body.contains("cmd") || !body.at("cmd").is_string()) return bad_request("modify needs a string 'cmd'");
    decision.action = exploration::Modify{decision::parse(decision::RawDecision{body.at("cmd").get<std::string>()})};
  }

  std::lock_guard lock(s->mu);
  if (*revision != s->revision)
    return error_response(409, "stale_revision",
                          "revision " + std::to_string(*revision) + " is stale, current is " +
                              std::to_string(s->revision));
  try {
    s->trace = exploration::teach_apply(s->trace, {decision});
  } catch (const UnknownStep& e) {
    return not_found(e.what());
  }
  ++s->revision;
  return {200, session_json(id, *s, true)};
}

Response Service::finalize_session(const std::string& id, const nlohmann::json& body) {
  const auto s = find_session(id);
  if (!s) return not_found("no session '" + id + "'");
  const auto revision = revision_of(body);
  std::lock_guard lock(s->mu);
  if (revision && *revision != s->revision)
    return error_response(409, "stale_revision", "revision " + std::to_string(*revision) + " is stale");
  if (s->trace.status == exploration::TraceStatus::finalized) return {200, session_json(id, *s, true)};
  s->trace = exploration::finalize(s->trace);
  ++s->revision;
  return {200, session_json(id, *s, true)};
}

Response Service::build_graph(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("session_ids") || !body.at("session_ids").is_array())
    return bad_request("body must carry a 'session_ids' array");
  std::vector<exploration::ExplorationTrace> traces;
  for (const auto& v : body.at("session_ids")) {
    if (!v.is_string()) return bad_request("session ids must be strings");
    const auto s = find_session(v.get<std::string>());
    if (!s) return not_found("no session '" + v.get<std::string>() + "'");
    std::lock_guard lock(s->mu);
    traces.push_back(s->trace);
  }
  if (traces.empty()) return bad_request("no sessions given");
  const auto clean = world::without_faults(site_);
  const auto next = graphs_.update([&](const graph::SiteGraph& base) {
    return graph::ingest_traces(base, clean, traces, config_.perception, config_.grounding);
  });
  return {200, {{"version", next->version}, {"nodes", next->nodes.size()}, {"edges", next->edges.size()}}};
}

Response Service::start_run(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("workflow_id") || !body.at("workflow_id").is_string())
    return bad_request("body must carry a 'workflow_id'");
  const std::string wid = body.at("workflow_id").get<std::string>();
  const auto wf = workflows_.find(wid);
  if (wf == workflows_.end()) return not_found("no workflow '" + wid + "'");
  engine::EngineConfig cfg = config_;
  if (body.contains("mode")) {
    if (!body.at("mode").is_string()) return bad_request("mode must be a string");
    try {
      cfg.mode = engine::mode_from_string(body.at("mode").get<std::string>());
    } catch (const ConfigError& e) {
      return bad_request(e.what());
    }
  }
  const auto snapshot = graphs_.snapshot();
  if (cfg.mode == engine::Mode::C && snapshot->nodes.empty())
    return unprocessable("ProcessC needs a built graph; POST /api/graph/build first");

  std::string run_id;
  {
    std::lock_guard lock(runs_mu_);
    run_id = "run-" + std::to_string(++next_run_);
    runs_[run_id] = RunRecord{run_id, wid, cfg.mode, "running", std::nullopt, ""};
    ++active_runs_;
    workers_.emplace_back([this, run_id, cfg, snapshot, &workflow = wf->second] {
      RunRecord result;
      try {
        engine::RunResources res;
        res.graph = snapshot.get();
        res.memory = cfg.mode == engine::Mode::C ? memory_.get() : nullptr;
        result.report = engine::run(cfg, site_, workflow, res);
        result.status = "finished";
      } catch (const std::exception& e) {
        spdlog::error("run {} failed: {}", run_id, e.what());
        result.status = "error";
        result.error = e.what();
      }
      std::lock_guard lock(runs_mu_);
      auto& rec = runs_[run_id];
      rec.status = result.status;
      rec.report = std::move(result.report);
      rec.error = result.error;
      --active_runs_;
      runs_cv_.notify_all();
    });
  }
  return {202, {{"id", run_id}, {"status", "running"}}};
}

Response Service::get_run(const std::string& id) {
  std::lock_guard lock(runs_mu_);
  const auto it = runs_.find(id);
  if (it == runs_.end()) return not_found("no run '" + id + "'");
  return {200, run_json(it->second)};
}

Response Service::list_memory() {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : memory_->entries()) out.push_back(memory::to_json(e));
  return {200, out};
}

}  // namespace autonode::service
