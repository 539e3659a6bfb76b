#pragma once

// Teach-mode sessions, graph inspection and run control over a JSON API.
// Request handling is transport independent (handle()); serve() binds it to
// a local HTTP server.

#include <atomic>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "autonode/engine.hpp"
#include "autonode/exploration.hpp"
#include "autonode/graph.hpp"
#include "autonode/memory.hpp"

namespace httplib {
class Server;
}

namespace autonode::service {

struct Response {
  int status = 200;
  nlohmann::json body;
};

class Service {
 public:
  Service(world::SiteModel site, std::vector<engine::Workflow> workflows, engine::EngineConfig config,
          std::shared_ptr<memory::MemoryStore> memory, graph::SiteGraph initial_graph = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Opens a teach session for a recorded trace; the session id is the
  // workflow id. Throws Error on duplicates.
  void add_session(exploration::ExplorationTrace trace);

  // Records every workflow's demonstration as a pending session.
  void record_all();

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  // Blocks until every background run has finished.
  void wait_idle();

  std::shared_ptr<const graph::SiteGraph> graph() const { return graphs_.snapshot(); }

  // Registers the API routes on `server`.
  void bind(httplib::Server& server);

 private:
  struct Session {
    exploration::ExplorationTrace trace;
    std::uint64_t revision = 0;
    std::mutex mu;
  };

  struct RunRecord {
    std::string id;
    std::string workflow_id;
    engine::Mode mode = engine::Mode::C;
    std::string status = "running";  // running, finished, error
    std::optional<engine::RunReport> report;
    std::string error;
  };

  Response list_sessions();
  Response get_session(const std::string& id);
  Response mutate_step(const std::string& id, const std::string& step, const std::string& verb,
                       const nlohmann::json& body);
  Response finalize_session(const std::string& id, const nlohmann::json& body);
  Response build_graph(const nlohmann::json& body);
  Response start_run(const nlohmann::json& body);
  Response get_run(const std::string& id);
  Response list_memory();

  std::shared_ptr<Session> find_session(const std::string& id);
  static nlohmann::json session_json(const std::string& id, const Session& s, bool with_trace);
  static nlohmann::json run_json(const RunRecord& r);

  world::SiteModel site_;
  std::map<std::string, engine::Workflow> workflows_;
  engine::EngineConfig config_;
  std::shared_ptr<memory::MemoryStore> memory_;
  graph::GraphStore graphs_;

  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;

  std::mutex runs_mu_;
  std::condition_variable runs_cv_;
  std::map<std::string, RunRecord> runs_;
  std::vector<std::thread> workers_;
  int active_runs_ = 0;
  std::uint64_t next_run_ = 0;
};

Response error_response(int status, const std::string& code, const std::string& message);

}  // namespace autonode::service
