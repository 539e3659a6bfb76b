#include "autonode/engine.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include <spdlog/spdlog.h>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/rng.hpp"
#include "autonode/text.hpp"

namespace autonode::engine {

using verification::Proposal;

bool goal_reached(const Goal& goal, const world::WorldState& state) {
  if (state.page_id != goal.page) return false;
  for (const auto& [id, want] : goal.buffers) {
    const auto it = state.typed_buffers.find(id);
    if (it == state.typed_buffers.end() || it->second != want) return false;
  }
  return true;
}

void EngineConfig::validate() const {
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (max_steps > max_depth) throw ConfigError("max_steps must not exceed max_depth");
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
  if (passes < 1) throw ConfigError("passes must be >= 1");
  if (!(verify_threshold >= 0.0 && verify_threshold <= 1.0)) throw ConfigError("verify_threshold must lie in [0,1]");
  if (!(recall_threshold >= 0.0 && recall_threshold <= 1.0)) throw ConfigError("recall_threshold must lie in [0,1]");
  if (!(scripted_error_rate >= 0.0 && scripted_error_rate <= 1.0))
    throw ConfigError("scripted_error_rate must lie in [0,1]");
  grounding.validate();
  search.validate();
}

namespace {

// What the engine wants to act on, independent of how it was chosen.
struct Target {
  world::ActionKind action = world::ActionKind::click;
  std::string text;
  world::Point ref_center;
  world::ScreenBounds ref_screen;
  std::optional<std::string> payload;
  std::optional<int> scroll_amount;
};

struct View {
  world::Frame frame;
  std::vector<perception::DetectedElement> perceived;
};

world::Click click_at(const world::BBox& b) { return {b.x + b.w / 2, b.y + b.h / 2}; }
world::Hover hover_at(const world::BBox& b) { return {b.x + b.w / 2, b.y + b.h / 2}; }
world::BBox full_screen(const world::ScreenBounds& s) { return {0, 0, s.width, s.height}; }

class Session {
 public:
  Session(const EngineConfig& cfg, const world::SiteModel& site, const Workflow& wf, const RunResources& res)
      : cfg_(cfg), site_(site), wf_(wf), res_(res), state_(world::initial_state(site)) {
    base_seed_ = derive_seed(cfg.seed, {text::fnv1a(wf.objective.id)});
    pcfg_ = cfg.perception;
    pcfg_.text_noise_rate = std::max(cfg.perception.text_noise_rate, site.faults.text_noise_rate);
    if (!res_.verifier) {
      default_verifier_.emplace(cfg.verify_threshold, cfg.grounding.match_window_mode);
      res_.verifier = &*default_verifier_;
    }
    if (!res_.selector) {
      default_selector_.emplace(cfg.grounding.match_window_mode);
      res_.selector = &*default_selector_;
    }
    if (!res_.model && cfg.mode != Mode::C) {
      default_model_.emplace(scripted_model_for(wf, cfg.scripted_error_rate, derive_seed(base_seed_, {0xdec1})));
      res_.model = &*default_model_;
    }
    report_.objective_id = wf.objective.id;
    report_.mode = cfg.mode;
  }

  RunReport run() {
    const auto started = std::chrono::steady_clock::now();
    try {
      switch (cfg_.mode) {
        case Mode::A: run_unverified(); break;
        case Mode::B: run_verified(); break;
        case Mode::C: run_graph(); break;
      }
    } catch (const ModelUnavailable& e) {
      spdlog::warn("{}: {}", wf_.objective.id, e.what());
      report_.terminal = "model_unavailable";
    }
    const bool clean_end =
        report_.terminal == "done" || report_.terminal == "completed" || report_.terminal == "replayed";
    report_.success = clean_end && goal_reached(wf_.goal, state_);
    report_.history = history_;
    report_.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    if (cfg_.mode == Mode::C && res_.memory && report_.success && report_.selector_calls > 0) {
      res_.memory->store(wf_.objective.text, executed_, memory::MemoryOutcome::success, res_.graph->version);
    }
    return report_;
  }

 private:
  View look() {
    ++epoch_;
    View v;
    v.frame = world::screenshot(state_, site_, derive_seed(base_seed_, {epoch_, 1}));
    auto p = pcfg_;
    p.seed = derive_seed(base_seed_, {epoch_, 2});
    v.perceived = perception::perceive(v.frame, p);
    return v;
  }

  void record(const Proposal& p, decision::Outcome outcome) {
    history_ = decision::append_history(std::move(history_),
                                        {history_.entries.size(), p.command, p.target_text, outcome});
  }

  void apply(const Proposal& p) {
    state_ = world::transition(state_, p.command, site_);
    record(p, decision::Outcome::applied);
    ++report_.steps_taken;
    const auto kind = world::kind_of(p.command);
    if (kind == world::ActionKind::click) {
      focus_box_ = p.marked.roi;
      focus_text_ = p.target_text;
    }
    memory::ReplayStep step;
    step.action = kind;
    step.target_text = p.target_text;
    step.ref_center = p.marked.roi.center();
    step.ref_screen = p.marked.frame.screen;
    if (kind == world::ActionKind::type) step.payload = std::get<world::TypeText>(p.command).text;
    if (kind == world::ActionKind::scroll) step.scroll_amount = std::get<world::Scroll>(p.command).amount;
    executed_.push_back(std::move(step));
  }

  class Step final : public verification::StepContext {
   public:
    Step(Session& s, std::function<std::optional<Proposal>(int)> make) : s_(s), make_(std::move(make)) {}

    std::optional<Proposal> propose(int attempt) override {
      auto p = make_(attempt);
      if (p && !p->decision.terminal()) last_ = p;
      last_attempt_empty_ = !p.has_value();
      return p;
    }
    verification::Verdict check(const Proposal& p) override {
      return verification::verify(*s_.res_.verifier, p.marked, p.perceived, s_.history_, s_.verifier_instructions(),
                                  p.decision);
    }
    void execute(const Proposal& p) override { s_.apply(p); }
    void reject(const Proposal& p, const verification::Verdict& v, bool final_attempt) override {
      spdlog::debug("{}: rejected {} ({})", s_.wf_.objective.id, decision::format(p.decision), v.reason);
      s_.record(p, final_attempt ? decision::Outcome::verified_fail : decision::Outcome::retried);
    }
    void wait() override { s_.state_ = world::advance_time(s_.state_, s_.site_); }

    // The loop only records rejected proposals; an attempt that produced
    // none still has to end the step as a failure in the history.
    void close_exhausted() {
      if (last_attempt_empty_ && last_) s_.record(*last_, decision::Outcome::verified_fail);
    }

   private:
    Session& s_;
    std::function<std::optional<Proposal>(int)> make_;
    std::optional<Proposal> last_;
    bool last_attempt_empty_ = false;
  };

  verification::StepOutcome verified_step(std::function<std::optional<Proposal>(int)> make) {
    Step step(*this, std::move(make));
    auto out = verification::verified_execute(step, cfg_.max_retries);
    report_.verify_calls += out.verify_calls;
    if (out.status == verification::StepStatus::exhausted) step.close_exhausted();
    return out;
  }

  const std::optional<std::vector<std::string>>& verifier_instructions() const {
    static const std::optional<std::vector<std::string>> none;
    return cfg_.mode == Mode::A ? none : wf_.objective.instruction_set;
  }

  // --- decision-model modes ---------------------------------------------

  std::optional<Proposal> decide_and_resolve(bool with_instructions) {
    View v = look();
    decision::DecisionRequest req;
    for (const auto& e : v.perceived) req.frame_summary.emplace_back(e.text, e.bbox);
    req.history = history_;
    req.objective = wf_.objective;
    if (with_instructions) {
      req.instructions = wf_.objective.instruction_set;
    } else {
      req.objective.instruction_set.reset();
    }
    req.prompt = decision::render_prompt(cfg_.prompt_template, req);

    ++report_.decision_calls;
    const auto raw = decision::decide(*res_.model, req);
    decision::ParsedDecision d;
    try {
      d = decision::parse(raw);
    } catch (const ParseError& e) {
      spdlog::debug("{}: unparseable decision: {}", wf_.objective.id, e.what());
      return std::nullopt;
    }

    Proposal p;
    p.decision = d;
    p.marked.frame = std::move(v.frame);
    p.command = world::Scroll{0};
    switch (d.kind) {
      case decision::DecisionKind::done:
      case decision::DecisionKind::fail: break;
      case decision::DecisionKind::click:
      case decision::DecisionKind::hover: {
        // no spatial prior here: first best text match in frame order
        const std::string want = text::fold(*d.target_text);
        const perception::DetectedElement* best = nullptr;
        double best_sim = -1.0;
        for (const auto& e : v.perceived) {
          const double sim = grounding::jaro(text::fold(e.text), want, cfg_.grounding.match_window_mode);
          if (sim > best_sim) {
            best_sim = sim;
            best = &e;
          }
        }
        if (!best) return std::nullopt;
        p.marked.roi = best->bbox;
        p.target_text = *d.target_text;
        if (d.kind == decision::DecisionKind::click) {
          p.command = click_at(best->bbox);
        } else {
          p.command = hover_at(best->bbox);
        }
        break;
      }
      case decision::DecisionKind::type:
        p.command = world::TypeText{*d.payload_text};
        p.marked.roi = focus_box_.value_or(world::BBox{0, 0, 1, 1});
        p.target_text = focus_text_;
        break;
      case decision::DecisionKind::scroll:
        p.command = world::Scroll{*d.scroll_amount};
        p.marked.roi = full_screen(p.marked.frame.screen);
        p.target_text = "scroll " + std::to_string(*d.scroll_amount);
        break;
    }
    p.perceived = std::move(v.perceived);
    return p;
  }

  void run_unverified() {
    for (int i = 0; i < cfg_.max_steps; ++i) {
      auto p = decide_and_resolve(false);
      if (!p) continue;
      if (p->decision.terminal()) {
        report_.terminal = decision::to_string(p->decision.kind);
        return;
      }
      apply(*p);
    }
    report_.terminal = "step_cap";
  }

  void run_verified() {
    if (!wf_.objective.instruction_set) throw ConfigError("ProcessB requires an instruction set");
    for (int i = 0; i < cfg_.max_steps; ++i) {
      const auto out = verified_step([this](int) { return decide_and_resolve(true); });
      if (out.status == verification::StepStatus::terminal) {
        report_.terminal = decision::to_string(out.terminal->kind);
        return;
      }
      if (out.status == verification::StepStatus::exhausted) {
        report_.terminal = "verification_exhausted";
        return;
      }
    }
    report_.terminal = "step_cap";
  }

  // --- graph mode ----------------------------------------------------------

  std::optional<Proposal> ground_target(const Target& t) {
    View v = look();
    Proposal p;
    p.target_text = t.text;
    const auto screen = v.frame.screen;
    if (t.action == world::ActionKind::scroll) {
      const int amount = t.scroll_amount.value_or(0);
      p.decision.kind = decision::DecisionKind::scroll;
      p.decision.scroll_amount = amount;
      p.command = world::Scroll{amount};
      p.marked.roi = full_screen(screen);
    } else {
      grounding::GroundingResult hit;
      try {
        hit = grounding::ground(t.text, grounding::rescale(t.ref_center, t.ref_screen, screen), v.perceived, screen,
                                cfg_.grounding);
      } catch (const grounding::BelowThreshold& e) {
        spdlog::debug("{}: {}", wf_.objective.id, e.what());
        return std::nullopt;
      } catch (const NoCandidates& e) {
        spdlog::debug("{}: {}", wf_.objective.id, e.what());
        return std::nullopt;
      }
      p.marked.roi = hit.chosen.bbox;
      switch (t.action) {
        case world::ActionKind::click:
          p.decision.kind = decision::DecisionKind::click;
          p.decision.target_text = t.text;
          p.command = click_at(hit.chosen.bbox);
          break;
        case world::ActionKind::hover:
          p.decision.kind = decision::DecisionKind::hover;
          p.decision.target_text = t.text;
          p.command = hover_at(hit.chosen.bbox);
          break;
        case world::ActionKind::type:
          p.decision.kind = decision::DecisionKind::type;
          p.decision.payload_text = t.payload.value_or("");
          p.command = world::TypeText{t.payload.value_or("")};
          break;
        case world::ActionKind::scroll: break;
      }
    }
    p.marked.frame = std::move(v.frame);
    p.perceived = std::move(v.perceived);
    return p;
  }

  // The live instruction's text wins over what was typed during recording.
  std::optional<std::string> instructed_payload() const {
    try {
      const auto d = decision::parse(decision::RawDecision{graph::current_step_text(wf_.objective, history_)});
      if (d.kind == decision::DecisionKind::type) return d.payload_text;
    } catch (const ParseError&) {
    }
    return std::nullopt;
  }

  Target target_for(const graph::GraphNode& node) const {
    Target t;
    t.action = node.action_type;
    t.text = node.element_text;
    t.ref_center = node.ref_center;
    t.ref_screen = node.ref_screen;
    if (node.action_type == world::ActionKind::type) {
      t.payload = instructed_payload();
      if (!t.payload) t.payload = node.annotation("payload");
    }
    if (node.action_type == world::ActionKind::scroll) {
      const std::string amount = node.annotation("amount");
      t.scroll_amount = amount.empty() ? 0 : std::stoi(amount);
    }
    return t;
  }

  Target target_for(const memory::ReplayStep& s) const {
    Target t{s.action, s.target_text, s.ref_center, s.ref_screen, s.payload, s.scroll_amount};
    // a similar objective recalls another objective's payloads
    if (s.action == world::ActionKind::type)
      if (auto live = instructed_payload()) t.payload = std::move(live);
    return t;
  }

  // Index of the first replay step that failed, nullopt when all executed.
  std::optional<int> replay(const memory::MemoryEntry& entry) {
    for (std::size_t i = 0; i < entry.steps.size(); ++i) {
      if (iterations_ >= cfg_.max_steps) return static_cast<int>(i);
      ++iterations_;
      const Target t = target_for(entry.steps[i]);
      const auto out = verified_step([&](int) { return ground_target(t); });
      if (out.status != verification::StepStatus::executed) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  // Walks the graph along the first `count` replayed steps to find the node
  // the planner should continue from.
  std::optional<std::string> locate(const memory::MemoryEntry& entry, int count) const {
    std::optional<std::string> prev;
    for (int i = 0; i < count; ++i) {
      const auto& s = entry.steps[static_cast<std::size_t>(i)];
      std::optional<std::string> next;
      for (const auto& c : graph::traverse(*res_.graph, prev)) {
        if (c.node.action_type == s.action && text::fold(c.node.element_text) == text::fold(s.target_text)) {
          next = c.node.id;
          break;
        }
      }
      if (!next) {
        spdlog::warn("{}: replayed step {} has no graph counterpart", wf_.objective.id, i);
        return prev;
      }
      prev = next;
    }
    return prev;
  }

  void run_graph() {
    if (!res_.graph) throw ConfigError("ProcessC requires a site graph");
    std::optional<std::string> prev;

    if (res_.memory) {
      if (const auto hit = res_.memory->recall(wf_.objective.text, cfg_.recall_threshold)) {
        report_.recalled_entry = hit->entry.entry_id;
        const auto failed_at = replay(hit->entry);
        if (!failed_at && goal_reached(wf_.goal, state_)) {
          report_.terminal = "replayed";
          return;
        }
        report_.fallback_step = failed_at.value_or(static_cast<int>(hit->entry.steps.size()));
        spdlog::info("{}: memory replay fell back to planning at step {}", wf_.objective.id, *report_.fallback_step);
        prev = locate(hit->entry, *report_.fallback_step);
      }
    }

    const auto& instructions = wf_.objective.instruction_set;
    for (;;) {
      if (instructions && history_.applied_count() >= instructions->size()) {
        report_.terminal = "completed";
        return;
      }
      if (iterations_ >= cfg_.max_steps) {
        report_.terminal = "step_cap";
        return;
      }
      const auto candidates = graph::traverse(*res_.graph, prev);
      if (candidates.empty()) {
        report_.terminal = "completed";
        return;
      }
      ++report_.selector_calls;
      graph::GraphNode node;
      try {
        node = graph::select_node(*res_.selector, candidates, wf_.objective, history_);
      } catch (const NoCandidates&) {
        report_.terminal = "completed";
        return;
      }
      ++iterations_;
      const Target t = target_for(node);
      const auto out = verified_step([&](int) { return ground_target(t); });
      if (out.status != verification::StepStatus::executed) {
        report_.terminal = "verification_exhausted";
        return;
      }
      prev = node.id;
    }
  }

  const EngineConfig& cfg_;
  const world::SiteModel& site_;
  const Workflow& wf_;
  RunResources res_;
  std::optional<verification::RuleVerifier> default_verifier_;
  std::optional<graph::DeterministicSelector> default_selector_;
  std::optional<decision::ScriptedDecisionModel> default_model_;

  world::WorldState state_;
  decision::HistoryLog history_;
  RunReport report_;
  perception::PerceptionConfig pcfg_;
  std::uint64_t base_seed_ = 0;
  std::uint64_t epoch_ = 0;
  int iterations_ = 0;
  std::optional<world::BBox> focus_box_;
  std::string focus_text_;
  std::vector<memory::ReplayStep> executed_;
};

}  // namespace

RunReport run(const EngineConfig& config, const world::SiteModel& site, const Workflow& workflow,
              const RunResources& resources) {
  config.validate();
  return Session(config, site, workflow, resources).run();
}

std::vector<RunReport> run_passes(const EngineConfig& config, const world::SiteModel& site, const Workflow& workflow,
                                  const RunResources& resources, int passes) {
  if (passes < 1) throw ConfigError("passes must be >= 1");
  if (config.mode == Mode::A) passes = 1;
  std::vector<RunReport> out;
  for (int p = 0; p < passes; ++p) {
    EngineConfig c = config;
    if (p > 0) c.seed = derive_seed(config.seed, {0x9a55, static_cast<std::uint64_t>(p)});
    out.push_back(run(c, site, workflow, resources));
    if (out.back().success) break;
  }
  return out;
}

decision::ScriptedDecisionModel scripted_model_for(const Workflow& workflow, double error_rate, std::uint64_t seed) {
  if (!workflow.objective.instruction_set)
    throw ConfigError("workflow '" + workflow.objective.id + "' has no instruction set to script a model from");
  return decision::ScriptedDecisionModel::from_lines(*workflow.objective.instruction_set, error_rate, seed);
}

exploration::ExplorationTrace demonstrate(const world::SiteModel& site, const Workflow& workflow,
                                          exploration::StateRegistry& registry) {
  exploration::ScriptedDemonstration driver(workflow.demonstration);
  auto trace = exploration::record_session(site, driver, workflow.objective.id, workflow.objective.text, registry);
  std::vector<exploration::TeachDecision> confirms;
  for (const auto& s : trace.steps) confirms.push_back({s.step_id, exploration::Confirm{}});
  return exploration::teach_apply(trace, confirms);
}

graph::SiteGraph learn_graph(const world::SiteModel& site, const std::vector<Workflow>& workflows,
                             const graph::SiteGraph& base) {
  const auto clean = world::without_faults(site);
  exploration::StateRegistry registry;
  std::vector<exploration::ExplorationTrace> traces;
  traces.reserve(workflows.size());
  for (const auto& w : workflows) traces.push_back(demonstrate(clean, w, registry));
  return graph::ingest_traces(base, clean, traces);
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::A: return "ProcessA";
    case Mode::B: return "ProcessB";
    case Mode::C: return "ProcessC";
  }
  return "ProcessC";
}

Mode mode_from_string(const std::string& s) {
  const std::string f = text::fold(s);
  if (f == "processa" || f == "a") return Mode::A;
  if (f == "processb" || f == "b") return Mode::B;
  if (f == "processc" || f == "c") return Mode::C;
  throw ConfigError("unknown mode '" + s + "'");
}

nlohmann::json to_json(const EngineConfig& c) {
  return {{"mode", to_string(c.mode)},
          {"max_steps", c.max_steps},
          {"max_depth", c.max_depth},
          {"grounding", grounding::to_json(c.grounding)},
          {"verify_threshold", c.verify_threshold},
          {"max_retries", c.max_retries},
          {"perception", perception::to_json(c.perception)},
          {"search", graph::to_json(c.search)},
          {"recall_threshold", c.recall_threshold},
          {"seed", c.seed},
          {"scripted_error_rate", c.scripted_error_rate},
          {"passes", c.passes},
          {"prompt_template", c.prompt_template}};
}

EngineConfig engine_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  EngineConfig c;
  try {
    if (j.contains("mode")) c.mode = mode_from_string(json_io::require_string(j, "mode"));
    if (j.contains("max_steps")) c.max_steps = json_io::require_int(j, "max_steps");
    if (j.contains("max_depth")) c.max_depth = json_io::require_int(j, "max_depth");
    if (j.contains("grounding")) c.grounding = grounding::grounding_params_from_json(j.at("grounding"));
    if (j.contains("verify_threshold")) c.verify_threshold = json_io::require_number(j, "verify_threshold");
    if (j.contains("max_retries")) c.max_retries = json_io::require_int(j, "max_retries");
    if (j.contains("perception")) c.perception = perception::perception_config_from_json(j.at("perception"));
    if (j.contains("search")) c.search = graph::search_params_from_json(j.at("search"));
    if (j.contains("recall_threshold")) c.recall_threshold = json_io::require_number(j, "recall_threshold");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scripted_error_rate")) c.scripted_error_rate = json_io::require_number(j, "scripted_error_rate");
    if (j.contains("passes")) c.passes = json_io::require_int(j, "passes");
    if (j.contains("prompt_template")) c.prompt_template = json_io::require_string(j, "prompt_template");
  } catch (const SchemaError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const Workflow& w) {
  nlohmann::json demo = nlohmann::json::array();
  for (const auto& c : w.demonstration) demo.push_back(world::to_json(c));
  nlohmann::json j{{"id", w.objective.id},
                   {"objective", w.objective.text},
                   {"expected_steps", w.objective.expected_steps},
                   {"level", decision::to_string(w.objective.level)},
                   {"demonstration", std::move(demo)},
                   {"goal", {{"page", w.goal.page}, {"buffers", w.goal.buffers}}}};
  if (w.objective.instruction_set) j["instruction_set"] = *w.objective.instruction_set;
  return j;
}

Workflow workflow_from_json(const nlohmann::json& j) {
  Workflow w;
  try {
    w.objective.id = json_io::require_string(j, "id");
    w.objective.text = json_io::require_string(j, "objective");
    w.objective.expected_steps = json_io::require_int(j, "expected_steps");
    w.objective.level = decision::classify_level(w.objective.expected_steps);
    if (j.contains("level") && decision::level_from_string(json_io::require_string(j, "level")) != w.objective.level)
      throw SchemaError("level disagrees with expected_steps");
    if (j.contains("instruction_set"))
      w.objective.instruction_set = json_io::require(j, "instruction_set").get<std::vector<std::string>>();
    for (const auto& c : json_io::require(j, "demonstration")) w.demonstration.push_back(world::command_from_json(c));
    const auto& goal = json_io::require(j, "goal");
    w.goal.page = json_io::require_string(goal, "page");
    if (goal.contains("buffers")) w.goal.buffers = goal.at("buffers").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  }
  return w;
}

nlohmann::json to_json(const RunReport& r, bool stable) {
  nlohmann::json j{{"objective", r.objective_id},
                   {"mode", to_string(r.mode)},
                   {"success", r.success},
                   {"steps_taken", r.steps_taken},
                   {"decision_calls", r.decision_calls},
                   {"selector_calls", r.selector_calls},
                   {"verify_calls", r.verify_calls},
                   {"fallback_step", r.fallback_step ? nlohmann::json(*r.fallback_step) : nlohmann::json()},
                   {"recalled_entry", r.recalled_entry ? nlohmann::json(*r.recalled_entry) : nlohmann::json()},
                   {"terminal", r.terminal},
                   {"history", decision::to_json(r.history)}};
  if (!stable) j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

RunReport run_report_from_json(const nlohmann::json& j) {
  RunReport r;
  try {
    r.objective_id = json_io::require_string(j, "objective");
    r.mode = mode_from_string(json_io::require_string(j, "mode"));
    r.success = json_io::require(j, "success").get<bool>();
    r.steps_taken = json_io::require_int(j, "steps_taken");
    r.decision_calls = json_io::require_int(j, "decision_calls");
    r.selector_calls = json_io::require_int(j, "selector_calls");
    r.verify_calls = json_io::require_int(j, "verify_calls");
    if (j.contains("fallback_step") && !j.at("fallback_step").is_null())
      r.fallback_step = json_io::require_int(j, "fallback_step");
    if (j.contains("recalled_entry") && !j.at("recalled_entry").is_null())
      r.recalled_entry = json_io::require_string(j, "recalled_entry");
    r.terminal = json_io::require_string(j, "terminal");
    r.history = decision::history_from_json(json_io::require(j, "history"));
    if (j.contains("wall_time_ms")) r.wall_time_ms = json_io::require_number(j, "wall_time_ms");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(e.what());
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  }
  return r;
}

}  // namespace autonode::engine
