#include "autonode/decision.hpp"

#include <charconv>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/rng.hpp"
#include "autonode/text.hpp"

namespace autonode::decision {

std::size_t HistoryLog::applied_count() const {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (e.outcome == Outcome::applied) ++n;
  return n;
}

HistoryLog append_history(HistoryLog log, HistoryEntry step) {
  if (step.step_index != log.entries.size()) {
    throw IndexGap("expected step " + std::to_string(log.entries.size()) + ", got " +
                   std::to_string(step.step_index));
  }
  log.entries.push_back(std::move(step));
  return log;
}

namespace {

std::string upper(std::string s) {
  for (char& c : s)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return s;
}

std::optional<int> parse_int(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) return std::nullopt;
  return out;
}

}  // namespace

ParsedDecision parse(const RawDecision& raw) {
  const std::string line = text::trim(raw.payload);
  if (line.empty()) throw ParseError("empty decision");
  if (line.find('\n') != std::string::npos) throw ParseError("decision must be a single line");

  const auto sep = line.find("::");
  const std::string verb = upper(text::trim(line.substr(0, sep)));
  const std::optional<std::string> arg =
      sep == std::string::npos ? std::nullopt : std::optional<std::string>(text::trim(line.substr(sep + 2)));

  auto need_arg = [&]() -> const std::string& {
    if (!arg || arg->empty()) throw ParseError(verb + " requires an argument");
    return *arg;
  };

  ParsedDecision d;
  if (verb == "CLICK") {
    d.kind = DecisionKind::click;
    d.target_text = need_arg();
  } else if (verb == "HOVER") {
    d.kind = DecisionKind::hover;
    d.target_text = need_arg();
  } else if (verb == "TYPE") {
    d.kind = DecisionKind::type;
    d.payload_text = need_arg();
  } else if (verb == "SCROLL") {
    d.kind = DecisionKind::scroll;
    const auto amount = parse_int(need_arg());
    if (!amount) throw ParseError("SCROLL amount must be an integer, got '" + *arg + "'");
    d.scroll_amount = *amount;
  } else if (verb == "DONE") {
    if (arg) throw ParseError("DONE takes no argument");
    d.kind = DecisionKind::done;
  } else if (verb == "FAIL") {
    d.kind = DecisionKind::fail;
    d.payload_text = need_arg();
  } else {
    throw ParseError("unknown verb '" + verb + "'");
  }
  return d;
}

std::string format(const ParsedDecision& d) {
  switch (d.kind) {
    case DecisionKind::click: return "CLICK :: " + d.target_text.value_or("");
    case DecisionKind::hover: return "HOVER :: " + d.target_text.value_or("");
    case DecisionKind::type: return "TYPE :: " + d.payload_text.value_or("");
    case DecisionKind::scroll: {
      const int n = d.scroll_amount.value_or(0);
      return "SCROLL :: " + std::string(n >= 0 ? "+" : "") + std::to_string(n);
    }
    case DecisionKind::done: return "DONE";
    case DecisionKind::fail: return "FAIL :: " + d.payload_text.value_or("unspecified");
  }
  return "DONE";
}

RawDecision decide(const DecisionModel& model, const DecisionRequest& request) { return model.decide(request); }

ScriptedDecisionModel::ScriptedDecisionModel(std::vector<ParsedDecision> rules, double error_rate,
                                             std::uint64_t seed)
    : rules_(std::move(rules)), error_rate_(error_rate), seed_(seed) {}

ScriptedDecisionModel ScriptedDecisionModel::from_lines(const std::vector<std::string>& lines,
                                                        double error_rate, std::uint64_t seed) {
  std::vector<ParsedDecision> rules;
  rules.reserve(lines.size());
  for (const auto& l : lines) rules.push_back(parse(RawDecision{l}));
  return ScriptedDecisionModel(std::move(rules), error_rate, seed);
}

RawDecision ScriptedDecisionModel::decide(const DecisionRequest& request) const {
  const std::size_t next = request.history.applied_count();
  if (next >= rules_.size()) return RawDecision{"DONE"};

  ParsedDecision d = rules_[next];
  const bool targeted = d.kind == DecisionKind::click || d.kind == DecisionKind::hover;
  if (targeted) {
    Rng rng(derive_seed(seed_, {next, request.history.entries.size()}));
    if (rng.bernoulli(error_rate_)) {
      const std::string intended = text::fold(*d.target_text);
      std::vector<std::string> others;
      for (const auto& [label, box] : request.frame_summary) {
        if (!label.empty() && text::fold(label) != intended) others.push_back(label);
      }
      if (others.empty()) {
        d.target_text = *d.target_text + " (alt)";
      } else {
        d.target_text = others[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(others.size()) - 1))];
      }
    }
  }
  return RawDecision{format(d)};
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string render_prompt(const std::string& tmpl, const DecisionRequest& request) {
  std::string elements;
  for (const auto& [label, box] : request.frame_summary) {
    elements += "- \"" + label + "\" at [" + std::to_string(box.x) + "," + std::to_string(box.y) + "," +
                std::to_string(box.w) + "," + std::to_string(box.h) + "]\n";
  }
  std::string history;
  for (const auto& e : request.history.entries) {
    history += std::to_string(e.step_index) + ". " + world::describe(e.command) + " -> " + e.target_text + " (" +
               to_string(e.outcome) + ")\n";
  }
  std::string instructions;
  if (request.instructions) {
    for (std::size_t i = 0; i < request.instructions->size(); ++i)
      instructions += std::to_string(i + 1) + ". " + (*request.instructions)[i] + "\n";
  } else {
    instructions = "(none)\n";
  }
  std::string out = tmpl;
  replace_all(out, "{objective}", request.objective.text);
  replace_all(out, "{elements}", elements);
  replace_all(out, "{history}", history.empty() ? "(none)\n" : history);
  replace_all(out, "{instructions}", instructions);
  return out;
}

Level classify_level(int expected_steps) {
  if (expected_steps < 5) return Level::L1;
  if (expected_steps <= 10) return Level::L2;
  return Level::L3;
}

std::string to_string(Level level) {
  switch (level) {
    case Level::L1: return "L1";
    case Level::L2: return "L2";
    case Level::L3: return "L3";
  }
  return "L1";
}

Level level_from_string(const std::string& s) {
  if (s == "L1") return Level::L1;
  if (s == "L2") return Level::L2;
  if (s == "L3") return Level::L3;
  throw SchemaError("unknown level '" + s + "'");
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::applied: return "applied";
    case Outcome::retried: return "retried";
    case Outcome::verified_fail: return "verified_fail";
  }
  return "applied";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "applied") return Outcome::applied;
  if (s == "retried") return Outcome::retried;
  if (s == "verified_fail") return Outcome::verified_fail;
  throw SchemaError("unknown outcome '" + s + "'");
}

std::string to_string(DecisionKind kind) {
  switch (kind) {
    case DecisionKind::click: return "click";
    case DecisionKind::type: return "type";
    case DecisionKind::scroll: return "scroll";
    case DecisionKind::hover: return "hover";
    case DecisionKind::done: return "done";
    case DecisionKind::fail: return "fail";
  }
  return "done";
}

namespace {

DecisionKind decision_kind_from_string(const std::string& s) {
  for (auto k : {DecisionKind::click, DecisionKind::type, DecisionKind::scroll, DecisionKind::hover,
                 DecisionKind::done, DecisionKind::fail}) {
    if (to_string(k) == s) return k;
  }
  throw SchemaError("unknown decision kind '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const HistoryLog& log) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : log.entries) {
    out.push_back({{"step", e.step_index},
                   {"command", world::to_json(e.command)},
                   {"target", e.target_text},
                   {"outcome", to_string(e.outcome)}});
  }
  return out;
}

HistoryLog history_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaError("history must be an array");
  HistoryLog log;
  for (const auto& e : j) {
    log = append_history(std::move(log), {static_cast<std::size_t>(json_io::require_int(e, "step")),
                                          world::command_from_json(json_io::require(e, "command")),
                                          json_io::require_string(e, "target"),
                                          outcome_from_string(json_io::require_string(e, "outcome"))});
  }
  return log;
}

nlohmann::json to_json(const ParsedDecision& d) {
  nlohmann::json j{{"action", to_string(d.kind)}};
  if (d.target_text) j["target"] = *d.target_text;
  if (d.payload_text) j["payload"] = *d.payload_text;
  if (d.scroll_amount) j["amount"] = *d.scroll_amount;
  return j;
}

ParsedDecision parsed_decision_from_json(const nlohmann::json& j) {
  ParsedDecision d;
  d.kind = decision_kind_from_string(json_io::require_string(j, "action"));
  if (j.contains("target")) d.target_text = json_io::require_string(j, "target");
  if (j.contains("payload")) d.payload_text = json_io::require_string(j, "payload");
  if (j.contains("amount")) d.scroll_amount = json_io::require_int(j, "amount");
  const bool ok = (d.kind != DecisionKind::click && d.kind != DecisionKind::hover) || d.target_text;
  if (!ok || (d.kind == DecisionKind::type && !d.payload_text) || (d.kind == DecisionKind::scroll && !d.scroll_amount))
    throw SchemaError("command template missing required argument for " + to_string(d.kind));
  return d;
}

}  // namespace autonode::decision
