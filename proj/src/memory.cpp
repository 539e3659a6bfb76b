#include "autonode/memory.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>

#include <spdlog/spdlog.h>

#include "autonode/errors.hpp"
#include "autonode/grounding.hpp"
#include "autonode/json_io.hpp"
#include "autonode/text.hpp"

namespace autonode::memory {

namespace {

std::string make_id(std::uint64_t seq) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "mem-%06llu", static_cast<unsigned long long>(seq));
  return buf;
}

}  // namespace

MemoryStore::MemoryStore(std::filesystem::path journal) : journal_(std::move(journal)) {
  std::ifstream in(*journal_);
  if (!in) return;
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);)
    if (!text::trim(line).empty()) lines.push_back(line);

  bool dropped = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      entries_.push_back(memory_entry_from_json(nlohmann::json::parse(lines[i])));
    } catch (const std::exception& e) {
      if (i + 1 == lines.size()) {
        spdlog::warn("memory journal {}: dropping truncated trailing entry ({})", journal_->string(), e.what());
        dropped = true;
        break;
      }
      throw SchemaError("memory journal " + journal_->string() + " line " + std::to_string(i + 1) + ": " +
                        e.what());
    }
  }
  for (const auto& e : entries_) clock_ = std::max(clock_, e.created_at);
  if (dropped) {
    // rewrite without the partial line so later appends start on a fresh line
    in.close();
    std::ofstream out(*journal_, std::ios::trunc);
    for (const auto& e : entries_) out << to_json(e).dump() << "\n";
  }
}

std::string MemoryStore::store(const std::string& objective_text, std::vector<ReplayStep> steps,
                               MemoryOutcome outcome, std::uint64_t graph_version) {
  std::unique_lock lock(mu_);
  MemoryEntry entry;
  entry.created_at = ++clock_;
  entry.entry_id = make_id(entry.created_at);
  entry.objective_text = objective_text;
  entry.steps = std::move(steps);
  entry.outcome = outcome;
  entry.graph_version = graph_version;

  if (journal_) {
    if (journal_->has_parent_path()) std::filesystem::create_directories(journal_->parent_path());
    std::ofstream out(*journal_, std::ios::app);
    if (!out) throw Error("cannot append to memory journal " + journal_->string());
    // one write per entry so a crash leaves at most one partial trailing line
    out << to_json(entry).dump() + "\n" << std::flush;
  }
  entries_.push_back(entry);
  return entry.entry_id;
}

std::optional<MemoryEntry> MemoryStore::lookup(const std::string& entry_id) const {
  std::shared_lock lock(mu_);
  for (const auto& e : entries_)
    if (e.entry_id == entry_id) return e;
  return std::nullopt;
}

std::optional<RecallResult> MemoryStore::recall(const std::string& objective_text, double recall_threshold) const {
  std::shared_lock lock(mu_);
  const std::string q = text::fold(objective_text);
  std::optional<RecallResult> best;
  for (const auto& e : entries_) {
    if (e.outcome != MemoryOutcome::success) continue;
    const double sim = grounding::jaro(q, text::fold(e.objective_text));
    if (sim < recall_threshold) continue;
    // entries are in creation order, so >= prefers the most recent on ties
    if (!best || sim >= best->similarity) best = RecallResult{e, sim};
  }
  return best;
}

std::vector<MemoryEntry> MemoryStore::entries() const {
  std::shared_lock lock(mu_);
  return entries_;
}

std::size_t MemoryStore::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string to_string(MemoryOutcome outcome) {
  switch (outcome) {
    case MemoryOutcome::success: return "success";
    case MemoryOutcome::partial: return "partial";
    case MemoryOutcome::failed: return "failed";
  }
  return "failed";
}

MemoryOutcome memory_outcome_from_string(const std::string& s) {
  if (s == "success") return MemoryOutcome::success;
  if (s == "partial") return MemoryOutcome::partial;
  if (s == "failed") return MemoryOutcome::failed;
  throw SchemaError("unknown memory outcome '" + s + "'");
}

nlohmann::json to_json(const MemoryEntry& entry) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : entry.steps) {
    nlohmann::json j{{"action", world::to_string(s.action)},
                     {"target", s.target_text},
                     {"ref", {s.ref_center.x, s.ref_center.y}},
                     {"screen", {s.ref_screen.width, s.ref_screen.height}}};
    if (s.payload) j["payload"] = *s.payload;
    if (s.scroll_amount) j["amount"] = *s.scroll_amount;
    steps.push_back(std::move(j));
  }
  return {{"id", entry.entry_id},
          {"objective", entry.objective_text},
          {"steps", std::move(steps)},
          {"outcome", to_string(entry.outcome)},
          {"graph_version", entry.graph_version},
          {"created_at", entry.created_at}};
}

MemoryEntry memory_entry_from_json(const nlohmann::json& j) {
  MemoryEntry e;
  try {
    e.entry_id = json_io::require_string(j, "id");
    e.objective_text = json_io::require_string(j, "objective");
    e.outcome = memory_outcome_from_string(json_io::require_string(j, "outcome"));
    e.graph_version = json_io::require(j, "graph_version").get<std::uint64_t>();
    e.created_at = json_io::require(j, "created_at").get<std::uint64_t>();
    for (const auto& s : json_io::require(j, "steps")) {
      ReplayStep step;
      step.action = world::action_kind_from_string(json_io::require_string(s, "action"));
      step.target_text = json_io::require_string(s, "target");
      const auto& ref = json_io::require(s, "ref");
      step.ref_center = {ref.at(0).get<double>(), ref.at(1).get<double>()};
      const auto& screen = json_io::require(s, "screen");
      step.ref_screen = {screen.at(0).get<int>(), screen.at(1).get<int>()};
      if (s.contains("payload")) step.payload = json_io::require_string(s, "payload");
      if (s.contains("amount")) step.scroll_amount = json_io::require_int(s, "amount");
      e.steps.push_back(std::move(step));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw SchemaError(ex.what());
  }
  return e;
}

}  // namespace autonode::memory
