#pragma once

// Objective memory: completed objective -> executed steps, recalled for
// identical or similar objectives so they can be replayed without planning.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "autonode/world.hpp"

namespace autonode::memory {

inline constexpr double kDefaultRecallThreshold = 0.85;

enum class MemoryOutcome { success, partial, failed };

struct ReplayStep {
  world::ActionKind action = world::ActionKind::click;
  std::string target_text;
  std::optional<std::string> payload;
  std::optional<int> scroll_amount;
  world::Point ref_center;
  world::ScreenBounds ref_screen;

  bool operator==(const ReplayStep&) const = default;
};

struct MemoryEntry {
  std::string entry_id;
  std::string objective_text;
  std::vector<ReplayStep> steps;
  MemoryOutcome outcome = MemoryOutcome::success;
  std::uint64_t graph_version = 0;
  std::uint64_t created_at = 0;

  bool operator==(const MemoryEntry&) const = default;
};

struct RecallResult {
  MemoryEntry entry;
  double similarity = 0.0;
};

// Append-only store, optionally journaled to a newline-delimited JSON file
// that is read back on construction.
class MemoryStore {
 public:
  MemoryStore() = default;
  explicit MemoryStore(std::filesystem::path journal);

  std::string store(const std::string& objective_text, std::vector<ReplayStep> steps, MemoryOutcome outcome,
                    std::uint64_t graph_version);

  std::optional<MemoryEntry> lookup(const std::string& entry_id) const;
  std::optional<RecallResult> recall(const std::string& objective_text,
                                     double recall_threshold = kDefaultRecallThreshold) const;
  std::vector<MemoryEntry> entries() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<MemoryEntry> entries_;
  std::optional<std::filesystem::path> journal_;
  std::uint64_t clock_ = 0;
};

std::string to_string(MemoryOutcome outcome);
MemoryOutcome memory_outcome_from_string(const std::string& s);

nlohmann::json to_json(const MemoryEntry& entry);
MemoryEntry memory_entry_from_json(const nlohmann::json& j);

}  // namespace autonode::memory
