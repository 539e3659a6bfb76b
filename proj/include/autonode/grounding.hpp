#pragma once

// Element grounding: locate the on-screen element that matches a symbolic
// target (text plus a reference location) with a weighted Jaro + proximity
// score.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "autonode/errors.hpp"
#include "autonode/perception.hpp"
#include "autonode/world.hpp"

namespace autonode::grounding {

enum class MatchWindow {
  paper_ceiling,  // ceil(max(|s1|,|s2|)/2) - 1
  classic_floor,  // floor(max(|s1|,|s2|)/2) - 1
};

struct GroundingParams {
  double semantic_weight = 0.7;
  double spatial_weight = 0.3;
  double accept_threshold = 0.55;
  MatchWindow match_window_mode = MatchWindow::paper_ceiling;
  bool case_fold = true;

  void validate() const;
  bool operator==(const GroundingParams&) const = default;
};

struct GroundingResult {
  perception::DetectedElement chosen;
  double score = 0.0;
  std::vector<std::pair<perception::DetectedElement, double>> ranked;  // non-increasing score
};

// Raised when the best candidate scores under accept_threshold; carries the
// ranking so callers can log what was seen.
class BelowThreshold : public Error {
 public:
  BelowThreshold(const std::string& what_arg, GroundingResult best)
      : Error("BelowThreshold: " + what_arg), best_(std::move(best)) {}
  const GroundingResult& best() const { return best_; }

 private:
  GroundingResult best_;
};

double jaro(std::string_view s1, std::string_view s2, MatchWindow mode = MatchWindow::paper_ceiling);

double normalized_distance(world::Point p, world::Point q, world::ScreenBounds screen);

double combined_score(std::string_view node_text, world::Point node_ref_center,
                      const perception::DetectedElement& cand, world::ScreenBounds screen,
                      const GroundingParams& params);

GroundingResult ground(std::string_view node_text, world::Point node_ref_center,
                       const std::vector<perception::DetectedElement>& candidates, world::ScreenBounds screen,
                       const GroundingParams& params);

// Rescales a point recorded on `from` to the coordinate frame of `to`.
world::Point rescale(world::Point p, world::ScreenBounds from, world::ScreenBounds to);

nlohmann::json to_json(const GroundingParams& params);
GroundingParams grounding_params_from_json(const nlohmann::json& j);

}  // namespace autonode::grounding
