#include "autonode/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "autonode/text.hpp"

namespace autonode::grounding {

void GroundingParams::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(semantic_weight) || !unit(spatial_weight) || !unit(accept_threshold))
    throw ConfigError("grounding weights and threshold must lie in [0,1]");
  if (std::abs(semantic_weight + spatial_weight - 1.0) > 1e-9)
    throw ConfigError("semantic_weight + spatial_weight must equal 1");
}

double jaro(std::string_view s1, std::string_view s2, MatchWindow mode) {
  if (s1.empty() && s2.empty()) return 1.0;
  if (s1.empty() || s2.empty()) return 0.0;

  const std::size_t longest = std::max(s1.size(), s2.size());
  const std::size_t half = mode == MatchWindow::paper_ceiling ? (longest + 1) / 2 : longest / 2;
  const std::size_t window = half > 0 ? half - 1 : 0;

  std::vector<char> matched1(s1.size(), 0);
  std::vector<char> matched2(s2.size(), 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(s2.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (matched2[j] || s1[i] != s2[j]) continue;
      matched1[i] = matched2[j] = 1;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    if (!matched1[i]) continue;
    while (!matched2[k]) ++k;
    if (s1[i] != s2[k]) ++half_transpositions;
    ++k;
  }

  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (m / static_cast<double>(s1.size()) + m / static_cast<double>(s2.size()) + (m - t) / m) / 3.0;
}

double normalized_distance(world::Point p, world::Point q, world::ScreenBounds screen) {
  const double diagonal = std::hypot(static_cast<double>(screen.width), static_cast<double>(screen.height));
  if (diagonal <= 0.0) return 0.0;
  return std::clamp(std::hypot(p.x - q.x, p.y - q.y) / diagonal, 0.0, 1.0);
}

namespace {

double semantic(std::string_view a, std::string_view b, const GroundingParams& params) {
  if (!params.case_fold) return jaro(a, b, params.match_window_mode);
  return jaro(text::fold(a), text::fold(b), params.match_window_mode);
}

}  // namespace

double combined_score(std::string_view node_text, world::Point node_ref_center,
                      const perception::DetectedElement& cand, world::ScreenBounds screen,
                      const GroundingParams& params) {
  const double sem = semantic(node_text, cand.text, params);
  const double dist = normalized_distance(node_ref_center, cand.bbox.center(), screen);
  return params.semantic_weight * sem + params.spatial_weight * (1.0 - dist);
}

GroundingResult ground(std::string_view node_text, world::Point node_ref_center,
                       const std::vector<perception::DetectedElement>& candidates, world::ScreenBounds screen,
                       const GroundingParams& params) {
  if (candidates.empty()) throw NoCandidates("no perceived elements to ground '" + std::string(node_text) + "'");

  struct Scored {
    std::size_t index;
    double score;
    double sem;
    double dist;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const double sem = semantic(node_text, c.text, params);
    const double dist = normalized_distance(node_ref_center, c.bbox.center(), screen);
    scored.push_back({i, params.semantic_weight * sem + params.spatial_weight * (1.0 - dist), sem, dist});
  }
  // Ties: higher jaro, then nearer, then higher on screen, then further left.
  std::stable_sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
    const auto& ba = candidates[a.index].bbox;
    const auto& bb = candidates[b.index].bbox;
    return std::make_tuple(-a.score, -a.sem, a.dist, ba.y, ba.x) < std::make_tuple(-b.score, -b.sem, b.dist, bb.y, bb.x);
  });

  GroundingResult result;
  result.ranked.reserve(scored.size());
  for (const auto& s : scored) result.ranked.emplace_back(candidates[s.index], s.score);
  result.chosen = result.ranked.front().first;
  result.score = result.ranked.front().second;
  if (result.score < params.accept_threshold) {
    const std::string msg = "best match for '" + std::string(node_text) + "' is '" + result.chosen.text +
                            "' with score " + std::to_string(result.score);
    throw BelowThreshold(msg, std::move(result));
  }
  return result;
}

world::Point rescale(world::Point p, world::ScreenBounds from, world::ScreenBounds to) {
  if (from.width <= 0 || from.height <= 0 || from == to) return p;
  return {p.x * to.width / from.width, p.y * to.height / from.height};
}

nlohmann::json to_json(const GroundingParams& p) {
  return {{"semantic_weight", p.semantic_weight},
          {"spatial_weight", p.spatial_weight},
          {"accept_threshold", p.accept_threshold},
          {"match_window_mode", p.match_window_mode == MatchWindow::paper_ceiling ? "paper_ceiling" : "classic_floor"},
          {"case_fold", p.case_fold}};
}

GroundingParams grounding_params_from_json(const nlohmann::json& j) {
  GroundingParams p;
  p.semantic_weight = j.value("semantic_weight", p.semantic_weight);
  p.spatial_weight = j.value("spatial_weight", p.spatial_weight);
  p.accept_threshold = j.value("accept_threshold", p.accept_threshold);
  const auto mode = j.value("match_window_mode", std::string("paper_ceiling"));
  if (mode == "paper_ceiling") {
    p.match_window_mode = MatchWindow::paper_ceiling;
  } else if (mode == "classic_floor") {
    p.match_window_mode = MatchWindow::classic_floor;
  } else {
    throw ConfigError("unknown match_window_mode '" + mode + "'");
  }
  p.case_fold = j.value("case_fold", p.case_fold);
  p.validate();
  return p;
}

}  // namespace autonode::grounding
