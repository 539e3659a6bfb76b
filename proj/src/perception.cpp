#include "autonode/perception.hpp"

#include <algorithm>

#include "autonode/errors.hpp"
#include "autonode/json_io.hpp"
#include "autonode/rng.hpp"
#include "autonode/text.hpp"

namespace autonode::perception {

namespace {

constexpr std::uint64_t kJitterTag = 0x6a17;
constexpr std::uint64_t kTextTag = 0x7e47;

world::BBox jitter_box(const world::BBox& box, const world::ScreenBounds& screen, int jitter, Rng& rng) {
  if (jitter <= 0) return box;
  auto offset = [&] { return static_cast<int>(rng.range(-jitter, jitter)); };
  int left = box.x + offset();
  int top = box.y + offset();
  int right = box.x + box.w + offset();
  int bottom = box.y + box.h + offset();
  left = std::clamp(left, 0, screen.width - 1);
  top = std::clamp(top, 0, screen.height - 1);
  right = std::clamp(right, left + 1, screen.width);
  bottom = std::clamp(bottom, top + 1, screen.height);
  return {left, top, right - left, bottom - top};
}

}  // namespace

std::string corrupt_text(const std::string& text, double rate, std::uint64_t seed) {
  if (rate <= 0.0) return text;
  Rng rng(seed);
  std::string out = text;
  for (char& c : out) {
    if (!rng.bernoulli(rate)) continue;
    const char original = text::fold(std::string(1, c))[0];
    // 25 letters other than the original (or any of 26 for non-letters).
    const bool letter = original >= 'a' && original <= 'z';
    auto pick = static_cast<char>('a' + rng.range(0, letter ? 24 : 25));
    if (letter && pick >= original) ++pick;
    c = pick;
  }
  return out;
}

std::vector<Detection> SimulatedDetector::detect(const world::Frame& frame) const {
  std::vector<Detection> out;
  out.reserve(frame.elements.size());
  for (std::size_t i = 0; i < frame.elements.size(); ++i) {
    const auto& e = frame.elements[i].element;
    Rng rng(derive_seed(config_.seed, {kJitterTag, i}));
    const auto box = jitter_box(e.bbox, frame.screen, config_.bbox_jitter, rng);
    const double moved = std::abs(box.x - e.bbox.x) + std::abs(box.y - e.bbox.y) +
                         std::abs(box.w - e.bbox.w) + std::abs(box.h - e.bbox.h);
    const double confidence = config_.bbox_jitter > 0 ? 1.0 - 0.5 * moved / (4.0 * 2.0 * config_.bbox_jitter) : 1.0;
    out.push_back({i, box, e.kind, std::clamp(confidence, 0.0, 1.0)});
  }
  return out;
}

std::string SimulatedReader::read(const world::Frame& frame, std::size_t element_ref) const {
  const auto& e = frame.elements.at(element_ref).element;
  return corrupt_text(e.text, config_.text_noise_rate, derive_seed(config_.seed, {kTextTag, element_ref}));
}

std::vector<Detection> detect(const world::Frame& frame, const PerceptionConfig& config) {
  return SimulatedDetector(config).detect(frame);
}

std::string read_text(const world::Frame& frame, std::size_t element_ref, const PerceptionConfig& config) {
  return SimulatedReader(config).read(frame, element_ref);
}

std::vector<DetectedElement> perceive_with(const world::Frame& frame, const ElementDetector& detector,
                                           const TextReader& reader) {
  std::vector<DetectedElement> out;
  const auto detections = detector.detect(frame);
  out.reserve(detections.size());
  for (const auto& d : detections) {
    DetectedElement e(d.bbox, reader.read(frame, d.element_ref), d.confidence, d.kind);
    e.source_ = frame.elements.at(d.element_ref).source;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<DetectedElement> perceive(const world::Frame& frame, const PerceptionConfig& config) {
  return perceive_with(frame, SimulatedDetector(config), SimulatedReader(config));
}

nlohmann::json to_json(const PerceptionConfig& c) {
  return {{"bbox_jitter", c.bbox_jitter}, {"text_noise_rate", c.text_noise_rate}, {"seed", c.seed}};
}

PerceptionConfig perception_config_from_json(const nlohmann::json& j) {
  PerceptionConfig c;
  c.bbox_jitter = j.value("bbox_jitter", 0);
  c.text_noise_rate = j.value("text_noise_rate", 0.0);
  c.seed = j.value("seed", std::uint64_t{0});
  if (c.bbox_jitter < 0) throw ConfigError("bbox_jitter must be >= 0");
  if (c.text_noise_rate < 0.0 || c.text_noise_rate > 1.0) throw ConfigError("text_noise_rate outside [0,1]");
  return c;
}

}  // namespace autonode::perception
