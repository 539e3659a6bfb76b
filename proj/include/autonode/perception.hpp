#pragma once

// Element detection and text reading over a rendered frame. Detector and
// reader are interfaces; the shipped implementations simulate imperfect
// models with seeded box jitter and character substitutions.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "autonode/world.hpp"

namespace autonode::perception {

struct PerceptionConfig {
  int bbox_jitter = 0;           // max per-edge offset in pixels
  double text_noise_rate = 0.0;  // per-character substitution probability
  std::uint64_t seed = 0;

  bool operator==(const PerceptionConfig&) const = default;
};

struct GroundTruthAccess;  // test-only, see tests/support
class ElementDetector;
class TextReader;

class DetectedElement {
 public:
  DetectedElement() = default;
  DetectedElement(world::BBox bbox, std::string text, double confidence, world::ElementKind kind)
      : bbox(bbox), text(std::move(text)), confidence(confidence), kind(kind) {}

  world::BBox bbox;
  std::string text;
  double confidence = 1.0;
  world::ElementKind kind = world::ElementKind::button;

 private:
  friend struct GroundTruthAccess;
  friend std::vector<DetectedElement> perceive_with(const world::Frame&, const ElementDetector&,
                                                    const TextReader&);
  world::SourceKind source_ = world::SourceKind::unknown;
};

struct Detection {
  std::size_t element_ref = 0;  // index into the frame
  world::BBox bbox;
  world::ElementKind kind = world::ElementKind::button;
  double confidence = 1.0;
};

class ElementDetector {
 public:
  virtual ~ElementDetector() = default;
  virtual std::vector<Detection> detect(const world::Frame& frame) const = 0;
};

class TextReader {
 public:
  virtual ~TextReader() = default;
  virtual std::string read(const world::Frame& frame, std::size_t element_ref) const = 0;
};

class SimulatedDetector final : public ElementDetector {
 public:
  explicit SimulatedDetector(PerceptionConfig config) : config_(config) {}
  std::vector<Detection> detect(const world::Frame& frame) const override;

 private:
  PerceptionConfig config_;
};

class SimulatedReader final : public TextReader {
 public:
  explicit SimulatedReader(PerceptionConfig config) : config_(config) {}
  std::string read(const world::Frame& frame, std::size_t element_ref) const override;

 private:
  PerceptionConfig config_;
};

std::vector<Detection> detect(const world::Frame& frame, const PerceptionConfig& config);
std::string read_text(const world::Frame& frame, std::size_t element_ref, const PerceptionConfig& config);

// Substitutes characters of `text` with [a-z] at `rate`; length is preserved.
std::string corrupt_text(const std::string& text, double rate, std::uint64_t seed);

std::vector<DetectedElement> perceive_with(const world::Frame& frame, const ElementDetector& detector,
                                           const TextReader& reader);
std::vector<DetectedElement> perceive(const world::Frame& frame, const PerceptionConfig& config);

nlohmann::json to_json(const PerceptionConfig& config);
PerceptionConfig perception_config_from_json(const nlohmann::json& j);

}  // namespace autonode::perception
