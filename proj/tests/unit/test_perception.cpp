#include "autonode/errors.hpp"
#include "autonode/perception.hpp"
#include "doctest.h"
#include "ground_truth.hpp"
#include "oracles.hpp"

using namespace autonode;
using namespace autonode::perception;

namespace {

world::Frame sample_frame() {
  world::Frame f;
  f.screen = {1280, 800};
  f.elements = {{{"a", world::ElementKind::button, "Compose", {40, 120, 200, 48}}, world::SourceKind::real},
                {{"b", world::ElementKind::textfield, "Subject", {400, 190, 600, 44}}, world::SourceKind::real},
                {{"g", world::ElementKind::button, "Send", {0, 0, 60, 30}}, world::SourceKind::spurious}};
  return f;
}

class FixedDetector final : public ElementDetector {
 public:
  std::vector<Detection> detect(const world::Frame& frame) const override {
    // reports only the last element, with a made-up box
    return {{frame.elements.size() - 1, {1, 2, 3, 4}, world::ElementKind::icon, 0.25}};
  }
};

class UpperReader final : public TextReader {
 public:
  std::string read(const world::Frame& frame, std::size_t ref) const override {
    std::string s = frame.elements.at(ref).element.text;
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  }
};

}  // namespace

TEST_CASE("noiseless perception reproduces the frame") {
  const auto f = sample_frame();
  const auto seen = perceive(f, {});
  REQUIRE(seen.size() == f.elements.size());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    CHECK(seen[i].bbox == f.elements[i].element.bbox);
    CHECK(seen[i].text == f.elements[i].element.text);
    CHECK(seen[i].kind == f.elements[i].element.kind);
    CHECK(seen[i].confidence == 1.0);
  }
}

TEST_CASE("ground truth source stays attached but hidden") {
  const auto seen = perceive(sample_frame(), {});
  CHECK(GroundTruthAccess::source(seen[0]) == world::SourceKind::real);
  CHECK(GroundTruthAccess::source(seen[2]) == world::SourceKind::spurious);
  const DetectedElement made({0, 0, 1, 1}, "x", 1.0, world::ElementKind::label);
  CHECK(GroundTruthAccess::source(made) == world::SourceKind::unknown);
}

TEST_CASE("bbox jitter is bounded, deterministic and stays on screen") {
  auto f = sample_frame();
  f.elements.push_back({{"edge", world::ElementKind::button, "Edge", {1270, 790, 10, 10}}, world::SourceKind::real});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const PerceptionConfig cfg{5, 0.0, seed};
    const auto a = perceive(f, cfg);
    CHECK(a.size() == f.elements.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& truth = f.elements[i].element.bbox;
      const auto& got = a[i].bbox;
      CHECK(std::abs(got.x - truth.x) <= 5);
      CHECK(std::abs(got.y - truth.y) <= 5);
      CHECK(std::abs(got.x + got.w - truth.x - truth.w) <= 5);
      CHECK(std::abs(got.y + got.h - truth.y - truth.h) <= 5);
      CHECK(got.within(f.screen));
      CHECK(a[i].confidence >= 0.5);
      CHECK(a[i].confidence <= 1.0);
    }
    const auto b = perceive(f, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].bbox == b[i].bbox);
  }
}

TEST_CASE("corrupt_text preserves length and substitutes at the configured rate") {
  CHECK(corrupt_text("Compose", 0.0, 1) == "Compose");
  const std::string original = "abcdefghijklmnopqrstuvwxyz";
  std::size_t changed = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const auto noisy = corrupt_text(original, 0.1, seed);
    REQUIRE(noisy.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
      CHECK(noisy[i] >= 'a');
      CHECK(noisy[i] <= 'z');
      changed += noisy[i] != original[i] ? 1 : 0;
      ++total;
    }
  }
  const double rate = double(changed) / double(total);
  CHECK(rate > 0.09);
  CHECK(rate < 0.11);
  CHECK(corrupt_text(original, 1.0, 3) != original);
  for (std::size_t i = 0; i < original.size(); ++i) CHECK(corrupt_text(original, 1.0, 3)[i] != original[i]);
  CHECK(corrupt_text(original, 0.3, 77) == corrupt_text(original, 0.3, 77));
}

TEST_CASE("text noise varies with the seed") {
  const auto f = sample_frame();
  const auto a = perceive(f, {0, 0.5, 1});
  const auto b = perceive(f, {0, 0.5, 2});
  bool any = false;
  for (std::size_t i = 0; i < a.size(); ++i) any = any || a[i].text != b[i].text;
  CHECK(any);
}

TEST_CASE("custom detector and reader plug in") {
  const auto f = sample_frame();
  const auto seen = perceive_with(f, FixedDetector{}, UpperReader{});
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].text == "SEND");
  CHECK(seen[0].bbox == world::BBox{1, 2, 3, 4});
  CHECK(seen[0].kind == world::ElementKind::icon);
  CHECK(seen[0].confidence == 0.25);
  CHECK(GroundTruthAccess::source(seen[0]) == world::SourceKind::spurious);
}

TEST_CASE("perception config JSON") {
  const PerceptionConfig c{3, 0.05, 11};
  CHECK(perception_config_from_json(to_json(c)) == c);
  CHECK_THROWS_AS(perception_config_from_json({{"bbox_jitter", -1}}), ConfigError);
  CHECK_THROWS_AS(perception_config_from_json({{"text_noise_rate", 2.0}}), ConfigError);
}
