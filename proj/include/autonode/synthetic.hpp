#pragma once

// Generated benchmark suite: a CRM-like site with navigation, list pages,
// forms and confirmation pages, plus workflows of 3 to 15 steps with
// demonstrations, instruction sets and goals.

#include <cstdint>
#include <vector>

#include "autonode/engine.hpp"
#include "autonode/world.hpp"

namespace autonode::synthetic {

struct SuiteOptions {
  std::size_t workflows = 100;
  std::uint64_t seed = 0;
  double spurious_prob = 0.0;
  double text_noise_rate = 0.0;
};

struct Suite {
  world::SiteModel site;
  std::vector<engine::Workflow> workflows;
};

// The spurious pool holds same-text copies of frequently targeted elements,
// placed away from the originals.
Suite generate_suite(const SuiteOptions& options);

}  // namespace autonode::synthetic
