// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rasda {

struct InvalidLadder : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Geometric milestone ladder. milestones[k] = min_t * sf^k for
// k = 0..num_rungs with num_rungs = floor(log(max_t/min_t) / log(sf)).
// Milestone membership is exact integer equality; fractional epochs are not
// supported. sf (worker scaling per rung) and rf (fraction 1/rf of trials
// kept per rung) are independent factors, both >= 2.
struct RungLadder {
  int min_t = 1;
  int max_t = 1;
  int sf = 2;
  int rf = 2;
  std::vector<int> milestones;

  int num_rungs() const { return static_cast<int>(milestones.size()) - 1; }

  std::optional<int> milestone_index(int epoch) const {
    for (size_t k = 0; k < milestones.size(); ++k)
      if (milestones[k] == epoch) return static_cast<int>(k);
    return std::nullopt;
  }
};

inline RungLadder compute_ladder(int min_t, int max_t, int sf, int rf) {
  if (min_t < 1) throw InvalidLadder("min_t must be >= 1");
  if (min_t > max_t) throw InvalidLadder("min_t must not exceed max_t");
  if (sf < 2) throw InvalidLadder("sf must be >= 2");
  if (rf < 2) throw InvalidLadder("rf must be >= 2");
  RungLadder ladder{min_t, max_t, sf, rf, {}};
  // Integer arithmetic: floor(log(max_t/min_t)/log(sf)) computed as the
  // largest k with min_t * sf^k <= max_t, immune to floating-point log
  // landing just below an integer.
  std::int64_t m = min_t;
  while (true) {
    ladder.milestones.push_back(static_cast<int>(m));
    if (m > max_t / sf) break;  // m * sf would exceed max_t
    m *= sf;
  }
  return ladder;
}

// base_resources * sf^rung, overflow-checked.
inline int new_resources(int base_resources, int sf, int current_rung) {
  if (base_resources < 1) throw std::invalid_argument("base_resources must be >= 1");
  if (sf < 2) throw std::invalid_argument("sf must be >= 2");
  if (current_rung < 0) throw std::invalid_argument("rung index must be >= 0");
  std::int64_t w = base_resources;
  for (int k = 0; k < current_rung; ++k) {
    w *= sf;
    if (w > std::numeric_limits<int>::max())
      throw std::overflow_error("worker count overflows");
  }
  return static_cast<int>(w);
}

}  // namespace rasda
