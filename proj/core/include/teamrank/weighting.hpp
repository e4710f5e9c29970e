#pragma once

#include <span>
#include <string>
#include <vector>

#include "teamrank/model.hpp"

namespace teamrank {

// Kendall's tau with ties counted as neither concordant nor discordant; the
// denominator is always n(n-1)/2. O(n log n).
// Throws DimensionMismatch on unequal lengths, InsufficientData when n < 2.
double kendall_tau(std::span<const double> x, std::span<const double> y);

inline constexpr double kWeightFloor = 1e-6;

struct WeightResult {
  WeightVector weights;
  std::vector<std::size_t> floored_dimensions;  // dimensions clamped to kWeightFloor
};

// w_i = max(|tau(column_i, wins)|, kWeightFloor). team_stats is row-major,
// one row per team. Higher wins means a better final ranking.
WeightResult compute_weights(std::span<const AttributeVector> team_stats,
                             std::span<const double> wins);

struct TargetSelection {
  std::string team_id;
  std::string target_id;
  double distance = 0.0;
};

// Elite team closest to `team` under truncated weighted distance; ties go to
// the lexicographically smaller target id.
TargetSelection select_target(const TeamContext& team, std::string team_id,
                              std::span<const TargetContext> elite, const WeightVector& w);

}  // namespace teamrank
