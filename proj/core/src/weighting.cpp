#include "teamrank/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "teamrank/error.hpp"

namespace teamrank {

namespace {

// Number of strictly decreasing pairs in `values`, counted while merge-sorting it.
std::uint64_t count_inversions(std::vector<double>& values, std::vector<double>& scratch,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = count_inversions(values, scratch, lo, mid) +
                        count_inversions(values, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (values[j] < values[i]) {
      swaps += mid - i;
      scratch[k++] = values[j++];
    } else {
      scratch[k++] = values[i++];
    }
  }
  while (i < mid) scratch[k++] = values[i++];
  while (j < hi) scratch[k++] = values[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, values.begin() + lo);
  return swaps;
}

// Pairs tied within each run of equal values of `sorted`.
std::uint64_t tied_pairs(std::span<const double> sorted) {
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  detail::require_dimension(x.size(), y.size(), "ranked series");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::kInsufficientData, "kendall tau needs at least two values");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = x[order[k]];
    ys[k] = y[order[k]];
  }

  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_x = tied_pairs(xs);
  std::uint64_t ties_xy = 0, run = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k < n && xs[k] == xs[k - 1] && ys[k] == ys[k - 1]) {
      ++run;
    } else {
      ties_xy += run * (run - 1) / 2;
      run = 1;
    }
  }

  // Sorted by (x, y), so every inversion left in y is a discordant pair.
  std::vector<double> scratch(n);
  const std::uint64_t discordant = count_inversions(ys, scratch, 0, n);
  const std::uint64_t ties_y = tied_pairs(ys);

  const std::uint64_t untied = total - ties_x - ties_y + ties_xy;
  const std::uint64_t concordant = untied - discordant;
  return (static_cast<double>(concordant) - static_cast<double>(discordant)) /
         static_cast<double>(total);
}

WeightResult compute_weights(std::span<const AttributeVector> team_stats,
                             std::span<const double> wins) {
  detail::require_dimension(team_stats.size(), wins.size(), "final ranking");
  if (team_stats.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "weights need at least two teams");
  }
  const std::size_t d = team_stats.front().size();
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "team stats have no columns");

  std::vector<double> weights(d);
  std::vector<std::size_t> floored;
  std::vector<double> column(team_stats.size());
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t t = 0; t < team_stats.size(); ++t) {
      detail::require_dimension(d, team_stats[t].size(), "team stats row");
      column[t] = team_stats[t][i];
    }
    const double tau = std::abs(kendall_tau(column, wins));
    if (tau < kWeightFloor) {
      weights[i] = kWeightFloor;
      floored.push_back(i);
    } else {
      weights[i] = tau;
    }
  }
  return WeightResult{WeightVector(std::move(weights)), std::move(floored)};
}

TargetSelection select_target(const TeamContext& team, std::string team_id,
                              std::span<const TargetContext> elite, const WeightVector& w) {
  if (elite.empty()) throw Error(ErrorCode::kEmptyEliteSet, "no elite teams to approach");
  const TargetContext* best = nullptr;
  double best_distance = 0.0;
  for (const TargetContext& candidate : elite) {
    const double dist = team_distance(team, candidate, w);
    if (best == nullptr || dist < best_distance ||
        (dist == best_distance && candidate.team_id < best->team_id)) {
      best = &candidate;
      best_distance = dist;
    }
  }
  return TargetSelection{std::move(team_id), best->team_id, best_distance};
}

}  // namespace teamrank
