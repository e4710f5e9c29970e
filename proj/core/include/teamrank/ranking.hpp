#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "teamrank/model.hpp"
#include "teamrank/nn_index.hpp"
#include "teamrank/virtual_object.hpp"

namespace teamrank {

struct SwapRecommendation {
  ObjectId swap_out_id = 0;
  ObjectId swap_in_id = 0;
  double new_distance = 0.0;  // exact post-exchange truncated distance
  double odis = 0.0;          // distance of the swap-in to the swap-out's virtual object

  friend bool operator==(const SwapRecommendation&, const SwapRecommendation&) = default;
};

// Ranking order: (new_distance, swap_out_id, swap_in_id) ascending.
bool ranks_before(const SwapRecommendation& a, const SwapRecommendation& b) noexcept;

struct ScanOptions {
  std::size_t block_size = 100;
  IoStats* io = nullptr;  // receives one read per scanned block
};

// Scores every (member, candidate) pair with one block scan of the space per
// member. Candidates that are already on the team are skipped, except the
// member itself (the identity swap). Throws InvalidArgument when top_k == 0.
std::vector<SwapRecommendation> brute_force_rank(const TeamContext& team,
                                                 const TargetContext& target,
                                                 const ObjectSpace& space, const WeightVector& w,
                                                 std::size_t top_k, ScanOptions scan = {});

// Index-backed ranking. Each member's partition is streamed in ascending oDis
// and re-scored exactly; a member stops once the directory bound of its next
// block proves no remaining candidate can enter the top k. Returns exactly what
// brute_force_rank returns. Throws StaleIndex, InvalidArgument.
std::vector<SwapRecommendation> rtc_star_rank(const TeamContext& team, const TargetContext& target,
                                              const ObjectSpace& space, const WeightVector& w,
                                              const NnIndex& index, std::size_t top_k);

struct CorollaryReport {
  double dis_prime = 0.0;  // exact post-exchange distance
  double odis = 0.0;
  double lambda_r = 0.0;
  bool strong_flip = false;  // a strong dimension became weak after the exchange
  bool clipped = false;      // the virtual object clipped a negative weak value

  // dis_prime == lambda_r * odis whenever neither flag is set.
  bool identity_applies() const noexcept { return !strong_flip && !clipped; }
};

CorollaryReport verify_corollary(const TeamContext& team, const TargetContext& target,
                                 const ObjectRecord& swap_out, const ObjectRecord& swap_in,
                                 const WeightVector& w);

}  // namespace teamrank
