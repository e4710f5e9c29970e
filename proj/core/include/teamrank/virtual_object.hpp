#pragma once

#include <span>

#include "teamrank/model.hpp"

namespace teamrank {

// Per swap-out member query point in rate space (attribute per unit of lambda).
// Filling it exactly would close every weak-dimension gap of the team.
struct VirtualObject {
  ObjectId swap_out_id = 0;
  double lambda = 1.0;  // swap-out lambda
  AttributeVector values;
  TruncatingVector tv2;  // strong dimensions of the pre-exchange team are 0
  bool clipped = false;  // some weak-dimension value was negative and clipped to 0
};

struct NormalizedCandidate {
  ObjectId object_id = 0;
  AttributeVector rates;  // attrs / lambda
};

// Throws NotAMember / InvalidLambda.
VirtualObject virtual_object(const TeamContext& team, const TargetContext& target,
                             const ObjectRecord& swap_out);
// Same construction from a precomputed pre-exchange diff; membership is not checked.
VirtualObject virtual_object(const DiffVector& d, const ObjectRecord& swap_out);

NormalizedCandidate normalize(const ObjectRecord& record);

// Truncated distance from a virtual object to a rate-normalized candidate:
// only weak dimensions where the candidate falls short of the virtual value count.
double odis(const VirtualObject& v, const NormalizedCandidate& cand, const WeightVector& w);

namespace detail {

// odis with the rates derived on the fly; bit-identical to normalize() + odis().
inline double odis_from_attrs(const VirtualObject& v, std::span<const double> attrs, double lambda,
                              std::span<const double> w) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (v.tv2.bits[i] == 0) continue;
    const double gap = v.values[i] - attrs[i] / lambda;
    if (!(gap > 0.0)) continue;
    const double term = w[i] * gap;
    sum += term * term;
  }
  return std::sqrt(sum);
}

}  // namespace detail

}  // namespace teamrank
