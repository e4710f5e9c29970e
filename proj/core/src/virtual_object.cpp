#include "teamrank/virtual_object.hpp"

#include <string>

#include "teamrank/error.hpp"

namespace teamrank {

VirtualObject virtual_object(const DiffVector& d, const ObjectRecord& swap_out) {
  detail::require_lambda(swap_out);
  detail::require_dimension(d.values.size(), swap_out.attrs.size(), "swap-out attributes");

  VirtualObject v;
  v.swap_out_id = swap_out.id;
  v.lambda = swap_out.lambda;
  v.tv2 = truncating_vector(d);
  v.values.assign(d.values.size(), 0.0);
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (v.tv2.bits[i] == 0) continue;
    const double raw = (d.values[i] + swap_out.attrs[i]) / swap_out.lambda;
    if (raw < 0.0) {
      v.clipped = true;
    } else {
      v.values[i] = raw;
    }
  }
  return v;
}

VirtualObject virtual_object(const TeamContext& team, const TargetContext& target,
                             const ObjectRecord& swap_out) {
  if (!team.contains(swap_out.id)) {
    throw Error(ErrorCode::kNotAMember,
                "swap-out object " + std::to_string(swap_out.id) + " is not a team member");
  }
  return virtual_object(diff(target, team), swap_out);
}

NormalizedCandidate normalize(const ObjectRecord& record) {
  detail::require_lambda(record);
  NormalizedCandidate cand;
  cand.object_id = record.id;
  cand.rates.resize(record.attrs.size());
  for (std::size_t i = 0; i < record.attrs.size(); ++i) {
    cand.rates[i] = record.attrs[i] / record.lambda;
  }
  return cand;
}

double odis(const VirtualObject& v, const NormalizedCandidate& cand, const WeightVector& w) {
  detail::require_dimension(v.values.size(), cand.rates.size(), "candidate rates");
  detail::require_dimension(v.values.size(), w.size(), "weight vector");
  detail::require_dimension(v.values.size(), v.tv2.bits.size(), "virtual object truncation");
  double sum = 0.0;
  for (std::size_t i = 0; i < cand.rates.size(); ++i) {
    if (v.tv2.bits[i] == 0) continue;
    const double gap = v.values[i] - cand.rates[i];
    if (!(gap > 0.0)) continue;
    const double term = w[i] * gap;
    sum += term * term;
  }
  return std::sqrt(sum);
}

}  // namespace teamrank
