#include "teamrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "teamrank/digest.hpp"
#include "teamrank/error.hpp"

namespace teamrank {

namespace detail {

void require_dimension(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": expected " +
                                                   std::to_string(expected) + ", got " +
                                                   std::to_string(actual));
  }
}

void require_lambda(const ObjectRecord& record) {
  if (!(record.lambda > 0.0) || !std::isfinite(record.lambda)) {
    throw Error(ErrorCode::kInvalidLambda,
                "object " + std::to_string(record.id) + " has lambda " + std::to_string(record.lambda));
  }
}

}  // namespace detail

ObjectSpace::ObjectSpace(std::vector<std::string> attribute_names, std::vector<ObjectRecord> records)
    : attribute_names_(std::move(attribute_names)), records_(std::move(records)) {
  const std::size_t d = attribute_names_.size();
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "object space needs at least one attribute");

  max_abs_rate_.assign(d, 0.0);
  by_id_.reserve(records_.size());
  Digest digest;
  digest.add(static_cast<std::uint64_t>(d));
  for (const auto& name : attribute_names_) digest.add(name);

  for (std::size_t k = 0; k < records_.size(); ++k) {
    const ObjectRecord& rec = records_[k];
    detail::require_dimension(d, rec.attrs.size(), "object attributes");
    detail::require_lambda(rec);
    for (std::size_t i = 0; i < d; ++i) {
      if (!std::isfinite(rec.attrs[i])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "object " + std::to_string(rec.id) + " has a non-finite attribute");
      }
      max_abs_rate_[i] = std::max(max_abs_rate_[i], std::abs(rec.attrs[i] / rec.lambda));
    }
    if (!by_id_.emplace(rec.id, k).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate object id " + std::to_string(rec.id));
    }
    digest.add(rec.id).add(rec.label).add(rec.lambda).add(std::span<const double>(rec.attrs));
  }
  version_ = digest.value();
}

const ObjectRecord* ObjectSpace::find(ObjectId id) const noexcept {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const ObjectRecord& ObjectSpace::at(ObjectId id) const {
  if (const ObjectRecord* rec = find(id)) return *rec;
  throw Error(ErrorCode::kNotAMember, "object " + std::to_string(id) + " is not in the space");
}

bool TeamContext::contains(ObjectId id) const noexcept {
  return std::binary_search(member_ids.begin(), member_ids.end(), id);
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw Error(ErrorCode::kInvalidWeights, "empty weight vector");
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
      throw Error(ErrorCode::kInvalidWeights,
                  "weight " + std::to_string(i) + " is " + std::to_string(weights_[i]));
    }
  }
}

double WeightVector::max() const noexcept {
  return *std::max_element(weights_.begin(), weights_.end());
}

WeightVector WeightVector::scaled(double factor) const {
  std::vector<double> out = weights_;
  for (double& w : out) w *= factor;
  return WeightVector(std::move(out));
}

AttributeVector aggregate_team(std::span<const ObjectRecord> members) {
  if (members.empty()) throw Error(ErrorCode::kEmptyTeam, "team has no members");
  const std::size_t d = members.front().attrs.size();

  std::vector<const ObjectRecord*> ordered;
  ordered.reserve(members.size());
  for (const auto& m : members) {
    detail::require_dimension(d, m.attrs.size(), "member attributes");
    ordered.push_back(&m);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const ObjectRecord* a, const ObjectRecord* b) { return a->id < b->id; });

  AttributeVector sum(d, 0.0);
  for (const ObjectRecord* m : ordered) {
    for (std::size_t i = 0; i < d; ++i) sum[i] += m->attrs[i];
  }
  return sum;
}

TeamContext make_team(const ObjectSpace& space, std::span<const ObjectId> member_ids) {
  if (member_ids.empty()) throw Error(ErrorCode::kEmptyTeam, "team has no members");
  TeamContext team;
  team.member_ids.assign(member_ids.begin(), member_ids.end());
  std::sort(team.member_ids.begin(), team.member_ids.end());
  if (std::adjacent_find(team.member_ids.begin(), team.member_ids.end()) != team.member_ids.end()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate team member id");
  }

  std::vector<ObjectRecord> members;
  members.reserve(team.member_ids.size());
  for (ObjectId id : team.member_ids) members.push_back(space.at(id));
  team.aggregate = aggregate_team(members);
  return team;
}

DiffVector diff(std::span<const double> target, std::span<const double> team) {
  detail::require_dimension(target.size(), team.size(), "team aggregate");
  DiffVector out;
  out.values.resize(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) out.values[i] = target[i] - team[i];
  return out;
}

DiffVector diff(const TargetContext& target, const TeamContext& team) {
  return diff(target.aggregate, team.aggregate);
}

TruncatingVector truncating_vector(const DiffVector& d) {
  TruncatingVector tv;
  tv.bits.resize(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) tv.bits[i] = d.values[i] < 0.0 ? 0 : 1;
  return tv;
}

double truncated_distance(const DiffVector& d, const TruncatingVector& tv, const WeightVector& w) {
  detail::require_dimension(d.values.size(), tv.bits.size(), "truncating vector");
  detail::require_dimension(d.values.size(), w.size(), "weight vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (tv.bits[i] == 0) continue;
    const double term = w[i] * d.values[i];
    sum += term * term;
  }
  return std::sqrt(sum);
}

double team_distance(const TeamContext& team, const TargetContext& target, const WeightVector& w) {
  const DiffVector d = diff(target, team);
  return truncated_distance(d, truncating_vector(d), w);
}

DiffVector post_exchange_diff(const DiffVector& d, const ObjectRecord& swap_out,
                              const ObjectRecord& swap_in) {
  detail::require_lambda(swap_out);
  detail::require_lambda(swap_in);
  detail::require_dimension(d.values.size(), swap_out.attrs.size(), "swap-out attributes");
  detail::require_dimension(d.values.size(), swap_in.attrs.size(), "swap-in attributes");

  const double ratio = swap_out.lambda / swap_in.lambda;
  DiffVector out;
  out.values.resize(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    out.values[i] = (d.values[i] + swap_out.attrs[i]) - ratio * swap_in.attrs[i];
  }
  return out;
}

double post_exchange_distance(const TeamContext& team, const TargetContext& target,
                              const ObjectRecord& swap_out, const ObjectRecord& swap_in,
                              const WeightVector& w) {
  if (!team.contains(swap_out.id)) {
    throw Error(ErrorCode::kNotAMember,
                "swap-out object " + std::to_string(swap_out.id) + " is not a team member");
  }
  const DiffVector next = post_exchange_diff(diff(target, team), swap_out, swap_in);
  detail::require_dimension(next.values.size(), w.size(), "weight vector");
  return truncated_distance(next, truncating_vector(next), w);
}

}  // namespace teamrank
