#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace teamrank {

using ObjectId = std::uint64_t;

// d finite attribute values: an object's stats, a team aggregate or a target aggregate.
using AttributeVector = std::vector<double>;

struct ObjectRecord {
  ObjectId id = 0;
  std::string label;
  double lambda = 1.0;  // exchange parameter, e.g. minutes played
  AttributeVector attrs;

  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

// Immutable collection of objects sharing one dimensionality.
//
// The constructor validates every record (dimension, finite attributes,
// lambda > 0, unique ids) and precomputes a content digest used to
// fingerprint indexes built over the space.
class ObjectSpace {
 public:
  ObjectSpace(std::vector<std::string> attribute_names, std::vector<ObjectRecord> records);

  std::size_t dimension() const noexcept { return attribute_names_.size(); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::span<const ObjectRecord> records() const noexcept { return records_; }
  const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }

  // nullptr when absent.
  const ObjectRecord* find(ObjectId id) const noexcept;
  // Throws NotAMember when absent.
  const ObjectRecord& at(ObjectId id) const;

  std::uint64_t version() const noexcept { return version_; }

  // max over records of |attrs_i / lambda|, per dimension.
  std::span<const double> max_abs_rate() const noexcept { return max_abs_rate_; }

 private:
  std::vector<std::string> attribute_names_;
  std::vector<ObjectRecord> records_;
  std::unordered_map<ObjectId, std::size_t> by_id_;
  std::vector<double> max_abs_rate_;
  std::uint64_t version_ = 0;
};

struct TeamContext {
  std::vector<ObjectId> member_ids;  // ascending
  AttributeVector aggregate;

  bool contains(ObjectId id) const noexcept;
};

struct TargetContext {
  std::string team_id;
  AttributeVector aggregate;
};

class WeightVector {
 public:
  // Throws InvalidWeights unless every weight is finite and > 0.
  explicit WeightVector(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> values() const noexcept { return weights_; }
  double max() const noexcept;

  WeightVector scaled(double factor) const;

 private:
  std::vector<double> weights_;
};

struct TruncatingVector {
  std::vector<std::uint8_t> bits;  // 0 on strong dimensions, 1 on weak ones

  friend bool operator==(const TruncatingVector&, const TruncatingVector&) = default;
};

struct DiffVector {
  std::vector<double> values;  // target minus team, per dimension
};

// Component-wise sum of member attributes, accumulated in ascending id order.
AttributeVector aggregate_team(std::span<const ObjectRecord> members);

// Resolves ids against the space and aggregates; ids may be given in any order.
TeamContext make_team(const ObjectSpace& space, std::span<const ObjectId> member_ids);

DiffVector diff(const TargetContext& target, const TeamContext& team);
DiffVector diff(std::span<const double> target, std::span<const double> team);

TruncatingVector truncating_vector(const DiffVector& d);

double truncated_distance(const DiffVector& d, const TruncatingVector& tv, const WeightVector& w);

// Truncated distance between a team aggregate and a target, with a fresh truncating vector.
double team_distance(const TeamContext& team, const TargetContext& target, const WeightVector& w);

DiffVector post_exchange_diff(const DiffVector& d, const ObjectRecord& swap_out,
                              const ObjectRecord& swap_in);

double post_exchange_distance(const TeamContext& team, const TargetContext& target,
                              const ObjectRecord& swap_out, const ObjectRecord& swap_in,
                              const WeightVector& w);

namespace detail {

// Allocation-free evaluation of the post-exchange truncated distance. Every
// ranking path goes through this kernel so equal inputs give bit-equal output.
// No argument validation.
inline double exchange_distance(std::span<const double> d, std::span<const double> out_attrs,
                                double out_lambda, std::span<const double> in_attrs,
                                double in_lambda, std::span<const double> w) noexcept {
  const double ratio = out_lambda / in_lambda;
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double next = (d[i] + out_attrs[i]) - ratio * in_attrs[i];
    if (next < 0.0) continue;
    const double term = w[i] * next;
    sum += term * term;
  }
  return std::sqrt(sum);
}

void require_dimension(std::size_t expected, std::size_t actual, const char* what);
void require_lambda(const ObjectRecord& record);

}  // namespace detail

}  // namespace teamrank
