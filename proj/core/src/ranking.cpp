#include "teamrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>

#include "teamrank/error.hpp"

namespace teamrank {

namespace {

struct RankOrder {
  bool operator()(const SwapRecommendation& a, const SwapRecommendation& b) const noexcept {
    return ranks_before(a, b);
  }
};

// Keeps the k best recommendations seen so far; the worst of them sits on top.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(const SwapRecommendation& rec) {
    if (heap_.size() < k_) {
      heap_.push(rec);
    } else if (ranks_before(rec, heap_.top())) {
      heap_.pop();
      heap_.push(rec);
    }
  }

  bool full() const noexcept { return heap_.size() == k_; }
  const SwapRecommendation& worst() const { return heap_.top(); }

  std::vector<SwapRecommendation> take_sorted() {
    std::vector<SwapRecommendation> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<SwapRecommendation, std::vector<SwapRecommendation>, RankOrder> heap_;
};

void check_inputs(const TeamContext& team, const TargetContext& target, const ObjectSpace& space,
                  const WeightVector& w, std::size_t top_k) {
  if (top_k == 0) throw Error(ErrorCode::kInvalidArgument, "top_k must be positive");
  if (team.member_ids.empty()) throw Error(ErrorCode::kEmptyTeam, "team has no members");
  if (space.empty()) throw Error(ErrorCode::kEmptySpace, "object space is empty");
  detail::require_dimension(space.dimension(), team.aggregate.size(), "team aggregate");
  detail::require_dimension(space.dimension(), target.aggregate.size(), "target aggregate");
  detail::require_dimension(space.dimension(), w.size(), "weight vector");
}

bool eligible(const TeamContext& team, ObjectId swap_out, ObjectId swap_in) {
  return swap_in == swap_out || !team.contains(swap_in);
}

// Fills in the oDis column with the same arithmetic the index uses for its keys.
std::vector<SwapRecommendation> finish(TopK& best, const ObjectSpace& space,
                                       const std::unordered_map<ObjectId, VirtualObject>& virtuals,
                                       const WeightVector& w) {
  std::vector<SwapRecommendation> out = best.take_sorted();
  for (SwapRecommendation& rec : out) {
    const ObjectRecord& cand = space.at(rec.swap_in_id);
    rec.odis = detail::odis_from_attrs(virtuals.at(rec.swap_out_id), cand.attrs, cand.lambda,
                                       w.values());
  }
  return out;
}

}  // namespace

bool ranks_before(const SwapRecommendation& a, const SwapRecommendation& b) noexcept {
  return std::tie(a.new_distance, a.swap_out_id, a.swap_in_id) <
         std::tie(b.new_distance, b.swap_out_id, b.swap_in_id);
}

std::vector<SwapRecommendation> brute_force_rank(const TeamContext& team,
                                                 const TargetContext& target,
                                                 const ObjectSpace& space, const WeightVector& w,
                                                 std::size_t top_k, ScanOptions scan) {
  check_inputs(team, target, space, w, top_k);
  const DiffVector pre = diff(target, team);
  const std::span<const double> weights = w.values();

  TopK best(top_k);
  std::unordered_map<ObjectId, VirtualObject> virtuals;
  for (ObjectId out_id : team.member_ids) {
    const ObjectRecord& member = space.at(out_id);
    virtuals.emplace(out_id, virtual_object(pre, member));

    BlockScan blocks = scan_blocks(space, scan.block_size, scan.io);
    while (auto block = blocks.next()) {
      for (const ObjectRecord& cand : *block) {
        if (!eligible(team, out_id, cand.id)) continue;
        const double dist = detail::exchange_distance(pre.values, member.attrs, member.lambda,
                                                      cand.attrs, cand.lambda, weights);
        best.offer({out_id, cand.id, dist, 0.0});
      }
    }
  }
  return finish(best, space, virtuals, w);
}

std::vector<SwapRecommendation> rtc_star_rank(const TeamContext& team, const TargetContext& target,
                                              const ObjectSpace& space, const WeightVector& w,
                                              const NnIndex& index, std::size_t top_k) {
  check_inputs(team, target, space, w, top_k);
  if (index.fingerprint() != index_fingerprint(space, team, target, w) ||
      index.partitions() != team.member_ids.size() || index.size() != space.size()) {
    throw Error(ErrorCode::kStaleIndex, "index " + fingerprint_hex(index.fingerprint()) +
                                            " was built for a different configuration");
  }

  const DiffVector pre = diff(target, team);
  const std::span<const double> weights = w.values();
  const std::size_t block_size = index.block_size();
  const std::size_t blocks = index.blocks_per_partition();

  struct Stream {
    const ObjectRecord* member = nullptr;
    std::size_t next_block = 0;
    bool active = true;
  };

  TopK best(top_k);
  std::unordered_map<ObjectId, VirtualObject> virtuals;
  std::vector<Stream> streams(index.partitions());

  auto rescore = [&](std::size_t p, std::size_t block) {
    const Stream& s = streams[p];
    for (const IndexEntry& entry : index.read_block(p, block)) {
      const ObjectRecord* cand = space.find(entry.id);
      if (cand == nullptr) {
        throw Error(ErrorCode::kStaleIndex, "index references unknown object " +
                                                std::to_string(entry.id));
      }
      if (!eligible(team, s.member->id, cand->id)) continue;
      const double dist = detail::exchange_distance(pre.values, s.member->attrs, s.member->lambda,
                                                    cand->attrs, cand->lambda, weights);
      best.offer({s.member->id, cand->id, dist, 0.0});
    }
  };

  // The directory holds the best swap stored at or after each block. Once
  // that swap ranks behind the current k-th entry the rest of the run is dead.
  // Distances come from the same kernel, so the comparison is exact.
  auto exhausted = [&](const Stream& s, const BlockBound& rest) {
    const SwapRecommendation& kth = best.worst();
    return std::tie(kth.new_distance, kth.swap_out_id, kth.swap_in_id) <
           std::tie(rest.distance, s.member->id, rest.id);
  };

  const std::size_t initial = std::min(blocks, (top_k + block_size - 1) / block_size);
  for (std::size_t p = 0; p < streams.size(); ++p) {
    Stream& s = streams[p];
    s.member = &space.at(index.member_id(p));
    if (s.member->id != team.member_ids[p]) {
      throw Error(ErrorCode::kStaleIndex, "index partitions do not match the team");
    }
    virtuals.emplace(s.member->id, virtual_object(pre, *s.member));
    index.count_query();
    for (; s.next_block < initial; ++s.next_block) rescore(p, s.next_block);
  }

  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t p = 0; p < streams.size(); ++p) {
      Stream& s = streams[p];
      if (!s.active) continue;
      if (s.next_block >= blocks ||
          (best.full() && exhausted(s, index.remaining_best(p, s.next_block)))) {
        s.active = false;
        continue;
      }
      rescore(p, s.next_block++);
      progress = true;
    }
  }
  return finish(best, space, virtuals, w);
}

CorollaryReport verify_corollary(const TeamContext& team, const TargetContext& target,
                                 const ObjectRecord& swap_out, const ObjectRecord& swap_in,
                                 const WeightVector& w) {
  const VirtualObject v = virtual_object(team, target, swap_out);
  const DiffVector pre = diff(target, team);
  const DiffVector post = post_exchange_diff(pre, swap_out, swap_in);

  CorollaryReport report;
  report.dis_prime = truncated_distance(post, truncating_vector(post), w);
  report.odis = odis(v, normalize(swap_in), w);
  report.lambda_r = swap_out.lambda;
  report.clipped = v.clipped;
  for (std::size_t i = 0; i < pre.values.size(); ++i) {
    if (pre.values[i] < 0.0 && post.values[i] > 0.0) report.strong_flip = true;
  }
  return report;
}

}  // namespace teamrank
