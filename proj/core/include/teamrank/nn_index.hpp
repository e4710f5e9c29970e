#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamrank/model.hpp"

namespace teamrank {

struct IoSnapshot {
  std::uint64_t blocks_read = 0;
  std::uint64_t blocks_written = 0;
  std::uint64_t queries_served = 0;

  friend bool operator==(const IoSnapshot&, const IoSnapshot&) = default;
};

// Block I/O counters. Increments are atomic so concurrent readers never lose counts.
class IoStats {
 public:
  void add_read(std::uint64_t n = 1) noexcept { blocks_read_.fetch_add(n, std::memory_order_relaxed); }
  void add_written(std::uint64_t n = 1) noexcept {
    blocks_written_.fetch_add(n, std::memory_order_relaxed);
  }
  void add_query() noexcept { queries_served_.fetch_add(1, std::memory_order_relaxed); }

  IoSnapshot snapshot() const noexcept {
    return {blocks_read_.load(std::memory_order_relaxed),
            blocks_written_.load(std::memory_order_relaxed),
            queries_served_.load(std::memory_order_relaxed)};
  }
  void reset() noexcept {
    blocks_read_.store(0);
    blocks_written_.store(0);
    queries_served_.store(0);
  }

 private:
  std::atomic<std::uint64_t> blocks_read_{0};
  std::atomic<std::uint64_t> blocks_written_{0};
  std::atomic<std::uint64_t> queries_served_{0};
};

// Sequential block-at-a-time scan over a record array, one counted read per block.
class BlockScan {
 public:
  BlockScan(std::span<const ObjectRecord> records, std::size_t block_size, IoStats* io = nullptr);

  std::size_t block_count() const noexcept;
  std::optional<std::span<const ObjectRecord>> next();

 private:
  std::span<const ObjectRecord> records_;
  std::size_t block_size_;
  std::size_t offset_ = 0;
  IoStats* io_;
};

// Throws InvalidArgument when block_size is 0.
BlockScan scan_blocks(const ObjectSpace& space, std::size_t block_size, IoStats* io = nullptr);

struct IndexEntry {
  double key = 0.0;
  ObjectId id = 0;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

// Best remaining swap of a partition from some block onward, in ranking
// order: smallest exact post-exchange distance, then smallest id. Team
// members other than the partition's own member are not counted.
struct BlockBound {
  double distance = 0.0;
  ObjectId id = 0;

  friend bool operator==(const BlockBound&, const BlockBound&) = default;
};

// Digest of everything an index depends on: space content, team, target and weights.
std::uint64_t index_fingerprint(const ObjectSpace& space, const TeamContext& team,
                                const TargetContext& target, const WeightVector& w);

std::string fingerprint_hex(std::uint64_t fingerprint);

// One sorted run of (oDis, id) per team member, persisted as
// `<fingerprint>.<member_index>.idx` files:
//
//   header   64 bytes: magic "TRNNIDX1", u32 version, u32 d, u32 m,
//            u32 member_index, u64 n, u64 B, u64 fingerprint, u64 member_id, u64 0
//   data     ceil(n/B) blocks of up to B records {f64 key, u64 id}, sorted by key;
//            equal keys by exact post-exchange distance, then id
//   fences   one {f64 key, u64 id, f64 distance, u64 id} per block: the
//            block's first entry, then the BlockBound of that block onward
//            (+inf and max id when nothing eligible remains)
//
// All integers and floats are little-endian. The fence directory is loaded at
// open time and stays memory resident, like the inner levels of a B+-tree
// carrying a subtree aggregate; only data block reads count as query I/O.
class NnIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;
  static constexpr std::size_t kHeaderBytes = 64;
  static constexpr std::size_t kEntryBytes = 16;
  static constexpr std::size_t kFenceBytes = 32;

  // Throws InvalidArgument (block_size 0), EmptySpace, IoError.
  static NnIndex build(const ObjectSpace& space, const TeamContext& team,
                       const TargetContext& target, const WeightVector& w,
                       std::size_t block_size, const std::filesystem::path& directory);

  // Opens every partition file of a previously built index. Throws IoError.
  static NnIndex open(const std::filesystem::path& directory, std::uint64_t fingerprint);

  static bool exists(const std::filesystem::path& directory, std::uint64_t fingerprint);

  NnIndex(NnIndex&&) noexcept;
  NnIndex& operator=(NnIndex&&) noexcept;
  ~NnIndex();

  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  std::size_t partitions() const noexcept;
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return d_; }
  std::size_t blocks_per_partition() const noexcept;
  ObjectId member_id(std::size_t partition) const;
  std::filesystem::path partition_path(std::size_t partition) const;

  // Reads one data block from disk (one counted read). Throws InvalidPartition.
  std::vector<IndexEntry> read_block(std::size_t partition, std::size_t block) const;

  // First entry of a block, from the memory-resident fence directory.
  IndexEntry fence(std::size_t partition, std::size_t block) const;
  // Best swap stored in this block or any later one, from the fence directory.
  BlockBound remaining_best(std::size_t partition, std::size_t block) const;

  // The k smallest-key entries of a partition; reads exactly ceil(min(k, n)/B) blocks.
  // Throws InvalidPartition, InvalidArgument (k == 0).
  std::vector<IndexEntry> query_min(std::size_t partition, std::size_t k) const;

  const IoStats& query_io() const noexcept { return *query_io_; }
  const IoStats& build_io() const noexcept { return *build_io_; }
  // Query-phase data blocks read from one partition; sums to query_io().
  std::uint64_t partition_blocks_read(std::size_t partition) const;
  void reset_query_io() const noexcept;
  void count_query() const noexcept { query_io_->add_query(); }

 private:
  struct Partition;

  NnIndex();
  const Partition& partition(std::size_t index) const;

  std::filesystem::path directory_;
  std::uint64_t fingerprint_ = 0;
  std::size_t block_size_ = 0;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<Partition> partitions_;
  std::unique_ptr<IoStats> query_io_;
  std::unique_ptr<IoStats> build_io_;
};

}  // namespace teamrank
