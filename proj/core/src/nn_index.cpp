#include "teamrank/nn_index.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <memory>
#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <utility>

#include "teamrank/digest.hpp"
#include "teamrank/error.hpp"
#include "teamrank/virtual_object.hpp"

namespace teamrank {

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'R', 'N', 'N', 'I', 'D', 'X', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_entry(std::string& out, const IndexEntry& e) {
  put_u64(out, std::bit_cast<std::uint64_t>(e.key));
  put_u64(out, e.id);
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

IndexEntry get_entry(const unsigned char* p) {
  return {std::bit_cast<double>(get_u64(p)), get_u64(p + 8)};
}

bool better(const BlockBound& a, const BlockBound& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::string partition_file_name(std::uint64_t fingerprint, std::size_t member_index) {
  return fingerprint_hex(fingerprint) + "." + std::to_string(member_index) + ".idx";
}

void read_exact(int fd, unsigned char* buffer, std::size_t bytes, std::uint64_t offset,
                const std::filesystem::path& path) {
  std::size_t done = 0;
  while (done < bytes) {
    const ssize_t got = ::pread(fd, buffer + done, bytes - done, static_cast<off_t>(offset + done));
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) {
      throw Error(ErrorCode::kIoError, "short read from " + path.string());
    }
    done += static_cast<std::size_t>(got);
  }
}

}  // namespace

BlockScan::BlockScan(std::span<const ObjectRecord> records, std::size_t block_size, IoStats* io)
    : records_(records), block_size_(block_size), io_(io) {
  if (block_size_ == 0) throw Error(ErrorCode::kInvalidArgument, "block size must be positive");
}

std::size_t BlockScan::block_count() const noexcept { return ceil_div(records_.size(), block_size_); }

std::optional<std::span<const ObjectRecord>> BlockScan::next() {
  if (offset_ >= records_.size()) return std::nullopt;
  const std::size_t len = std::min(block_size_, records_.size() - offset_);
  auto block = records_.subspan(offset_, len);
  offset_ += len;
  if (io_ != nullptr) io_->add_read();
  return block;
}

BlockScan scan_blocks(const ObjectSpace& space, std::size_t block_size, IoStats* io) {
  return BlockScan(space.records(), block_size, io);
}

std::uint64_t index_fingerprint(const ObjectSpace& space, const TeamContext& team,
                                const TargetContext& target, const WeightVector& w) {
  Digest digest;
  digest.add(space.version());
  digest.add(static_cast<std::uint64_t>(team.member_ids.size()));
  for (ObjectId id : team.member_ids) digest.add(id);
  digest.add(std::span<const double>(team.aggregate));
  digest.add(target.team_id).add(std::span<const double>(target.aggregate));
  digest.add(w.values());
  return digest.value();
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[fingerprint & 0xf];
    fingerprint >>= 4;
  }
  return out;
}

struct NnIndex::Partition {
  ObjectId member_id = 0;
  std::filesystem::path path;
  int fd = -1;
  std::vector<IndexEntry> fences;
  std::vector<BlockBound> bounds;
  std::unique_ptr<std::atomic<std::uint64_t>> reads = std::make_unique<std::atomic<std::uint64_t>>(0);

  Partition() = default;
  Partition(Partition&& other) noexcept
      : member_id(other.member_id),
        path(std::move(other.path)),
        fd(std::exchange(other.fd, -1)),
        fences(std::move(other.fences)),
        bounds(std::move(other.bounds)),
        reads(std::move(other.reads)) {}
  Partition& operator=(Partition&& other) noexcept {
    if (this != &other) {
      close();
      member_id = other.member_id;
      path = std::move(other.path);
      fd = std::exchange(other.fd, -1);
      fences = std::move(other.fences);
      bounds = std::move(other.bounds);
      reads = std::move(other.reads);
    }
    return *this;
  }
  ~Partition() { close(); }

  void close() noexcept {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

NnIndex::NnIndex()
    : query_io_(std::make_unique<IoStats>()), build_io_(std::make_unique<IoStats>()) {}
NnIndex::NnIndex(NnIndex&&) noexcept = default;
NnIndex& NnIndex::operator=(NnIndex&&) noexcept = default;
NnIndex::~NnIndex() = default;

std::size_t NnIndex::partitions() const noexcept { return partitions_.size(); }

std::size_t NnIndex::blocks_per_partition() const noexcept { return ceil_div(n_, block_size_); }

const NnIndex::Partition& NnIndex::partition(std::size_t index) const {
  if (index >= partitions_.size()) {
    throw Error(ErrorCode::kInvalidPartition, "partition " + std::to_string(index) + " of " +
                                                  std::to_string(partitions_.size()));
  }
  return partitions_[index];
}

ObjectId NnIndex::member_id(std::size_t p) const { return partition(p).member_id; }

std::filesystem::path NnIndex::partition_path(std::size_t p) const { return partition(p).path; }

bool NnIndex::exists(const std::filesystem::path& directory, std::uint64_t fingerprint) {
  return std::filesystem::exists(directory / partition_file_name(fingerprint, 0));
}

NnIndex NnIndex::build(const ObjectSpace& space, const TeamContext& team,
                       const TargetContext& target, const WeightVector& w,
                       std::size_t block_size, const std::filesystem::path& directory) {
  if (block_size == 0) throw Error(ErrorCode::kInvalidArgument, "block size must be positive");
  if (space.empty()) throw Error(ErrorCode::kEmptySpace, "cannot index an empty object space");
  detail::require_dimension(space.dimension(), w.size(), "weight vector");
  detail::require_dimension(space.dimension(), target.aggregate.size(), "target aggregate");

  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + directory.string() + ": " + ec.message());

  const std::uint64_t fingerprint = index_fingerprint(space, team, target, w);
  const DiffVector pre = diff(target, team);
  const std::size_t n = space.size();
  const std::size_t m = team.member_ids.size();
  const std::size_t blocks = ceil_div(n, block_size);
  std::uint64_t written = 0;

  // Each entry carries its exact post-exchange distance: equal keys are
  // ordered by it (then id), and the fence directory keeps its suffix minimum.
  // Same kernel as the ranking code, so everything compares bit for bit.
  struct Scored {
    IndexEntry entry;
    double distance;
    bool eligible;
  };
  std::vector<Scored> scored(n);
  std::vector<IndexEntry> entries(n);
  for (std::size_t p = 0; p < m; ++p) {
    const ObjectRecord& member = space.at(team.member_ids[p]);
    const VirtualObject v = virtual_object(pre, member);

    std::size_t k = 0;
    for (const ObjectRecord& rec : space.records()) {
      scored[k++] = {{detail::odis_from_attrs(v, rec.attrs, rec.lambda, w.values()), rec.id},
                     detail::exchange_distance(pre.values, member.attrs, member.lambda, rec.attrs,
                                               rec.lambda, w.values()),
                     rec.id == member.id || !team.contains(rec.id)};
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.entry.key != b.entry.key) return a.entry.key < b.entry.key;
      if (a.distance != b.distance) return a.distance < b.distance;
      return a.entry.id < b.entry.id;
    });
    for (std::size_t i = 0; i < n; ++i) entries[i] = scored[i].entry;

    std::vector<BlockBound> bounds(blocks);
    BlockBound running{std::numeric_limits<double>::infinity(), std::numeric_limits<ObjectId>::max()};
    for (std::size_t b = blocks; b-- > 0;) {
      for (std::size_t i = b * block_size; i < std::min(n, (b + 1) * block_size); ++i) {
        if (!scored[i].eligible) continue;
        const BlockBound here{scored[i].distance, scored[i].entry.id};
        if (better(here, running)) running = here;
      }
      bounds[b] = running;
    }

    std::string bytes;
    bytes.reserve(kHeaderBytes + n * kEntryBytes + blocks * kFenceBytes);
    bytes.append(kMagic.data(), kMagic.size());
    put_u32(bytes, kFormatVersion);
    put_u32(bytes, static_cast<std::uint32_t>(space.dimension()));
    put_u32(bytes, static_cast<std::uint32_t>(m));
    put_u32(bytes, static_cast<std::uint32_t>(p));
    put_u64(bytes, n);
    put_u64(bytes, block_size);
    put_u64(bytes, fingerprint);
    put_u64(bytes, member.id);
    put_u64(bytes, 0);
    for (const IndexEntry& e : entries) put_entry(bytes, e);
    for (std::size_t b = 0; b < blocks; ++b) {
      put_entry(bytes, entries[b * block_size]);
      put_u64(bytes, std::bit_cast<std::uint64_t>(bounds[b].distance));
      put_u64(bytes, bounds[b].id);
    }

    const auto path = directory / partition_file_name(fingerprint, p);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot rename " + tmp.string() + ": " + ec.message());
    written += blocks;
  }

  NnIndex index = open(directory, fingerprint);
  index.build_io_->add_written(written);
  return index;
}

NnIndex NnIndex::open(const std::filesystem::path& directory, std::uint64_t fingerprint) {
  NnIndex index;
  index.directory_ = directory;
  index.fingerprint_ = fingerprint;

  std::size_t m = 1;
  for (std::size_t p = 0; p < m; ++p) {
    Partition part;
    part.path = directory / partition_file_name(fingerprint, p);
    part.fd = ::open(part.path.c_str(), O_RDONLY | O_CLOEXEC);
    if (part.fd < 0) throw Error(ErrorCode::kIoError, "cannot open " + part.path.string());

    std::array<unsigned char, kHeaderBytes> header{};
    read_exact(part.fd, header.data(), header.size(), 0, part.path);
    if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
      throw Error(ErrorCode::kIoError, part.path.string() + " is not an index file");
    }
    if (get_u32(header.data() + 8) != kFormatVersion) {
      throw Error(ErrorCode::kIoError, part.path.string() + " has an unsupported format version");
    }
    const std::size_t d = get_u32(header.data() + 12);
    const std::size_t parts = get_u32(header.data() + 16);
    const std::size_t member_index = get_u32(header.data() + 20);
    const std::size_t n = get_u64(header.data() + 24);
    const std::size_t block_size = get_u64(header.data() + 32);
    const std::uint64_t stored = get_u64(header.data() + 40);
    part.member_id = get_u64(header.data() + 48);

    if (p == 0) {
      m = parts;
      index.d_ = d;
      index.n_ = n;
      index.block_size_ = block_size;
    }
    if (stored != fingerprint || member_index != p || parts != m || n != index.n_ ||
        block_size != index.block_size_ || d != index.d_ || block_size == 0 || n == 0) {
      throw Error(ErrorCode::kIoError, part.path.string() + " has an inconsistent header");
    }

    const std::size_t blocks = ceil_div(n, block_size);
    std::vector<unsigned char> directory_bytes(blocks * kFenceBytes);
    read_exact(part.fd, directory_bytes.data(), directory_bytes.size(),
               kHeaderBytes + n * kEntryBytes, part.path);
    part.fences.reserve(blocks);
    part.bounds.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      const unsigned char* rec = directory_bytes.data() + b * kFenceBytes;
      part.fences.push_back(get_entry(rec));
      const IndexEntry bound = get_entry(rec + kEntryBytes);
      part.bounds.push_back({bound.key, bound.id});
    }
    index.build_io_->add_read();
    index.partitions_.push_back(std::move(part));
  }
  return index;
}

std::vector<IndexEntry> NnIndex::read_block(std::size_t p, std::size_t block) const {
  const Partition& part = partition(p);
  if (block >= part.fences.size()) {
    throw Error(ErrorCode::kInvalidArgument, "block " + std::to_string(block) + " out of range");
  }
  const std::size_t first = block * block_size_;
  const std::size_t count = std::min(block_size_, n_ - first);
  std::vector<unsigned char> raw(count * kEntryBytes);
  read_exact(part.fd, raw.data(), raw.size(), kHeaderBytes + first * kEntryBytes, part.path);
  query_io_->add_read();
  part.reads->fetch_add(1, std::memory_order_relaxed);

  std::vector<IndexEntry> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = get_entry(raw.data() + i * kEntryBytes);
  return out;
}

IndexEntry NnIndex::fence(std::size_t p, std::size_t block) const {
  const Partition& part = partition(p);
  if (block >= part.fences.size()) {
    throw Error(ErrorCode::kInvalidArgument, "block " + std::to_string(block) + " out of range");
  }
  return part.fences[block];
}

std::uint64_t NnIndex::partition_blocks_read(std::size_t p) const {
  return partition(p).reads->load(std::memory_order_relaxed);
}

void NnIndex::reset_query_io() const noexcept {
  query_io_->reset();
  for (const Partition& part : partitions_) part.reads->store(0);
}

BlockBound NnIndex::remaining_best(std::size_t p, std::size_t block) const {
  const Partition& part = partition(p);
  if (block >= part.bounds.size()) {
    throw Error(ErrorCode::kInvalidArgument, "block " + std::to_string(block) + " out of range");
  }
  return part.bounds[block];
}

std::vector<IndexEntry> NnIndex::query_min(std::size_t p, std::size_t k) const {
  partition(p);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  k = std::min(k, n_);
  std::vector<IndexEntry> out;
  out.reserve(k);
  for (std::size_t block = 0; out.size() < k; ++block) {
    for (const IndexEntry& e : read_block(p, block)) {
      if (out.size() == k) break;
      out.push_back(e);
    }
  }
  query_io_->add_query();
  return out;
}

}  // namespace teamrank
