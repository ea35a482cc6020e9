#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <string>
#include <unordered_map>
#include <vector>

#include "covchan/error.hpp"
#include "covchan/params.hpp"

namespace covchan {

struct FileId {
  std::uint32_t value = 0;
  friend bool operator==(FileId, FileId) = default;
  friend auto operator<=>(FileId, FileId) = default;
};

struct CompartmentId {
  std::uint32_t value = 0;
  friend bool operator==(CompartmentId, CompartmentId) = default;
};

struct BlockId {
  FileId file;
  std::uint64_t index = 0;
  friend bool operator==(const BlockId&, const BlockId&) = default;
  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

struct BlockIdHash {
  std::size_t operator()(const BlockId& b) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(b.file.value) << 40) ^ b.index);
  }
};

/// A file owned by one compartment. Its blocks are (id, 0..blocks-1).
struct SimFile {
  FileId id;
  std::uint64_t size_bytes = 0;
  CompartmentId owner;

  std::uint64_t block_count(std::uint64_t block_bytes) const { return size_bytes / block_bytes; }
};

inline SimFile make_file(FileId id, double size_mb, CompartmentId owner, const PhysicalParams& params) {
  if (!is_block_multiple(size_mb, params.block_mb))
    throw ConfigError("file size " + std::to_string(size_mb) + " MB is not a positive whole number of blocks");
  return SimFile{id, mb_to_bytes(size_mb), owner};
}

struct ReadOutcome {
  std::uint64_t hit_blocks = 0;
  std::uint64_t miss_blocks = 0;
  double duration = 0.0;  // seconds, before jitter

  std::uint64_t blocks() const { return hit_blocks + miss_blocks; }
};

enum class EvictionPolicy { lru };

// Shared file-system block cache. Recency list front = most recently used.
class BlockCache {
 public:
  explicit BlockCache(std::uint64_t capacity_blocks, EvictionPolicy policy = EvictionPolicy::lru)
      : capacity_(capacity_blocks), policy_(policy) {
    if (capacity_ == 0) throw ConfigError("cache capacity must be at least one block");
  }

  static BlockCache for_params(const PhysicalParams& params) { return BlockCache(params.capacity_blocks()); }

  std::uint64_t capacity_blocks() const { return capacity_; }
  std::size_t size() const { return index_.size(); }
  EvictionPolicy policy() const { return policy_; }

  bool is_resident(const BlockId& block) const { return index_.contains(block); }

  /// Touches one block. Returns true on a hit. A miss inserts the block and
  /// evicts the least recently used one when the cache is full.
  bool touch(const BlockId& block) {
    if (auto it = index_.find(block); it != index_.end()) {
      recency_.splice(recency_.begin(), recency_, it->second);
      return true;
    }
    if (index_.size() >= capacity_) {
      index_.erase(recency_.back());
      recency_.pop_back();
    }
    recency_.push_front(block);
    index_.emplace(block, recency_.begin());
    return false;
  }

  /// Reads a whole file in ascending block order and reports its cost.
  ReadOutcome read_file(const SimFile& file, const PhysicalParams& params) {
    const std::uint64_t block_bytes = params.block_bytes();
    if (file.size_bytes == 0) throw ConfigError("cannot read a zero-size file");
    if (file.size_bytes % block_bytes != 0) throw ConfigError("file size is not a multiple of the block size");
    if (file.size_bytes > mb_to_bytes(params.backing_store_mb))
      throw ConfigError("file is larger than the backing store");
    if (!(params.read_rate > 0.0) || !(params.ram_rate > 0.0))
      throw ConfigError("read rates must be positive");

    ReadOutcome out;
    const std::uint64_t blocks = file.block_count(block_bytes);
    for (std::uint64_t i = 0; i < blocks; ++i) {
      if (touch(BlockId{file.id, i}))
        ++out.hit_blocks;
      else
        ++out.miss_blocks;
    }
    out.duration = read_cost(out.hit_blocks, out.miss_blocks, params);
    return out;
  }

  /// Sender-side eviction: the file must cover the whole cache.
  ReadOutcome evict_all_via_read(const SimFile& sender_file, const PhysicalParams& params) {
    if (sender_file.size_bytes < capacity_ * params.block_bytes())
      throw ConfigError("sender file is smaller than the cache; full eviction not guaranteed");
    return read_file(sender_file, params);
  }

  static double read_cost(std::uint64_t hits, std::uint64_t misses, const PhysicalParams& params) {
    const double hit_cost = std::isinf(params.ram_rate) ? 0.0 : params.block_mb / params.ram_rate;
    return static_cast<double>(hits) * hit_cost +
           static_cast<double>(misses) * (params.block_mb / params.read_rate);
  }

  /// Resident blocks, most recently used first.
  std::vector<BlockId> resident() const { return {recency_.begin(), recency_.end()}; }

  std::uint64_t resident_blocks_of(FileId file) const {
    std::uint64_t n = 0;
    for (const auto& b : recency_) n += (b.file == file);
    return n;
  }

  void clear() {
    recency_.clear();
    index_.clear();
  }

 private:
  std::uint64_t capacity_;
  EvictionPolicy policy_;
  std::list<BlockId> recency_;
  std::unordered_map<BlockId, std::list<BlockId>::iterator, BlockIdHash> index_;
};

}  // namespace covchan
