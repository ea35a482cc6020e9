#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "covchan/error.hpp"

namespace covchan {

// Simulated time. Integer nanoseconds keep long runs free of float drift.
using Duration = std::chrono::nanoseconds;

inline constexpr double kBlockMb = 0.5;  // 512 KB blocks
inline constexpr std::uint64_t kBytesPerMb = 1024ull * 1024ull;
inline constexpr double kInstantHits = std::numeric_limits<double>::infinity();

inline Duration from_seconds(double seconds) {
  if (!std::isfinite(seconds)) throw ConfigError("non-finite duration");
  return Duration{std::llround(seconds * 1e9)};
}

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-9; }

inline std::uint64_t mb_to_bytes(double mb) {
  return static_cast<std::uint64_t>(std::llround(mb * static_cast<double>(kBytesPerMb)));
}

// True when `mb` is a positive whole number of blocks of size `block_mb`.
inline bool is_block_multiple(double mb, double block_mb) {
  if (!(mb > 0.0) || !(block_mb > 0.0)) return false;
  const double blocks = mb / block_mb;
  return std::abs(blocks - std::round(blocks)) < 1e-9;
}

/// Physical storage characteristics shared by every compartment.
///
/// `cache_mb` is the shared block cache size (c), `read_rate` the backing
/// medium throughput (l, MB/s), `ram_rate` the throughput of a cache hit
/// (MB/s, may be `kInstantHits`) and `receiver_read_mb` the size of the
/// receiver's probe file.
struct PhysicalParams {
  double cache_mb = 32.0;
  double read_rate = 7.0;
  double ram_rate = 3000.0;
  double receiver_read_mb = 1.0;
  double block_mb = kBlockMb;
  double backing_store_mb = 1024.0 * 1024.0;

  std::uint64_t block_bytes() const { return mb_to_bytes(block_mb); }

  std::uint64_t capacity_blocks() const {
    return static_cast<std::uint64_t>(std::floor(cache_mb / block_mb + 1e-9));
  }

  void validate() const {
    if (!(cache_mb > 0.0)) throw ConfigError("cache size must be > 0 MB");
    if (!(read_rate > 0.0) || !std::isfinite(read_rate))
      throw ConfigError("backing read rate must be a positive finite MB/s value");
    if (!(ram_rate > read_rate)) throw ConfigError("ram rate must exceed backing read rate");
    if (!(block_mb > 0.0)) throw ConfigError("block size must be > 0 MB");
    if (!is_block_multiple(receiver_read_mb, block_mb))
      throw ConfigError("receiver read size must be a positive whole number of blocks");
    if (!(backing_store_mb > 0.0)) throw ConfigError("backing store size must be > 0 MB");
  }
};

}  // namespace covchan
