#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "covchan/error.hpp"
#include "covchan/params.hpp"

// Closed-form transmission times for the slotted (basic) and pipelined
// (optimized) cache-eviction channel. All values are in seconds and MB.
namespace covchan {

enum class SchemeVariant { basic, optimized };

inline std::string_view to_string(SchemeVariant v) { return v == SchemeVariant::basic ? "basic" : "optimized"; }

inline constexpr double kDefaultSafetyFraction = 0.10;

/// Per-frame timing agreed between sender and receiver.
struct TimingParams {
  double sender_frame = 0.0;    // t_S
  double receiver_frame = 0.0;  // t_R
  double safety_fraction = kDefaultSafetyFraction;
  double wait_period = 0.0;     // sender idle time for a 0-bit
  double threshold = 0.0;       // receiver decision threshold

  void validate() const {
    if (!(sender_frame > 0.0) || !(receiver_frame > 0.0)) throw ConfigError("frame times must be > 0 s");
    if (!(safety_fraction >= 0.0)) throw ConfigError("safety fraction must be >= 0");
    if (!(wait_period > 0.0)) throw ConfigError("wait period must be > 0 s");
    if (!(threshold > 0.0)) throw ConfigError("threshold must be > 0 s");
  }
};

/// Safety frame added to a nominal transfer time (proportional rule).
inline double t_sav(double nominal, double safety_fraction) {
  if (nominal < 0.0) throw ConfigError("nominal time must be >= 0");
  if (!(safety_fraction >= 0.0)) throw ConfigError("safety fraction must be >= 0");
  return safety_fraction * nominal;
}

inline double t_sav(double nominal, const TimingParams& timing) { return t_sav(nominal, timing.safety_fraction); }

// Time to evict the whole cache from cold: c / l.
inline double eviction_time(const PhysicalParams& p) {
  p.validate();
  return p.cache_mb / p.read_rate;
}

// Time for the receiver's all-miss probe: r / l.
inline double probe_miss_time(const PhysicalParams& p) {
  p.validate();
  return p.receiver_read_mb / p.read_rate;
}

// Time for the receiver's all-hit probe: r / ram_rate (0 with instant hits).
inline double probe_hit_time(const PhysicalParams& p) {
  p.validate();
  return std::isinf(p.ram_rate) ? 0.0 : p.receiver_read_mb / p.ram_rate;
}

/// Default 0-bit wait: c/16 seconds. Empirical fit to the published
/// evaluation rows (2 MB -> 0.125 s ... 64 MB -> 4.0 s).
inline double default_wait_period(const PhysicalParams& p) { return p.cache_mb / 16.0; }

/// General slotted form with explicit frame times.
inline double bit_time_frames(double sender_frame, double receiver_frame, double safety_fraction) {
  return (sender_frame + t_sav(sender_frame, safety_fraction)) +
         (receiver_frame + t_sav(receiver_frame, safety_fraction));
}

inline double bit_time_basic(const PhysicalParams& p, const TimingParams& timing) {
  return bit_time_frames(eviction_time(p), probe_miss_time(p), timing.safety_fraction);
}

inline double bit_time_basic(const PhysicalParams& p, double safety_fraction) {
  return bit_time_frames(eviction_time(p), probe_miss_time(p), safety_fraction);
}

inline double total_time_basic(std::uint64_t n_bits, double bit_time) {
  return static_cast<double>(n_bits) * bit_time;
}

inline double bit_time_optimized(const PhysicalParams& p) {
  p.validate();
  return (p.cache_mb + p.receiver_read_mb) / p.read_rate;
}

/// Pipelined total: n bit periods plus one trailing receiver probe.
inline double total_time_optimized(std::uint64_t n_bits, const PhysicalParams& p) {
  if (n_bits == 0) throw ConfigError("pipelined total time is undefined for an empty message");
  return static_cast<double>(n_bits) * bit_time_optimized(p) + probe_miss_time(p);
}

struct TheoryBreakdown {
  double ones_time = 0.0;
  double zeros_time = 0.0;
  double total = 0.0;
};

inline TheoryBreakdown mixed_message_theoretical_time(std::uint64_t n_ones, std::uint64_t n_zeros,
                                                      double one_bit_time, double wait_period) {
  TheoryBreakdown b;
  b.ones_time = static_cast<double>(n_ones) * one_bit_time;
  b.zeros_time = static_cast<double>(n_zeros) * wait_period;
  b.total = b.ones_time + b.zeros_time;
  return b;
}

/// Calibrates the backing read rate from an observed full-cache eviction.
inline PhysicalParams fit_params_from_observation(double cache_size_mb, double observed_evict_time,
                                                  PhysicalParams base = {}) {
  if (!(cache_size_mb > 0.0) || !(observed_evict_time > 0.0))
    throw ConfigError("cache size and observed eviction time must be > 0");
  base.cache_mb = cache_size_mb;
  base.read_rate = cache_size_mb / observed_evict_time;
  return base;
}

inline double throughput(std::uint64_t n_bits, double total_time) {
  if (!(total_time > 0.0)) throw ConfigError("total time must be > 0 s");
  return static_cast<double>(n_bits) / total_time;
}

/// Optional overrides for the agreed timing; unset fields take defaults
/// derived from the physical parameters.
struct TimingOverrides {
  std::optional<double> sender_frame;
  std::optional<double> receiver_frame;
  std::optional<double> safety_fraction;
  std::optional<double> wait_period;
  std::optional<double> threshold;
};

// Midpoint between the all-hit and all-miss probe times.
inline double default_threshold(const PhysicalParams& p) { return 0.5 * (probe_hit_time(p) + probe_miss_time(p)); }

inline TimingParams resolve_timing(const PhysicalParams& p, const TimingOverrides& o = {}) {
  p.validate();
  TimingParams t;
  t.sender_frame = o.sender_frame.value_or(eviction_time(p));
  t.receiver_frame = o.receiver_frame.value_or(probe_miss_time(p));
  t.safety_fraction = o.safety_fraction.value_or(kDefaultSafetyFraction);
  t.wait_period = o.wait_period.value_or(default_wait_period(p));
  t.threshold = o.threshold.value_or(default_threshold(p));
  t.validate();
  if (o.sender_frame && t.sender_frame < eviction_time(p))
    throw ConfigError("sender frame is shorter than the cache eviction time");
  if (o.receiver_frame && t.receiver_frame < probe_miss_time(p))
    throw ConfigError("receiver frame is shorter than the receiver probe time");
  return t;
}

}  // namespace covchan
