#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <string_view>
#include <vector>

#include "covchan/cache_model.hpp"
#include "covchan/channel_codec.hpp"
#include "covchan/error.hpp"
#include "covchan/params.hpp"
#include "covchan/timing_model.hpp"

// Discrete-event simulation of the cache-eviction channel on a virtual clock.
//
// Model summary:
//  * One shared LRU block cache and one backing device. A read applies its
//    cache effects at the instant it is issued. Reads that miss are served
//    by the device in issue order; pure hits bypass it.
//  * Each physical read duration is scaled by a seeded factor drawn
//    uniformly from [1 - jitter, 1 + jitter].
//  * The receiver warms its file at t = 0; the sender's first frame starts
//    one nominal receiver frame later.
//  * basic: fixed slots of (t_S + t_sav) + (t_R + t_sav); the receiver probes
//    at the end of the sender frame.
//  * optimized: a 1-bit frame is the eviction followed by the receiver's
//    probe (which blocks behind the eviction on the shared device); a 0-bit
//    frame is the fixed wait plus one nominal receiver frame. The receiver
//    issues its probe min(wait, t_S) into each frame.
namespace covchan {

enum class Actor : std::uint8_t { disruptor = 0, sender = 1, receiver = 2 };

inline std::string_view to_string(Actor a) {
  switch (a) {
    case Actor::disruptor: return "disruptor";
    case Actor::sender: return "sender";
    case Actor::receiver: return "receiver";
  }
  return "?";
}

enum class Action : std::uint8_t { warm_up, evict, wait, gap, probe, disrupt };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::warm_up: return "warm_up";
    case Action::evict: return "evict";
    case Action::wait: return "wait";
    case Action::gap: return "gap";
    case Action::probe: return "probe";
    case Action::disrupt: return "disrupt";
  }
  return "?";
}

struct TraceEvent {
  Duration time{0};
  Actor actor = Actor::sender;
  Action action = Action::wait;
  Duration duration{0};
  std::uint64_t blocks_touched = 0;
  std::uint64_t miss_blocks = 0;

  Duration end() const { return time + duration; }
};

struct DisruptorConfig {
  double interval = 1.0;      // seconds between ticks
  double file_mb = 1.0;
  double start_offset = 0.0;  // seconds

  void validate(const PhysicalParams& p) const {
    if (!(interval > 0.0)) throw ConfigError("disruptor interval must be > 0 s");
    if (!is_block_multiple(file_mb, p.block_mb))
      throw ConfigError("disruptor file must be a positive whole number of blocks");
    if (file_mb > p.cache_mb + 1e-12) throw ConfigError("disruptor file is larger than the cache");
    if (!(start_offset >= 0.0)) throw ConfigError("disruptor start offset must be >= 0 s");
  }
};

struct ScenarioConfig {
  PhysicalParams physical;
  TimingOverrides timing;
  SchemeVariant variant = SchemeVariant::optimized;
  BitMessage message;
  Coding coding = Coding::none;
  double jitter_fraction = 0.0;
  std::uint64_t rng_seed = 1;
  std::optional<DisruptorConfig> disruptor;
  double per_bit_overhead = 0.0;  // seconds added to every channel bit
  std::optional<double> divergence_tolerance;

  TimingParams resolved_timing() const { return resolve_timing(physical, timing); }

  // Default: half of one block-miss time.
  double resolved_tolerance() const {
    return divergence_tolerance.value_or(physical.block_mb / (2.0 * physical.read_rate));
  }

  void validate() const {
    physical.validate();
    (void)resolved_timing();
    if (!is_block_multiple(physical.cache_mb, physical.block_mb))
      throw ConfigError("cache size must be a whole number of blocks");
    if (physical.receiver_read_mb > physical.cache_mb)
      throw ConfigError("receiver file is larger than the cache");
    if (!(jitter_fraction >= 0.0) || !(jitter_fraction < 0.5))
      throw ConfigError("jitter fraction must lie in [0, 0.5)");
    if (!(per_bit_overhead >= 0.0)) throw ConfigError("per-bit overhead must be >= 0 s");
    if (divergence_tolerance && !(*divergence_tolerance >= 0.0))
      throw ConfigError("divergence tolerance must be >= 0 s");
    if (disruptor) disruptor->validate(physical);
    if (variant == SchemeVariant::optimized && message.empty())
      throw ConfigError("the pipelined scheme needs a non-empty message");
  }
};

struct ChannelMetrics {
  Duration total_time{0};
  Duration transmission_time{0};  // slot span (basic) or full run (optimized)
  double throughput = 0.0;        // decoded message bits per second
  std::size_t bit_errors = 0;
  double ber = 0.0;
  std::size_t channel_bit_errors = 0;
  Duration divergence_max{0};
  std::size_t adjustments = 0;
};

struct SimulationTrace {
  ScenarioConfig config;
  TimingParams timing;
  BitMessage channel_bits;
  std::vector<TraceEvent> events;
  std::vector<SlotRecord> slots;
  BitMessage decoded_channel;
  BitMessage decoded_message;
  ChannelMetrics metrics;
};

/// Shared cache plus backing device plus the jitter source.
class SharedMedium {
 public:
  struct Served {
    ReadOutcome outcome;
    Duration issued{0};
    Duration completed{0};
  };

  SharedMedium(PhysicalParams params, double jitter_fraction, std::uint64_t seed)
      : params_(params), cache_(BlockCache::for_params(params)), jitter_(jitter_fraction), rng_(seed) {}

  Served read(Duration now, const SimFile& file) {
    Served s;
    s.issued = now;
    s.outcome = cache_.read_file(file, params_);
    const Duration busy = from_seconds(s.outcome.duration * jitter_factor());
    Duration start = now;
    if (s.outcome.miss_blocks > 0) {
      start = std::max(now, device_free_);
      device_free_ = start + busy;
    }
    s.completed = start + busy;
    return s;
  }

  BlockCache& cache() { return cache_; }
  const BlockCache& cache() const { return cache_; }
  const PhysicalParams& params() const { return params_; }
  Duration device_free_at() const { return device_free_; }

 private:
  double jitter_factor() {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return 1.0 + jitter_ * (2.0 * u - 1.0);
  }

  PhysicalParams params_;
  BlockCache cache_;
  double jitter_;
  std::mt19937_64 rng_;
  Duration device_free_{0};
};

struct ProbeResult {
  SlotRecord slot;
  SharedMedium::Served served;
};

/// Receiver measurement: reads its file through the cache (re-warming it)
/// and decodes the elapsed time against the threshold.
inline ProbeResult receiver_probe(Duration clock, SharedMedium& medium, const SimFile& receiver_file,
                                  Duration threshold, std::size_t slot_index = 0,
                                  std::optional<Bit> sent_bit = std::nullopt) {
  ProbeResult r;
  r.served = medium.read(clock, receiver_file);
  r.slot.slot_index = slot_index;
  r.slot.sent_bit = sent_bit;
  r.slot.issued_at = clock;
  r.slot.measured = r.served.completed - clock;
  r.slot.threshold = threshold;
  r.slot.decoded_bit = demodulate(r.slot.measured, threshold);
  return r;
}

struct TickResult {
  TraceEvent event;
  Duration next_tick{0};
};

/// One disruptor pass: read its file through the shared cache and schedule
/// the next tick one interval later (never before this read completes).
inline TickResult woodpecker_tick(Duration clock, SharedMedium& medium, const SimFile& disruptor_file,
                                  const DisruptorConfig& dconf, std::uint64_t tick_index = 0) {
  const auto served = medium.read(clock, disruptor_file);
  TickResult t;
  t.event = TraceEvent{clock, Actor::disruptor, Action::disrupt, served.completed - clock,
                       served.outcome.blocks(), served.outcome.miss_blocks};
  const Duration nominal = from_seconds(dconf.start_offset + static_cast<double>(tick_index + 1) * dconf.interval);
  t.next_tick = std::max(nominal, served.completed);
  return t;
}

/// Running sender/receiver misalignment for the pipelined scheme.
class DivergenceTracker {
 public:
  explicit DivergenceTracker(Duration tolerance) : tolerance_(tolerance) {}

  struct Correction {
    std::size_t bit = 0;
    Duration amount{0};  // added to the sender's next wait
  };

  // `divergence` = sender frame start - receiver frame start for `bit`.
  void observe(std::size_t bit, Duration divergence) {
    const Duration mag = divergence < Duration{0} ? -divergence : divergence;
    max_abs_ = std::max(max_abs_, mag);
    if (mag > tolerance_) {
      pending_ = Correction{bit, -divergence};
      ++adjustments_;
    }
  }

  std::optional<Correction> take(std::size_t bit) {
    if (!pending_ || pending_->bit != bit) return std::nullopt;
    auto c = pending_;
    pending_.reset();
    return c;
  }

  Duration tolerance() const { return tolerance_; }
  Duration max_abs() const { return max_abs_; }
  std::size_t adjustments() const { return adjustments_; }

 private:
  Duration tolerance_;
  Duration max_abs_{0};
  std::size_t adjustments_ = 0;
  std::optional<Correction> pending_;
};

struct DivergenceAdjustment {
  std::vector<Duration> sender_starts;  // after adjustment
  std::vector<Duration> divergence;     // post-adjustment, per bit
  std::vector<std::size_t> adjusted_bits;
  Duration max_abs_before{0};
};

/// Re-aligns a sender slot schedule to a receiver schedule: whenever the
/// running divergence exceeds `tolerance`, the sender's wait is changed so
/// that the slot starts on the receiver's grid; later slots keep the shift.
inline DivergenceAdjustment divergence_adjust(const std::vector<Duration>& sender_starts,
                                              const std::vector<Duration>& receiver_starts, Duration tolerance) {
  if (sender_starts.size() != receiver_starts.size())
    throw ConfigError("sender and receiver schedules differ in length");
  DivergenceAdjustment out;
  Duration shift{0};
  for (std::size_t k = 0; k < sender_starts.size(); ++k) {
    Duration s = sender_starts[k] + shift;
    const Duration d = s - receiver_starts[k];
    const Duration mag = d < Duration{0} ? -d : d;
    out.max_abs_before = std::max(out.max_abs_before, mag);
    if (mag > tolerance) {
      shift -= d;
      s = receiver_starts[k];
      out.adjusted_bits.push_back(k);
    }
    out.sender_starts.push_back(s);
    out.divergence.push_back(s - receiver_starts[k]);
  }
  return out;
}

namespace detail {

enum class Step : std::uint8_t { warm_up, sender_start, sender_end, frame_start, probe, probe_end, disrupt };

struct Pending {
  Duration time;
  Actor actor;
  std::uint64_t seq;
  Step step;
  std::size_t index;

  // Min-heap order: time, then actor priority, then insertion.
  bool operator>(const Pending& o) const {
    if (time != o.time) return time > o.time;
    if (actor != o.actor) return actor > o.actor;
    return seq > o.seq;
  }
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& config)
      : cfg_(config),
        timing_((config.validate(), config.resolved_timing())),
        medium_(config.physical, config.jitter_fraction, config.rng_seed),
        tracker_(from_seconds(config.resolved_tolerance())) {
    const auto& p = cfg_.physical;
    sender_file_ = make_file(FileId{1}, p.cache_mb, CompartmentId{1}, p);
    receiver_file_ = make_file(FileId{2}, p.receiver_read_mb, CompartmentId{2}, p);
    if (cfg_.disruptor) disruptor_file_ = make_file(FileId{3}, cfg_.disruptor->file_mb, CompartmentId{3}, p);

    bits_ = encode(cfg_.message, cfg_.coding);
    threshold_ = from_seconds(timing_.threshold);
    t_s_ = from_seconds(timing_.sender_frame);
    t_r_ = from_seconds(timing_.receiver_frame);
    wait_ = from_seconds(timing_.wait_period);
    overhead_ = from_seconds(cfg_.per_bit_overhead);
    sender_frame_ = from_seconds(timing_.sender_frame + t_sav(timing_.sender_frame, timing_));
    receiver_frame_ = from_seconds(timing_.receiver_frame + t_sav(timing_.receiver_frame, timing_));
    slot_ = sender_frame_ + receiver_frame_ + overhead_;
    probe_offset_ = std::min(wait_, t_s_);
    origin_ = t_r_;

    const std::size_t n = bits_.size();
    sender_starts_.assign(n, std::nullopt);
    receiver_starts_.assign(n, std::nullopt);
    diverged_.assign(n, false);
    slots_.resize(n);
  }

  SimulationTrace run() {
    const std::size_t n = bits_.size();
    sender_done_ = (n == 0);
    receiver_done_ = false;

    schedule(Duration{0}, Actor::receiver, Step::warm_up, 0);
    if (n > 0) schedule(origin_, Actor::sender, Step::sender_start, 0);
    if (cfg_.disruptor) schedule(from_seconds(cfg_.disruptor->start_offset), Actor::disruptor, Step::disrupt, 0);

    while (!queue_.empty() && !(sender_done_ && receiver_done_)) {
      const Pending ev = queue_.top();
      queue_.pop();
      dispatch(ev);
    }
    return finish();
  }

 private:
  bool basic() const { return cfg_.variant == SchemeVariant::basic; }

  void schedule(Duration t, Actor a, Step s, std::size_t index) { queue_.push(Pending{t, a, seq_++, s, index}); }

  void log(TraceEvent e) { events_.push_back(e); }

  void log_read(Duration now, Actor a, Action act, const SharedMedium::Served& s) {
    log(TraceEvent{now, a, act, s.completed - now, s.outcome.blocks(), s.outcome.miss_blocks});
  }

  void dispatch(const Pending& ev) {
    switch (ev.step) {
      case Step::warm_up: on_warm_up(ev.time); break;
      case Step::sender_start: on_sender_start(ev.time, ev.index); break;
      case Step::sender_end: on_sender_end(ev.time, ev.index); break;
      case Step::frame_start: on_frame_start(ev.time, ev.index); break;
      case Step::probe: on_probe(ev.time, ev.index); break;
      case Step::probe_end: on_probe_end(ev.time, ev.index); break;
      case Step::disrupt: on_disrupt(ev.time, ev.index); break;
    }
  }

  void on_warm_up(Duration now) {
    const auto s = medium_.read(now, receiver_file_);
    log_read(now, Actor::receiver, Action::warm_up, s);
    receiver_busy_ = s.completed;
    if (bits_.empty()) {
      receiver_done_ = true;
      return;
    }
    if (basic())
      schedule(std::max(origin_ + sender_frame_, receiver_busy_), Actor::receiver, Step::probe, 0);
    else
      schedule(s.completed, Actor::receiver, Step::frame_start, 0);
  }

  void on_sender_start(Duration now, std::size_t k) {
    sender_starts_[k] = now;
    try_divergence(k);
    const SenderAction act = modulate(bits_[k], timing_.wait_period);
    Duration end;
    if (act.kind == SenderAction::Kind::read_full_sender_file) {
      const auto s = medium_.read(now, sender_file_);
      log_read(now, Actor::sender, Action::evict, s);
      end = s.completed;
    } else {
      const Duration w = basic() ? std::min(wait_, sender_frame_) : wait_;
      log(TraceEvent{now, Actor::sender, Action::wait, w, 0, 0});
      end = now + w;
    }
    schedule(end, Actor::sender, Step::sender_end, k);
  }

  void on_sender_end(Duration now, std::size_t k) {
    const auto correction = tracker_.take(k);
    if (k + 1 == bits_.size()) {
      sender_done_ = true;
      return;
    }
    Duration next;
    if (basic()) {
      next = std::max(origin_ + static_cast<std::int64_t>(k + 1) * slot_, now);
    } else {
      Duration gap = t_r_ + overhead_;
      // A blocking eviction re-synchronizes the receiver by itself, so only
      // waits absorb the correction.
      if (correction && bits_[k] == 0) gap += correction->amount;
      gap = std::max(gap, Duration{0});
      next = now + gap;
    }
    if (next > now) log(TraceEvent{now, Actor::sender, Action::gap, next - now, 0, 0});
    schedule(next, Actor::sender, Step::sender_start, k + 1);
  }

  void on_frame_start(Duration now, std::size_t k) {
    receiver_starts_[k] = now;
    try_divergence(k);
    schedule(now + probe_offset_, Actor::receiver, Step::probe, k);
  }

  void on_probe(Duration now, std::size_t k) {
    auto r = receiver_probe(now, medium_, receiver_file_, threshold_, k, bits_[k]);
    log_read(now, Actor::receiver, Action::probe, r.served);
    slots_[k] = r.slot;
    receiver_busy_ = r.served.completed;
    last_probe_end_ = r.served.completed;
    schedule(r.served.completed, Actor::receiver, Step::probe_end, k);
  }

  void on_probe_end(Duration now, std::size_t k) {
    if (k + 1 == bits_.size()) {
      receiver_done_ = true;
      return;
    }
    if (basic()) {
      const Duration grid = origin_ + static_cast<std::int64_t>(k + 1) * slot_ + sender_frame_;
      schedule(std::max(grid, now), Actor::receiver, Step::probe, k + 1);
      return;
    }
    Duration next = slots_[k].decoded_bit == 1 ? now + overhead_ : *receiver_starts_[k] + wait_ + t_r_ + overhead_;
    schedule(std::max(next, now), Actor::receiver, Step::frame_start, k + 1);
  }

  void on_disrupt(Duration now, std::size_t tick) {
    const auto t = woodpecker_tick(now, medium_, *disruptor_file_, *cfg_.disruptor, tick);
    log(t.event);
    schedule(t.next_tick, Actor::disruptor, Step::disrupt, tick + 1);
  }

  void try_divergence(std::size_t k) {
    if (basic() || diverged_[k] || !sender_starts_[k] || !receiver_starts_[k]) return;
    diverged_[k] = true;
    tracker_.observe(k, *sender_starts_[k] - *receiver_starts_[k]);
  }

  SimulationTrace finish() {
    SimulationTrace tr;
    tr.config = cfg_;
    tr.timing = timing_;
    tr.channel_bits = bits_;
    tr.events = std::move(events_);
    tr.slots = std::move(slots_);

    std::vector<Bit> decoded;
    decoded.reserve(tr.slots.size());
    for (const auto& s : tr.slots) decoded.push_back(s.decoded_bit);
    tr.decoded_channel = BitMessage(std::move(decoded));
    tr.decoded_message = decode(tr.decoded_channel, cfg_.coding);

    auto& m = tr.metrics;
    for (const auto& e : tr.events) m.total_time = std::max(m.total_time, e.end());
    m.transmission_time = basic() ? static_cast<std::int64_t>(bits_.size()) * slot_ : m.total_time;
    m.bit_errors = bit_errors(cfg_.message, tr.decoded_message);
    m.ber = cfg_.message.empty() ? 0.0 : static_cast<double>(m.bit_errors) / static_cast<double>(cfg_.message.size());
    m.channel_bit_errors = bit_errors(bits_, tr.decoded_channel);
    m.throughput = throughput(cfg_.message.size(), to_seconds(m.total_time));
    m.divergence_max = tracker_.max_abs();
    m.adjustments = tracker_.adjustments();
    return tr;
  }

  ScenarioConfig cfg_;
  TimingParams timing_;
  SharedMedium medium_;
  DivergenceTracker tracker_;
  SimFile sender_file_, receiver_file_;
  std::optional<SimFile> disruptor_file_;
  BitMessage bits_;

  Duration threshold_{0}, t_s_{0}, t_r_{0}, wait_{0}, overhead_{0};
  Duration sender_frame_{0}, receiver_frame_{0}, slot_{0}, probe_offset_{0}, origin_{0};
  Duration receiver_busy_{0}, last_probe_end_{0};

  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  bool sender_done_ = false, receiver_done_ = false;

  std::vector<std::optional<Duration>> sender_starts_, receiver_starts_;
  std::vector<bool> diverged_;
  std::vector<SlotRecord> slots_;
  std::vector<TraceEvent> events_;
};

}  // namespace detail

/// Runs the full protocol for one scenario. Identical configs (including
/// the seed) produce identical traces.
inline SimulationTrace run_scenario(const ScenarioConfig& config) { return detail::Engine(config).run(); }

}  // namespace covchan
