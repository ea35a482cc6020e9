#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covchan/channel_codec.hpp"
#include "covchan/error.hpp"
#include "covchan/sim_engine.hpp"
#include "covchan/timing_model.hpp"

// JSON scenario and sweep documents. Unknown keys are rejected so that a
// typo can never silently fall back to a default. See configs/README.md for
// the schema.
namespace covchan {

namespace config_detail {

using Json = nlohmann::json;

class Section {
 public:
  Section(const Json& node, std::string path, std::initializer_list<const char*> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
    for (const auto& [key, value] : node_.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) throw ConfigError(where(key) + ": unknown key");
    }
  }

  bool has(const char* key) const { return node_.contains(key); }

  const Json& raw(const char* key) const {
    if (!has(key)) throw ConfigError(where(key) + ": required key is missing");
    return node_.at(key);
  }

  double number(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where(key) + ": expected a finite number");
    return d;
  }

  std::optional<double> opt_number(const char* key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  std::uint64_t count(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError(where(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(where(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(where(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  Section child(const char* key, std::initializer_list<const char*> allowed) const {
    return Section(raw(key), path_.empty() ? key : path_ + "." + key, allowed);
  }

  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const Json& node_;
  std::string path_;
};

inline Json parse_document(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) line += (text[i] == '\n');
    throw ConfigError(origin + ":" + std::to_string(line) + ": malformed document (" + e.what() + ")");
  }
}

// In a sweep base the cache size and read rate are supplied per row, so
// both become optional there.
inline PhysicalParams parse_physical(const Section& s, bool sweep_base) {
  PhysicalParams p;
  if (!sweep_base || s.has("cache_mb")) p.cache_mb = s.number("cache_mb");
  if (s.has("read_rate_mbps") && s.has("observed_evict_time_s"))
    throw ConfigError(s.where() + ": give either read_rate_mbps or observed_evict_time_s, not both");
  if (s.has("observed_evict_time_s")) {
    p = fit_params_from_observation(p.cache_mb, s.number("observed_evict_time_s"), p);
  } else if (!sweep_base || s.has("read_rate_mbps")) {
    p.read_rate = s.number("read_rate_mbps");
  }
  if (s.has("ram_rate_mbps")) {
    const auto& v = s.raw("ram_rate_mbps");
    if (v.is_string()) {
      if (v.get<std::string>() != "instant") throw ConfigError(s.where("ram_rate_mbps") + ": expected a number or \"instant\"");
      p.ram_rate = kInstantHits;
    } else {
      p.ram_rate = s.number("ram_rate_mbps");
    }
  }
  if (auto v = s.opt_number("receiver_read_mb")) p.receiver_read_mb = *v;
  if (auto v = s.opt_number("block_mb")) p.block_mb = *v;
  if (auto v = s.opt_number("backing_store_mb")) p.backing_store_mb = *v;
  return p;
}

inline TimingOverrides parse_timing(const Section& s) {
  TimingOverrides t;
  t.sender_frame = s.opt_number("sender_frame_s");
  t.receiver_frame = s.opt_number("receiver_frame_s");
  t.safety_fraction = s.opt_number("safety_fraction");
  t.wait_period = s.opt_number("wait_period_s");
  t.threshold = s.opt_number("threshold_s");
  return t;
}

struct MessageSpec {
  std::optional<BitMessage> literal;
  std::uint64_t n_ones = 0;
  std::uint64_t n_zeros = 0;
  std::uint64_t arrangement_seed = 1;

  BitMessage build() const { return literal ? *literal : arrange_message(n_ones, n_zeros, arrangement_seed); }
};

inline MessageSpec parse_message(const Section& s) {
  MessageSpec m;
  if (s.has("bits")) {
    if (s.has("ones") || s.has("zeros") || s.has("arrangement_seed"))
      throw ConfigError(s.where() + ": a literal bit string excludes ones/zeros/arrangement_seed");
    try {
      m.literal = BitMessage::parse(s.text("bits"));
    } catch (const ConfigError& e) {
      throw ConfigError(s.where("bits") + ": " + e.what());
    }
    return m;
  }
  m.n_ones = s.count("ones");
  m.n_zeros = s.count("zeros");
  if (s.has("arrangement_seed")) m.arrangement_seed = s.count("arrangement_seed");
  return m;
}

inline SchemeVariant parse_variant(const Section& s, const char* key) {
  const auto v = s.text(key);
  if (v == "basic") return SchemeVariant::basic;
  if (v == "optimized") return SchemeVariant::optimized;
  throw ConfigError(s.where(key) + ": expected \"basic\" or \"optimized\"");
}

inline Coding parse_coding(const Section& s, const char* key) {
  const auto v = s.text(key);
  if (v == "none") return Coding::none;
  if (v == "repetition3") return Coding::repetition3;
  throw ConfigError(s.where(key) + ": expected \"none\" or \"repetition3\"");
}

inline constexpr std::initializer_list<const char*> kPhysicalKeys = {
    "cache_mb", "read_rate_mbps", "observed_evict_time_s", "ram_rate_mbps", "receiver_read_mb", "block_mb",
    "backing_store_mb"};
inline constexpr std::initializer_list<const char*> kTimingKeys = {
    "sender_frame_s", "receiver_frame_s", "safety_fraction", "wait_period_s", "threshold_s"};
inline constexpr std::initializer_list<const char*> kMessageKeys = {"bits", "ones", "zeros", "arrangement_seed"};
inline constexpr std::initializer_list<const char*> kDisruptorKeys = {"interval_s", "file_mb", "start_offset_s"};
inline constexpr std::initializer_list<const char*> kScenarioKeys = {
    "physical", "timing", "variant", "message", "coding", "jitter_fraction",
    "seed", "per_bit_overhead_s", "divergence_tolerance_s", "disruptor"};

// Fields shared by a scenario and a sweep's base. A sweep supplies the
// message separately.
inline ScenarioConfig parse_scenario_fields(const Section& s, bool sweep_base) {
  ScenarioConfig c;
  c.physical = parse_physical(s.child("physical", kPhysicalKeys), sweep_base);
  if (s.has("timing")) c.timing = parse_timing(s.child("timing", kTimingKeys));
  if (s.has("variant")) c.variant = parse_variant(s, "variant");
  if (s.has("message") || !sweep_base) c.message = parse_message(s.child("message", kMessageKeys)).build();
  if (s.has("coding")) c.coding = parse_coding(s, "coding");
  if (auto v = s.opt_number("jitter_fraction")) c.jitter_fraction = *v;
  if (s.has("seed")) c.rng_seed = s.count("seed");
  if (auto v = s.opt_number("per_bit_overhead_s")) c.per_bit_overhead = *v;
  c.divergence_tolerance = s.opt_number("divergence_tolerance_s");
  if (s.has("disruptor")) {
    const auto d = s.child("disruptor", kDisruptorKeys);
    DisruptorConfig dc;
    dc.interval = d.number("interval_s");
    dc.file_mb = d.number("file_mb");
    if (auto v = d.opt_number("start_offset_s")) dc.start_offset = *v;
    c.disruptor = dc;
  }
  return c;
}

}  // namespace config_detail

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<config>") {
  using namespace config_detail;
  const Json doc = parse_document(text, origin);
  try {
    ScenarioConfig c = parse_scenario_fields(Section(doc, "", kScenarioKeys), false);
    c.validate();
    return c;
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_text_file(path), path); }

/// Table-style sweep over cache sizes. `read_times` and `wait_periods`
/// optionally pin the per-row eviction time (and hence the fitted read
/// rate) and the 0-bit wait.
struct SweepSpec {
  std::vector<double> cache_sizes_mb;
  std::vector<double> read_times;
  std::vector<double> wait_periods;
  ScenarioConfig base;
  config_detail::MessageSpec message;

  void validate() const {
    if (cache_sizes_mb.empty()) throw ConfigError("cache_sizes_mb must not be empty");
    for (double c : cache_sizes_mb)
      if (!(c > 0.0)) throw ConfigError("cache_sizes_mb entries must be > 0");
    if (!read_times.empty() && read_times.size() != cache_sizes_mb.size())
      throw ConfigError("read_times_s must have one entry per cache size");
    if (!wait_periods.empty() && wait_periods.size() != cache_sizes_mb.size())
      throw ConfigError("wait_periods_s must have one entry per cache size");
    for (double t : read_times)
      if (!(t > 0.0)) throw ConfigError("read_times_s entries must be > 0");
    for (double w : wait_periods)
      if (!(w > 0.0)) throw ConfigError("wait_periods_s entries must be > 0");
  }
};

inline SweepSpec parse_sweep(const std::string& text, const std::string& origin = "<sweep>") {
  using namespace config_detail;
  const Json doc = parse_document(text, origin);
  try {
    const Section root(doc, "", {"cache_sizes_mb", "read_times_s", "wait_periods_s", "message", "base"});
    SweepSpec s;
    s.cache_sizes_mb = root.numbers("cache_sizes_mb");
    if (root.has("read_times_s")) s.read_times = root.numbers("read_times_s");
    if (root.has("wait_periods_s")) s.wait_periods = root.numbers("wait_periods_s");
    s.message = parse_message(root.child("message", kMessageKeys));
    s.base = parse_scenario_fields(root.child("base", kScenarioKeys), true);
    s.base.message = s.message.build();
    s.validate();
    return s;
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline SweepSpec load_sweep(const std::string& path) { return parse_sweep(read_text_file(path), path); }

}  // namespace covchan
