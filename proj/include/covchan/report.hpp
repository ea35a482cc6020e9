#pragma once

#include <cmath>
#include <cstdio>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covchan/config.hpp"
#include "covchan/sim_engine.hpp"
#include "covchan/timing_model.hpp"

namespace covchan {

/// One row of a cache-size sweep. The theoretical columns are quantized to
/// milliseconds so that the printed total is the sum of the printed parts.
struct ReportRow {
  double cache_size = 0.0;
  double read_time = 0.0;
  double wait_period = 0.0;
  double theor_1bits = 0.0;
  double theor_0bits = 0.0;
  double theor_total = 0.0;
  std::optional<double> sim_total;
  double performance = 0.0;
  std::optional<double> ber;
};

enum class TableFormat { csv, json_lines };

inline constexpr const char* kCsvHeader =
    "cache_size_mb,read_time_s,wait_period_s,theor_1bits_s,theor_0bits_s,theor_total_s,sim_total_s,"
    "performance_bps,ber";

namespace report_detail {

inline double to_millis(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

inline std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

// Per-row physical parameters: read rate fitted from the row's read time.
inline ScenarioConfig row_scenario(const SweepSpec& spec, std::size_t i) {
  ScenarioConfig c = spec.base;
  const double cache = spec.cache_sizes_mb[i];
  if (!spec.read_times.empty()) {
    c.physical = fit_params_from_observation(cache, spec.read_times[i], c.physical);
  } else {
    c.physical.cache_mb = cache;
  }
  if (!spec.wait_periods.empty()) c.timing.wait_period = spec.wait_periods[i];
  return c;
}

}  // namespace report_detail

/// Theoretical row from the closed-form model only.
inline ReportRow theory_row(const SweepSpec& spec, std::size_t i) {
  using namespace report_detail;
  const ScenarioConfig c = row_scenario(spec, i);
  c.physical.validate();
  const double read_time = spec.read_times.empty() ? eviction_time(c.physical) : spec.read_times[i];
  const double wait = c.timing.wait_period.value_or(default_wait_period(c.physical));
  const auto ones = c.message.count_ones();
  const auto zeros = c.message.size() - ones;
  const auto theory = mixed_message_theoretical_time(ones, zeros, read_time, wait);

  ReportRow r;
  r.cache_size = spec.cache_sizes_mb[i];
  r.read_time = read_time;
  r.wait_period = wait;
  r.theor_1bits = to_millis(theory.ones_time);
  r.theor_0bits = to_millis(theory.zeros_time);
  r.theor_total = r.theor_1bits + r.theor_0bits;
  r.performance = r.theor_total > 0.0 ? throughput(c.message.size(), r.theor_total) : 0.0;
  return r;
}

inline std::vector<ReportRow> theory_rows(const SweepSpec& spec) {
  spec.validate();
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < spec.cache_sizes_mb.size(); ++i) rows.push_back(theory_row(spec, i));
  return rows;
}

/// Theoretical plus simulated rows. Scenarios run concurrently; rows come
/// back in cache-size order.
inline std::vector<ReportRow> sweep_rows(const SweepSpec& spec) {
  spec.validate();
  std::vector<std::future<SimulationTrace>> runs;
  for (std::size_t i = 0; i < spec.cache_sizes_mb.size(); ++i) {
    ScenarioConfig c = report_detail::row_scenario(spec, i);
    c.validate();
    runs.push_back(std::async(std::launch::async, [c] { return run_scenario(c); }));
  }
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    ReportRow r = theory_row(spec, i);
    const SimulationTrace t = runs[i].get();
    r.sim_total = to_seconds(t.metrics.total_time);
    r.performance = t.metrics.throughput;
    r.ber = t.metrics.ber;
    rows.push_back(r);
  }
  return rows;
}

inline void write_rows(std::ostream& out, const std::vector<ReportRow>& rows, TableFormat format) {
  using report_detail::fixed3;
  if (format == TableFormat::csv) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) {
      out << fixed3(r.cache_size) << ',' << fixed3(r.read_time) << ',' << fixed3(r.wait_period) << ','
          << fixed3(r.theor_1bits) << ',' << fixed3(r.theor_0bits) << ',' << fixed3(r.theor_total) << ','
          << (r.sim_total ? fixed3(*r.sim_total) : "") << ',' << fixed3(r.performance) << ','
          << (r.ber ? fixed3(*r.ber) : "") << '\n';
    }
    return;
  }
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["cache_size_mb"] = r.cache_size;
    j["read_time_s"] = r.read_time;
    j["wait_period_s"] = r.wait_period;
    j["theor_1bits_s"] = r.theor_1bits;
    j["theor_0bits_s"] = r.theor_0bits;
    j["theor_total_s"] = r.theor_total;
    j["sim_total_s"] = r.sim_total ? nlohmann::ordered_json(*r.sim_total) : nlohmann::ordered_json(nullptr);
    j["performance_bps"] = r.performance;
    j["ber"] = r.ber ? nlohmann::ordered_json(*r.ber) : nlohmann::ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Trace documents

inline nlohmann::ordered_json config_to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  auto& p = j["physical"];
  p["cache_mb"] = c.physical.cache_mb;
  p["read_rate_mbps"] = c.physical.read_rate;
  if (std::isinf(c.physical.ram_rate))
    p["ram_rate_mbps"] = "instant";
  else
    p["ram_rate_mbps"] = c.physical.ram_rate;
  p["receiver_read_mb"] = c.physical.receiver_read_mb;
  p["block_mb"] = c.physical.block_mb;
  p["backing_store_mb"] = c.physical.backing_store_mb;

  nlohmann::ordered_json t = nlohmann::ordered_json::object();
  if (c.timing.sender_frame) t["sender_frame_s"] = *c.timing.sender_frame;
  if (c.timing.receiver_frame) t["receiver_frame_s"] = *c.timing.receiver_frame;
  if (c.timing.safety_fraction) t["safety_fraction"] = *c.timing.safety_fraction;
  if (c.timing.wait_period) t["wait_period_s"] = *c.timing.wait_period;
  if (c.timing.threshold) t["threshold_s"] = *c.timing.threshold;
  j["timing"] = t;

  j["variant"] = std::string(to_string(c.variant));
  j["message"] = {{"bits", c.message.str()}};
  j["coding"] = std::string(to_string(c.coding));
  j["jitter_fraction"] = c.jitter_fraction;
  j["seed"] = c.rng_seed;
  j["per_bit_overhead_s"] = c.per_bit_overhead;
  if (c.divergence_tolerance) j["divergence_tolerance_s"] = *c.divergence_tolerance;
  if (c.disruptor) {
    j["disruptor"] = {{"interval_s", c.disruptor->interval},
                      {"file_mb", c.disruptor->file_mb},
                      {"start_offset_s", c.disruptor->start_offset}};
  }
  return j;
}

inline nlohmann::ordered_json metrics_to_json(const ChannelMetrics& m) {
  nlohmann::ordered_json j;
  j["total_time_s"] = to_seconds(m.total_time);
  j["total_time_ns"] = m.total_time.count();
  j["transmission_time_ns"] = m.transmission_time.count();
  j["throughput_bps"] = m.throughput;
  j["bit_errors"] = m.bit_errors;
  j["ber"] = m.ber;
  j["channel_bit_errors"] = m.channel_bit_errors;
  j["divergence_max_ns"] = m.divergence_max.count();
  j["adjustments"] = m.adjustments;
  return j;
}

inline nlohmann::ordered_json trace_to_json(const SimulationTrace& tr) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(tr.config);
  j["resolved_timing"] = {{"sender_frame_s", tr.timing.sender_frame},
                          {"receiver_frame_s", tr.timing.receiver_frame},
                          {"safety_fraction", tr.timing.safety_fraction},
                          {"wait_period_s", tr.timing.wait_period},
                          {"threshold_s", tr.timing.threshold}};
  j["channel_bits"] = tr.channel_bits.str();
  auto& events = j["events"] = nlohmann::ordered_json::array();
  for (const auto& e : tr.events) {
    nlohmann::ordered_json ev;
    ev["time_ns"] = e.time.count();
    ev["actor"] = std::string(to_string(e.actor));
    ev["action"] = std::string(to_string(e.action));
    ev["duration_ns"] = e.duration.count();
    ev["blocks_touched"] = e.blocks_touched;
    ev["miss_blocks"] = e.miss_blocks;
    events.push_back(std::move(ev));
  }
  auto& slots = j["slots"] = nlohmann::ordered_json::array();
  for (const auto& s : tr.slots) {
    nlohmann::ordered_json sj;
    sj["slot"] = s.slot_index;
    sj["sent_bit"] = s.sent_bit ? nlohmann::ordered_json(int{*s.sent_bit}) : nlohmann::ordered_json(nullptr);
    sj["issued_ns"] = s.issued_at.count();
    sj["measured_ns"] = s.measured.count();
    sj["threshold_ns"] = s.threshold.count();
    sj["decoded_bit"] = int{s.decoded_bit};
    slots.push_back(std::move(sj));
  }
  j["decoded_channel"] = tr.decoded_channel.str();
  j["decoded_message"] = tr.decoded_message.str();
  j["metrics"] = metrics_to_json(tr.metrics);
  return j;
}

inline std::string summary_line(const SimulationTrace& tr) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "total_time=%.3f s throughput=%.3f bit/s ber=%.3f bit_errors=%zu bits=%zu",
                to_seconds(tr.metrics.total_time), tr.metrics.throughput, tr.metrics.ber, tr.metrics.bit_errors,
                tr.config.message.size());
  return buf;
}

/// Same scenario with and without repetition coding, identical seed.
struct DisruptComparison {
  SimulationTrace uncoded;
  SimulationTrace coded;
};

inline DisruptComparison run_disrupt_comparison(ScenarioConfig config) {
  if (!config.disruptor) throw ConfigError("disrupt needs a disruptor section");
  config.coding = Coding::none;
  DisruptComparison out{run_scenario(config), {}};
  config.coding = Coding::repetition3;
  out.coded = run_scenario(config);
  return out;
}

inline nlohmann::ordered_json comparison_to_json(const DisruptComparison& c) {
  nlohmann::ordered_json j;
  j["comparison"] = {{"uncoded_ber", c.uncoded.metrics.ber},
                     {"repetition3_ber", c.coded.metrics.ber},
                     {"uncoded_total_time_s", to_seconds(c.uncoded.metrics.total_time)},
                     {"repetition3_total_time_s", to_seconds(c.coded.metrics.total_time)}};
  j["uncoded"] = trace_to_json(c.uncoded);
  j["repetition3"] = trace_to_json(c.coded);
  return j;
}

}  // namespace covchan
