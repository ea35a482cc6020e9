// covchan: command-line front end for the cache-eviction channel simulator.
//
//   covchan theory   --config sweep.json [--out rows.csv] [--format csv|json-lines]
//   covchan simulate --config scenario.json [--out trace.json] [--seed N]
//   covchan sweep    --config sweep.json [--out rows.csv] [--format csv|json-lines] [--seed N]
//   covchan disrupt  --config scenario.json [--out comparison.json] [--seed N]

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "covchan/covchan.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
};

covchan::TableFormat table_format(const std::string& f) {
  return f == "json-lines" ? covchan::TableFormat::json_lines : covchan::TableFormat::csv;
}

// Writes through a temporary stream so a failed open reports nonzero.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  write(out);
  out.close();
  if (!out) throw std::runtime_error(path + ": write failed");
}

int cmd_theory(const Options& o) {
  const auto spec = covchan::load_sweep(o.config);
  const auto rows = covchan::theory_rows(spec);
  emit(o.out, [&](std::ostream& os) { covchan::write_rows(os, rows, table_format(o.format)); });
  return 0;
}

int cmd_sweep(const Options& o) {
  auto spec = covchan::load_sweep(o.config);
  if (o.seed) spec.base.rng_seed = *o.seed;
  const auto rows = covchan::sweep_rows(spec);
  emit(o.out, [&](std::ostream& os) { covchan::write_rows(os, rows, table_format(o.format)); });
  return 0;
}

int cmd_simulate(const Options& o) {
  auto config = covchan::load_scenario(o.config);
  if (o.seed) config.rng_seed = *o.seed;
  const auto trace = covchan::run_scenario(config);
  if (!o.out.empty()) emit(o.out, [&](std::ostream& os) { os << covchan::trace_to_json(trace).dump(1) << '\n'; });
  std::cout << covchan::summary_line(trace) << '\n';
  return 0;
}

int cmd_disrupt(const Options& o) {
  auto config = covchan::load_scenario(o.config);
  if (!config.disruptor) throw covchan::ConfigError(o.config + ": disruptor: required section is missing");
  if (o.seed) config.rng_seed = *o.seed;
  const auto cmp = covchan::run_disrupt_comparison(config);
  if (!o.out.empty()) emit(o.out, [&](std::ostream& os) { os << covchan::comparison_to_json(cmp).dump(1) << '\n'; });
  std::cout << "uncoded:     " << covchan::summary_line(cmp.uncoded) << '\n';
  std::cout << "repetition3: " << covchan::summary_line(cmp.coded) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cache-eviction covert timing channel simulator"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* sub, bool tabular) {
    sub->add_option("--config", opts.config, "Scenario or sweep document (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output path (default: standard output for tables)");
    sub->add_option("--seed", opts.seed, "Override the configured RNG seed");
    if (tabular)
      sub->add_option("--format", opts.format, "Tabular output format")
          ->check(CLI::IsMember({"csv", "json-lines"}));
  };

  auto* theory = app.add_subcommand("theory", "Closed-form rows per cache size");
  auto* simulate = app.add_subcommand("simulate", "Run one scenario and write its trace");
  auto* sweep = app.add_subcommand("sweep", "Theory plus simulation per cache size");
  auto* disrupt = app.add_subcommand("disrupt", "Uncoded vs repetition-3 under a disruptor");
  add_common(theory, true);
  add_common(simulate, false);
  add_common(sweep, true);
  add_common(disrupt, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (theory->parsed()) return cmd_theory(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (disrupt->parsed()) return cmd_disrupt(opts);
  } catch (const covchan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
