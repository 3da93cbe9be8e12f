#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "qcap/experiment.hpp"

namespace {

constexpr const char* kExitHelp =
    "Exit status:\n"
    "  0  every asserted invariant held\n"
    "  1  at least one asserted invariant failed (reports are still written)\n"
    "  2  bad command line, config or input file (ConfigError, ParseError)\n"
    "  3  a requested dimension exceeds the cap (DimensionOverflow)\n"
    "  4  the capacity solver did not certify its result (NotConverged)\n"
    "  5  any other numerical error\n";

void print_rows(const qcap::ExperimentOutcome& out, bool bits) {
  const double unit = bits ? std::numbers::ln2 : 1.0;
  std::printf("%4s %6s %10s %14s %14s %14s  [%s]\n", "n", "M", "eps_max", "lhs", "rhs", "slack", bits ? "bits" : "nats");
  for (const auto& r : out.rows) {
    std::printf("%4zu %6zu %10.3e %14.8g %14.8g %14.6g\n", r.n, r.M, r.eps_max, r.lhs / unit, r.rhs / unit,
                r.slack / unit);
  }
  std::printf("checks %zu, failures %zu\n", out.checks, out.failures);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holevo capacity and converse-bound experiments"};
  app.footer(kExitHelp);
  std::string task_name, config_path, prefix;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  bool bits = false;
  app.add_option("task", task_name, "capacity | certify | uniqueness | simulate | theorem1 | theorem2 | lemma5 | proof-chain")
      ->required();
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads for sweep points");
  app.add_option("--out", prefix, "output path prefix (overrides the config)");
  app.add_flag("--bits", bits, "display entropic values in bits; files stay in nats");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : qcap::kExitConfig;
  }

  try {
    const qcap::Task task = qcap::task_from_string(task_name);
    const auto j = qcap::io::read_json_file(config_path);
    const auto base = std::filesystem::path(config_path).parent_path().string();
    qcap::ExperimentConfig cfg = qcap::parse_experiment_config(j, task, base.empty() ? "." : base);
    if (*seed_opt) cfg.seed = seed;
    if (jobs > 0) cfg.jobs = jobs;
    if (!prefix.empty()) cfg.output = prefix;
    if (cfg.output.empty()) cfg.output = "qcap_" + std::string(qcap::to_string(task));

    const auto out = qcap::run_experiment(cfg);
    qcap::write_outcome(out, cfg.output);
    print_rows(out, bits);
    return out.ok() ? qcap::kExitOk : qcap::kExitInvariantFailed;
  } catch (const qcap::Error& e) {
    std::cerr << "qcap: " << e.what() << '\n';
    return qcap::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qcap: " << e.what() << '\n';
    return qcap::kExitOtherError;
  }
}
