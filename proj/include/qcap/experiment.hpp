#pragma once

// Config-driven experiment runner behind the qcap command-line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qcap/io.hpp"

namespace qcap {

enum class Task { Capacity, Certify, Uniqueness, Simulate, Theorem1, Theorem2, Lemma5, ProofChain };

std::string_view to_string(Task t) noexcept;
/// Throws ConfigError on an unknown task name.
Task task_from_string(std::string_view name);

enum class CodeSource { Basis, RandomPgm, File };

struct SweepSpec {
  std::vector<std::size_t> n_values{1};
  std::vector<double> rates;              // fractions of chi; used when m_values is empty
  std::vector<std::size_t> m_values;
  std::size_t trials = 1;
};

struct ExperimentConfig {
  Task task = Task::Capacity;
  io::Json channel;          // as given, for the report
  SolverConfig solver;
  SweepSpec sweep;
  std::uint64_t seed = 0;
  std::string output;        // path prefix
  CodeSource code_source = CodeSource::RandomPgm;
  std::optional<io::Json> code;      // inline code or loaded file (CodeSource::File)
  std::optional<Ensemble> ensemble;  // codebook distribution; default is the capacity ensemble
  std::vector<std::pair<double, double>> chain_pairs{{0.1, 0.5}, {0.1, 1.0}, {0.25, 0.5}, {0.25, 1.0}, {0.4, 1.0}};
  double chain_delta = 1e-9;
  int restarts = 20;
  int probes = 10000;
  unsigned jobs = 1;
};

/// Validates task-specific fields; relative paths inside the config resolve
/// against `base_dir`. Throws ConfigError (or ParseError for malformed
/// matrices) and DimensionOverflow when an n value exceeds the dimension cap.
ExperimentConfig parse_experiment_config(const io::Json& j, Task task, const std::string& base_dir = ".");

struct SummaryRow {
  std::size_t n = 0;
  std::size_t M = 0;
  double eps_max = 0.0;
  double eps_avg = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

struct ExperimentOutcome {
  io::Json report;
  std::vector<SummaryRow> rows;
  std::size_t checks = 0;
  std::size_t failures = 0;
  bool ok() const noexcept { return failures == 0; }
};

ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// n,M,eps_max,eps_avg,lhs,rhs,slack,lhs_per_n
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Writes <prefix>.report.json and <prefix>.summary.csv.
void write_outcome(const ExperimentOutcome& out, const std::string& prefix);

/// Exit status of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariantFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDimensionOverflow = 3;
inline constexpr int kExitNotConverged = 4;
inline constexpr int kExitOtherError = 5;
int exit_code_for(ErrorCode code) noexcept;

}  // namespace qcap
