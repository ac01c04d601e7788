#pragma once

// Replicated MIS experiments: configuration, per-run execution, aggregation
// into MSE / variance / bias tables, and CSV output.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mislab/clustering.hpp"
#include "mislab/distributions.hpp"
#include "mislab/mis.hpp"

namespace mislab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Scheme : int { s_mis = 0, dm = 1, p_dm = 2, h_dm = 3 };

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

enum class Family { gaussian, student_t };

/// N proposals of one family with locations equidistant on [lower, upper],
/// both endpoints included.
struct ProposalGrid {
  Family family = Family::gaussian;
  std::size_t count = 32;
  double lower = -8.0;
  double upper = 8.0;
  double scale_sq = 3.0;
  double dof = 4.0;

  double location(std::size_t j) const;
  ProposalSet build() const;
};

enum class Moment { identity, square };

struct ExperimentConfig {
  std::string name;
  TargetSpec target;
  ProposalGrid proposals;
  std::vector<Scheme> schemes;
  std::vector<std::size_t> p_values;
  double alpha = 1.0;
  std::vector<std::size_t> k_values;
  std::size_t n_runs = 5000;
  std::uint64_t base_seed = 0x5eed2016u;
  Moment moment = Moment::identity;
  SearchMode search = SearchMode::automatic;
  unsigned threads = 1;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;

  MomentFunction moment_function() const;
  /// Ground-truth E[f(x)] under the normalized target.
  double reference_value() const;
};

ExperimentConfig builtin_example1();
ExperimentConfig builtin_example2();
ExperimentConfig builtin_example(int which);

/// Reads the TOML experiment format documented in the README.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(std::string_view toml_text);

/// Pure function of its arguments (splitmix64 over the tuple).
std::uint64_t derive_seed(std::uint64_t base_seed, Scheme scheme, std::size_t num_subsets,
                          std::size_t k, std::size_t run);

struct RunResult {
  Scheme scheme;
  std::size_t num_subsets;
  std::size_t k;
  std::size_t run;
  EstimateRecord estimate;
};

/// One replication of one (scheme, P, k) cell.
EstimateRecord run_single(const ExperimentConfig& cfg, const ProposalSet& ps, Scheme scheme,
                          std::size_t num_subsets, std::size_t k, std::uint64_t seed);

struct SummaryRow {
  Scheme scheme;
  std::size_t P;
  std::size_t M;
  std::size_t k;
  std::size_t L;
  std::size_t n_runs;
  double mse_self_normalized;
  double mse_unnormalized;
  double variance_self_normalized;
  double variance_unnormalized;
  double bias_sq_self_normalized;
  double bias_sq_unnormalized;
  double mean_z_hat;
  double mean_max_normalized_weight;
  double mean_proposal_evals;
  double mean_search_evals;
  std::uint64_t base_seed;
};

struct CellKey {
  Scheme scheme;
  std::size_t num_subsets;
  std::size_t k;
};

/// Cells in output order: sorted by (scheme, P, k). s-MIS runs at P = N and DM
/// at P = 1 regardless of p_values.
std::vector<CellKey> experiment_cells(const ExperimentConfig& cfg);

/// Runs one cell; results are indexed by run and independent of cfg.threads.
std::vector<RunResult> run_cell(const ExperimentConfig& cfg, const ProposalSet& ps,
                                const CellKey& cell);

SummaryRow summarize_cell(const ExperimentConfig& cfg, const CellKey& cell,
                          std::span<const RunResult> runs);

struct ExperimentOutput {
  std::vector<SummaryRow> rows;
  std::vector<RunResult> runs;  // filled only when requested
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool keep_runs);
std::vector<SummaryRow> run_experiment(const ExperimentConfig& cfg);

// Reporting.

inline constexpr std::size_t kSummaryFieldCount = 17;

std::string csv_header();
std::string format_csv(std::span<const SummaryRow> rows);
std::vector<SummaryRow> parse_csv(std::string_view text);
void write_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path);
void print_table(std::span<const SummaryRow> rows, std::ostream& out);

std::string format_runs_csv(std::span<const RunResult> runs);
void write_runs_csv(std::span<const RunResult> runs, const std::filesystem::path& path);

/// Population mean / variance over a run population.
double mean_of(std::span<const double> values);
double variance_of(std::span<const double> values);
double mse_of(std::span<const double> values, double reference);

/// Bootstrap standard error of `statistic` (resampling runs with replacement).
template <typename Statistic>
double bootstrap_standard_error(std::span<const double> values, Statistic statistic,
                                std::size_t resamples, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> buffer(values.size());
  std::vector<double> stats(resamples);
  for (auto& s : stats) {
    for (auto& b : buffer) {
      b = values[pick(rng)];
    }
    s = statistic(std::span<const double>(buffer));
  }
  return std::sqrt(variance_of(stats) * static_cast<double>(resamples) /
                   static_cast<double>(resamples - 1));
}

}  // namespace mislab
