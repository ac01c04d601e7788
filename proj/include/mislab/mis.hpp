#pragma once

// Multiple importance sampling: drawing one batch of samples per proposal,
// the standard / deterministic-mixture / partial-mixture weighting rules, and
// the estimators built from the weights.
//
// Proposal indices are zero-based throughout. Weights are computed in log
// space and exponentiated once per sample; an entry may underflow to zero but
// is never negative or non-finite.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mislab/distributions.hpp"
#include "mislab/partition.hpp"

namespace mislab {

class MisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProposalSet {
 public:
  explicit ProposalSet(std::vector<ProposalFamily> proposals);

  std::size_t size() const { return proposals_.size(); }
  const ProposalFamily& operator[](std::size_t j) const { return proposals_[j]; }
  const std::vector<ProposalFamily>& proposals() const { return proposals_; }

  double log_density(std::size_t j, double x) const { return mislab::log_density(proposals_[j], x); }

 private:
  std::vector<ProposalFamily> proposals_;
};

struct Sample {
  double value;
  std::size_t proposal;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// L = k * N samples ordered proposal-major, replicate-minor.
struct SampleSet {
  std::vector<Sample> samples;
  std::size_t num_proposals = 0;
  std::size_t per_proposal = 0;

  std::size_t size() const { return samples.size(); }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

enum class WeightScheme { standard, dm, partial };

std::string_view to_string(WeightScheme s);

struct EvalCounts {
  std::uint64_t target = 0;
  std::uint64_t proposal = 0;
};

struct WeightVector {
  std::vector<double> weights;
  WeightScheme scheme = WeightScheme::standard;
  EvalCounts evals;

  std::size_t size() const { return weights.size(); }
};

/// f in I = E[f(x)].
class MomentFunction {
 public:
  enum class Kind { identity, square, custom };

  static MomentFunction identity() { return MomentFunction(Kind::identity, {}); }
  static MomentFunction square() { return MomentFunction(Kind::square, {}); }
  static MomentFunction custom(std::function<double(double)> f);

  Kind kind() const { return kind_; }
  double operator()(double x) const;

 private:
  MomentFunction(Kind kind, std::function<double(double)> f) : kind_(kind), f_(std::move(f)) {}

  Kind kind_;
  std::function<double(double)> f_;
};

struct EstimateRecord {
  double self_normalized = 0.0;
  std::optional<double> unnormalized;
  double z_hat = 0.0;
  double max_normalized_weight = 0.0;
  std::uint64_t target_evals = 0;
  std::uint64_t proposal_evals = 0;
  std::uint64_t search_evals = 0;
};

SampleSet draw_mis_samples(const ProposalSet& ps, std::size_t k, Rng& rng);

/// log pi(x_i) for every sample, in sample order.
std::vector<double> log_target_values(const SampleSet& ss, const TargetSpec& target);

/// w_i = pi(x_i) / q_{n(i)}(x_i). Counts L target and L proposal evaluations.
WeightVector weights_standard(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target);
WeightVector weights_standard(const SampleSet& ss, const ProposalSet& ps,
                              std::span<const double> log_target);

/// w_i = pi(x_i) / ((1/N) sum_j q_j(x_i)). Counts L target and L*N proposal evaluations.
WeightVector weights_dm(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target);

/// w_i = pi(x_i) / ((1/M) sum_{j in S_p} q_j(x_i)) where S_p holds n(i).
/// Counts L target and L*M proposal evaluations.
WeightVector weights_partial(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target,
                             const Partition& part);

/// The span overloads reuse precomputed log-target values and report zero
/// target evaluations.
WeightVector weights_partial(const SampleSet& ss, const ProposalSet& ps,
                             std::span<const double> log_target, const Partition& part);

/// Throws MisError("degenerate weight vector") when no weight is positive.
WeightVector normalize_weights(const WeightVector& wv);

/// sum w_i f(x_i) / sum w_i.
double estimate_self_normalized(const SampleSet& ss, const WeightVector& wv, const MomentFunction& f);

/// (1 / (L z)) sum w_i f(x_i).
double estimate_unnormalized(const SampleSet& ss, const WeightVector& wv, const MomentFunction& f,
                             double z);

/// (1 / L) sum w_i.
double estimate_z(const WeightVector& wv);

/// Largest entry of the normalized weight vector.
double max_normalized_weight(const WeightVector& wv);

/// All estimators for one run. Î is filled when the target's Z is known (always
/// the case for TargetSpec).
EstimateRecord summarize(const SampleSet& ss, const WeightVector& wv, const MomentFunction& f,
                         const TargetSpec& target);

}  // namespace mislab
