#pragma once

// Partition construction for partial deterministic-mixture weighting.
//
// random_partition builds the a-priori partition: a uniform permutation of the
// proposals cut into P consecutive blocks. heretical_partition builds it after
// the samples are drawn: samples are visited in descending standard-weight
// order, and each visited sample's proposal joins the subset of the available
// proposal that gives the sample the highest density. Once ceil(alpha * N)
// proposals are placed the rest are assigned randomly, which makes alpha = 0
// consume the stream exactly as random_partition does.

#include <cstdint>
#include <span>
#include <vector>

#include "mislab/distributions.hpp"
#include "mislab/mis.hpp"
#include "mislab/partition.hpp"

namespace mislab {

enum class SearchMode {
  /// Evaluate every candidate density.
  exhaustive,
  /// Use nearest location when every candidate is a Gaussian of one shared
  /// variance (no density evaluations); otherwise fall back to exhaustive.
  automatic,
};

struct HereticalConfig {
  std::size_t num_subsets = 1;
  double alpha = 1.0;
  SearchMode search = SearchMode::automatic;

  /// Throws PartitionError unless num_subsets divides num_proposals and alpha is in [0, 1].
  void validate(std::size_t num_proposals) const;
};

/// How a proposal got its subset.
enum class Provenance : std::uint8_t {
  unallocated,
  weight_driven,    // placed next to its closest available proposal
  random_fallback,  // weight-driven phase, but no subset had room for the pair
  alpha_random,     // placed by the random completion after the alpha threshold
};

struct ClosestProposal {
  std::size_t index;
  std::uint64_t evals;
};

/// argmax_{j in candidates} q_j(x), ties to the lowest index.
ClosestProposal closest_proposal(double x, std::span<const std::size_t> candidates,
                                 const ProposalSet& ps, SearchMode mode = SearchMode::exhaustive);

Partition random_partition(std::size_t num_proposals, std::size_t num_subsets, Rng& rng);

struct HereticalResult {
  Partition partition;
  std::vector<Provenance> provenance;          // indexed by proposal
  std::vector<std::size_t> processed_samples;  // samples removed from R, in order
  std::uint64_t search_evals = 0;
};

HereticalResult heretical_partition(const SampleSet& ss, const WeightVector& standard_weights,
                                    const ProposalSet& ps, const HereticalConfig& cfg, Rng& rng);

struct HdmResult {
  WeightVector weights;  // evals: L target, L * M proposal (the reweighting pass)
  EvalCounts initial_evals;
  HereticalResult clustering;
};

/// weights_standard -> heretical_partition -> weights_partial, sharing the
/// target evaluations between the two weighting passes.
HdmResult hdm_weights(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target,
                      const HereticalConfig& cfg, Rng& rng);

}  // namespace mislab
