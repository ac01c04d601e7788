#include "mislab/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mislab {

namespace {

constexpr std::size_t kUnallocated = std::numeric_limits<std::size_t>::max();

// R, A and the allocation map of the clustering loop.
class ClusterState {
 public:
  ClusterState(std::size_t num_proposals, std::size_t num_subsets)
      : subset_size_(num_proposals / num_subsets),
        members_(num_subsets),
        subset_of_(num_proposals, kUnallocated),
        provenance_(num_proposals, Provenance::unallocated),
        available_(num_proposals, true) {}

  std::size_t allocated_count() const { return allocated_; }
  bool allocated(std::size_t j) const { return subset_of_[j] != kUnallocated; }
  std::size_t subset_of(std::size_t j) const { return subset_of_[j]; }
  std::size_t free_slots(std::size_t p) const { return subset_size_ - members_[p].size(); }
  std::size_t num_subsets() const { return members_.size(); }

  void assign(std::size_t j, std::size_t p, Provenance tag) {
    members_[p].push_back(j);
    subset_of_[j] = p;
    provenance_[j] = tag;
    ++allocated_;
    if (free_slots(p) == 0) {
      for (std::size_t m : members_[p]) {
        available_[m] = false;
      }
    }
  }

  // Ascending proposal indices in A, excluding `skip`.
  std::vector<std::size_t> candidates(std::size_t skip) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < available_.size(); ++j) {
      if (available_[j] && j != skip) {
        out.push_back(j);
      }
    }
    return out;
  }

  std::size_t first_subset_with_room(std::size_t slots) const {
    for (std::size_t p = 0; p < members_.size(); ++p) {
      if (free_slots(p) >= slots) {
        return p;
      }
    }
    return kUnallocated;
  }

  // Uniform choice among subsets with at least one free slot.
  void assign_to_random_subset(std::size_t j, Rng& rng) {
    std::vector<std::size_t> open;
    for (std::size_t p = 0; p < members_.size(); ++p) {
      if (free_slots(p) > 0) {
        open.push_back(p);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    assign(j, open[pick(rng)], Provenance::random_fallback);
  }

  // Shuffle the unallocated proposals into the free slots, subsets in order.
  void fill_randomly(Rng& rng) {
    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < subset_of_.size(); ++j) {
      if (!allocated(j)) {
        pending.push_back(j);
      }
    }
    if (pending.empty()) {
      return;
    }
    std::shuffle(pending.begin(), pending.end(), rng);
    auto next = pending.begin();
    for (std::size_t p = 0; p < members_.size(); ++p) {
      while (free_slots(p) > 0) {
        assign(*next++, p, Provenance::alpha_random);
      }
    }
  }

  Partition partition() const { return Partition(members_, subset_of_.size()); }
  std::vector<Provenance> provenance() const { return provenance_; }

 private:
  std::size_t subset_size_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> subset_of_;
  std::vector<Provenance> provenance_;
  std::vector<bool> available_;
  std::size_t allocated_ = 0;
};

void check_divisible(std::size_t num_proposals, std::size_t num_subsets) {
  if (num_subsets == 0 || num_proposals == 0 || num_proposals % num_subsets != 0) {
    throw PartitionError("number of subsets " + std::to_string(num_subsets) +
                         " does not divide number of proposals " + std::to_string(num_proposals));
  }
}

bool shared_variance_gaussians(std::span<const std::size_t> candidates, const ProposalSet& ps) {
  const auto* first = std::get_if<GaussianParams>(&ps[candidates.front()]);
  if (first == nullptr) {
    return false;
  }
  return std::all_of(candidates.begin(), candidates.end(), [&](std::size_t j) {
    const auto* g = std::get_if<GaussianParams>(&ps[j]);
    return g != nullptr && g->variance() == first->variance();
  });
}

}  // namespace

void HereticalConfig::validate(std::size_t num_proposals) const {
  check_divisible(num_proposals, num_subsets);
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw PartitionError("alpha must lie in [0, 1]");
  }
}

ClosestProposal closest_proposal(double x, std::span<const std::size_t> candidates,
                                 const ProposalSet& ps, SearchMode mode) {
  if (candidates.empty()) {
    throw PartitionError("closest_proposal needs at least one candidate");
  }
  if (mode == SearchMode::automatic && shared_variance_gaussians(candidates, ps)) {
    std::size_t best = candidates.front();
    double best_dist = std::abs(x - std::get<GaussianParams>(ps[best]).mean());
    for (std::size_t j : candidates.subspan(1)) {
      const double d = std::abs(x - std::get<GaussianParams>(ps[j]).mean());
      if (d < best_dist || (d == best_dist && j < best)) {
        best = j;
        best_dist = d;
      }
    }
    return {best, 0};
  }
  std::size_t best = candidates.front();
  double best_log = ps.log_density(best, x);
  for (std::size_t j : candidates.subspan(1)) {
    const double v = ps.log_density(j, x);
    if (v > best_log || (v == best_log && j < best)) {
      best = j;
      best_log = v;
    }
  }
  return {best, candidates.size()};
}

Partition random_partition(std::size_t num_proposals, std::size_t num_subsets, Rng& rng) {
  check_divisible(num_proposals, num_subsets);
  ClusterState state(num_proposals, num_subsets);
  state.fill_randomly(rng);
  return state.partition();
}

HereticalResult heretical_partition(const SampleSet& ss, const WeightVector& standard_weights,
                                    const ProposalSet& ps, const HereticalConfig& cfg, Rng& rng) {
  const std::size_t n = ps.size();
  cfg.validate(n);
  if (standard_weights.size() != ss.size()) {
    throw PartitionError("standard weight vector length does not match the sample set");
  }
  if (ss.num_proposals != n) {
    throw PartitionError("sample set was drawn from a different proposal set");
  }

  ClusterState state(n, cfg.num_subsets);
  HereticalResult result{Partition::whole(n), {}, {}, 0};

  // Visiting order of line 5: descending weight, lowest index on ties.
  std::vector<std::size_t> order(ss.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return standard_weights.weights[a] > standard_weights.weights[b];
  });

  const auto threshold = static_cast<std::size_t>(std::ceil(cfg.alpha * static_cast<double>(n)));

  for (std::size_t i : order) {
    if (state.allocated_count() >= threshold || state.allocated_count() == n) {
      break;
    }
    result.processed_samples.push_back(i);
    const auto& s = ss.samples[i];
    const std::size_t own = s.proposal;
    if (state.allocated(own)) {
      continue;
    }
    const auto candidates = state.candidates(own);
    if (candidates.empty()) {
      state.assign_to_random_subset(own, rng);
      continue;
    }
    const auto closest = closest_proposal(s.value, candidates, ps, cfg.search);
    result.search_evals += closest.evals;
    if (state.allocated(closest.index)) {
      state.assign(own, state.subset_of(closest.index), Provenance::weight_driven);
      continue;
    }
    const std::size_t p = state.first_subset_with_room(2);
    if (p != kUnallocated) {
      state.assign(own, p, Provenance::weight_driven);
      state.assign(closest.index, p, Provenance::weight_driven);
    } else {
      state.assign_to_random_subset(own, rng);
      state.assign_to_random_subset(closest.index, rng);
    }
  }

  state.fill_randomly(rng);
  result.partition = state.partition();
  result.provenance = state.provenance();
  return result;
}

HdmResult hdm_weights(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target,
                      const HereticalConfig& cfg, Rng& rng) {
  const auto log_target = log_target_values(ss, target);
  const auto standard = weights_standard(ss, ps, log_target);
  auto clustering = heretical_partition(ss, standard, ps, cfg, rng);
  auto weights = weights_partial(ss, ps, log_target, clustering.partition);
  weights.evals.target = ss.size();
  return {std::move(weights), standard.evals, std::move(clustering)};
}

}  // namespace mislab
