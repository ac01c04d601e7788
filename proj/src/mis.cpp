#include "mislab/mis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mislab {

namespace {

void check_alignment(const SampleSet& ss, const ProposalSet& ps) {
  if (ss.num_proposals != ps.size()) {
    throw MisError("sample set was drawn from a different number of proposals");
  }
  for (const auto& s : ss.samples) {
    if (s.proposal >= ps.size()) {
      throw MisError("sample carries out-of-range proposal index");
    }
  }
}

// Shared by all three rules so that the degenerate partitions reproduce the
// standard and full-mixture weights bit for bit.
WeightVector mixture_weights(const SampleSet& ss, const ProposalSet& ps,
                             std::span<const double> log_target,
                             const std::vector<std::vector<std::size_t>>& subsets,
                             std::span<const std::size_t> subset_of, WeightScheme scheme) {
  if (log_target.size() != ss.size()) {
    throw MisError("log-target cache length does not match the sample set");
  }
  WeightVector out;
  out.scheme = scheme;
  out.weights.resize(ss.size());
  std::vector<double> terms;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    const auto& s = ss.samples[i];
    const auto& members = subsets[subset_of[s.proposal]];
    terms.resize(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      terms[m] = ps.log_density(members[m], s.value);
    }
    out.evals.proposal += members.size();
    const double log_psi = log_sum_exp(terms) - std::log(static_cast<double>(members.size()));
    if (!std::isfinite(log_psi)) {
      throw MisError("proposal mixture evaluates to zero or non-finite at sample " +
                     std::to_string(i));
    }
    const double w = std::exp(log_target[i] - log_psi);
    if (!std::isfinite(w)) {
      throw MisError("non-finite weight at sample " + std::to_string(i));
    }
    out.weights[i] = w;
  }
  return out;
}

double weighted_sum(const SampleSet& ss, const WeightVector& wv, const MomentFunction& f) {
  if (wv.size() != ss.size()) {
    throw MisError("weight vector length does not match the sample set");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ss.size(); ++i) {
    acc += wv.weights[i] * f(ss.samples[i].value);
  }
  return acc;
}

double weight_total(const WeightVector& wv) {
  return std::accumulate(wv.weights.begin(), wv.weights.end(), 0.0);
}

}  // namespace

std::string_view to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::standard:
      return "standard";
    case WeightScheme::dm:
      return "dm";
    case WeightScheme::partial:
      return "partial";
  }
  return "unknown";
}

ProposalSet::ProposalSet(std::vector<ProposalFamily> proposals) : proposals_(std::move(proposals)) {
  if (proposals_.empty()) {
    throw MisError("proposal set must hold at least one proposal");
  }
}

MomentFunction MomentFunction::custom(std::function<double(double)> f) {
  if (!f) {
    throw MisError("custom moment function is empty");
  }
  return MomentFunction(Kind::custom, std::move(f));
}

double MomentFunction::operator()(double x) const {
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::square:
      return x * x;
    case Kind::custom:
      return f_(x);
  }
  return x;
}

SampleSet draw_mis_samples(const ProposalSet& ps, std::size_t k, Rng& rng) {
  if (k < 1) {
    throw MisError("samples per proposal must be at least 1");
  }
  SampleSet ss;
  ss.num_proposals = ps.size();
  ss.per_proposal = k;
  ss.samples.reserve(ps.size() * k);
  for (std::size_t n = 0; n < ps.size(); ++n) {
    for (std::size_t r = 0; r < k; ++r) {
      ss.samples.push_back({sample(ps[n], rng), n});
    }
  }
  return ss;
}

std::vector<double> log_target_values(const SampleSet& ss, const TargetSpec& target) {
  std::vector<double> out(ss.size());
  for (std::size_t i = 0; i < ss.size(); ++i) {
    out[i] = target.log_eval(ss.samples[i].value);
  }
  return out;
}

WeightVector weights_standard(const SampleSet& ss, const ProposalSet& ps,
                              std::span<const double> log_target) {
  check_alignment(ss, ps);
  const auto part = Partition::singletons(ps.size());
  std::vector<std::size_t> lookup(ps.size());
  std::iota(lookup.begin(), lookup.end(), std::size_t{0});
  return mixture_weights(ss, ps, log_target, part.subsets(), lookup, WeightScheme::standard);
}

WeightVector weights_standard(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target) {
  auto wv = weights_standard(ss, ps, log_target_values(ss, target));
  wv.evals.target = ss.size();
  return wv;
}

WeightVector weights_dm(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target) {
  check_alignment(ss, ps);
  const auto part = Partition::whole(ps.size());
  const auto log_target = log_target_values(ss, target);
  const std::vector<std::size_t> lookup(ps.size(), 0);
  auto wv = mixture_weights(ss, ps, log_target, part.subsets(), lookup, WeightScheme::dm);
  wv.evals.target = ss.size();
  return wv;
}

WeightVector weights_partial(const SampleSet& ss, const ProposalSet& ps,
                             std::span<const double> log_target, const Partition& part) {
  check_alignment(ss, ps);
  if (part.num_proposals() != ps.size()) {
    throw PartitionError("partition covers " + std::to_string(part.num_proposals()) +
                         " proposals, proposal set has " + std::to_string(ps.size()));
  }
  std::vector<std::size_t> lookup(ps.size());
  for (std::size_t j = 0; j < ps.size(); ++j) {
    lookup[j] = part.subset_of(j);
  }
  return mixture_weights(ss, ps, log_target, part.subsets(), lookup, WeightScheme::partial);
}

WeightVector weights_partial(const SampleSet& ss, const ProposalSet& ps, const TargetSpec& target,
                             const Partition& part) {
  auto wv = weights_partial(ss, ps, log_target_values(ss, target), part);
  wv.evals.target = ss.size();
  return wv;
}

WeightVector normalize_weights(const WeightVector& wv) {
  const double total = weight_total(wv);
  if (!(total > 0.0)) {
    throw MisError("degenerate weight vector");
  }
  WeightVector out = wv;
  for (double& w : out.weights) {
    w /= total;
  }
  return out;
}

double estimate_self_normalized(const SampleSet& ss, const WeightVector& wv,
                                const MomentFunction& f) {
  const double total = weight_total(wv);
  if (!(total > 0.0)) {
    throw MisError("degenerate weight vector");
  }
  return weighted_sum(ss, wv, f) / total;
}

double estimate_unnormalized(const SampleSet& ss, const WeightVector& wv, const MomentFunction& f,
                             double z) {
  if (!(z > 0.0)) {
    throw MisError("unnormalized estimator needs a positive normalizing constant");
  }
  return weighted_sum(ss, wv, f) / (static_cast<double>(ss.size()) * z);
}

double estimate_z(const WeightVector& wv) {
  if (wv.weights.empty()) {
    throw MisError("empty weight vector");
  }
  return weight_total(wv) / static_cast<double>(wv.size());
}

double max_normalized_weight(const WeightVector& wv) {
  const double total = weight_total(wv);
  if (!(total > 0.0)) {
    throw MisError("degenerate weight vector");
  }
  return *std::max_element(wv.weights.begin(), wv.weights.end()) / total;
}

EstimateRecord summarize(const SampleSet& ss, const WeightVector& wv, const MomentFunction& f,
                         const TargetSpec& target) {
  EstimateRecord rec;
  rec.self_normalized = estimate_self_normalized(ss, wv, f);
  rec.unnormalized = estimate_unnormalized(ss, wv, f, target.normalizing_constant());
  rec.z_hat = estimate_z(wv);
  rec.max_normalized_weight = max_normalized_weight(wv);
  rec.target_evals = wv.evals.target;
  rec.proposal_evals = wv.evals.proposal;
  return rec;
}

}  // namespace mislab
