#pragma once

// One-dimensional densities used both as MIS proposals and as targets.
//
// Every density is evaluated in log space; the linear-space helpers exist for
// tests and for callers that want plain values. Parameter records validate on
// construction, so a constructed object is always usable.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace mislab {

/// Random stream type. Each stream is owned by one task at a time.
using Rng = std::mt19937_64;

class DistributionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// N(x; mean, variance).
class GaussianParams {
 public:
  GaussianParams(double mean, double variance);

  double mean() const { return mean_; }
  double variance() const { return variance_; }

  double log_pdf(double x) const;
  double sample(Rng& rng) const;

 private:
  double mean_;
  double variance_;
  double log_norm_;  // -0.5 * log(2 pi variance)
};

/// Non-standardized Student-t with location, squared scale and degrees of freedom.
class StudentTParams {
 public:
  StudentTParams(double location, double scale_sq, double dof);

  double location() const { return location_; }
  double scale_sq() const { return scale_sq_; }
  double dof() const { return dof_; }

  double log_pdf(double x) const;

  // location + scale * Z / sqrt(V / dof), Z ~ N(0,1), V ~ chi2(dof); the
  // normal draw is taken before the chi-square draw.
  double sample(Rng& rng) const;

 private:
  double location_;
  double scale_sq_;
  double dof_;
  double log_norm_;
};

using ProposalFamily = std::variant<GaussianParams, StudentTParams>;

double log_density(const ProposalFamily& p, double x);
double density(const ProposalFamily& p, double x);
double sample(const ProposalFamily& p, Rng& rng);
double location_of(const ProposalFamily& p);

double eval_gaussian(double x, const GaussianParams& p);
double eval_student_t(double x, const StudentTParams& p);

struct MixtureComponent {
  double weight;
  ProposalFamily params;
};

/// Finite mixture; weights must sum to one within 1e-12.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<MixtureComponent> components);

  /// Equal-weight mixture of the given densities.
  static MixtureSpec uniform(std::span<const ProposalFamily> components);

  const std::vector<MixtureComponent>& components() const { return components_; }

  double log_pdf(double x) const;

 private:
  std::vector<MixtureComponent> components_;
  std::vector<double> log_weights_;
};

double eval_mixture(double x, const MixtureSpec& m);

/// Mixture mean. Throws when a Student-t component has dof <= 1.
double reference_mean(const MixtureSpec& m);

/// Mixture second moment E[x^2]. Throws when a Student-t component has dof <= 2.
double reference_second_moment(const MixtureSpec& m);

/// Unnormalized target pi(x) = Z * mixture(x).
class TargetSpec {
 public:
  TargetSpec(MixtureSpec density, double normalizing_constant);

  const MixtureSpec& mixture() const { return density_; }
  double normalizing_constant() const { return z_; }
  double reference_mean() const { return reference_mean_; }

  double log_eval(double x) const;
  double eval(double x) const;

 private:
  MixtureSpec density_;
  double z_;
  double log_z_;
  double reference_mean_;
};

/// log(sum(exp(values))); returns -inf for an empty range or all -inf entries.
double log_sum_exp(std::span<const double> values);

}  // namespace mislab
