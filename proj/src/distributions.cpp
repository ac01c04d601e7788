#include "mislab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mislab {

namespace {

void require_finite(double x) {
  if (!std::isfinite(x)) {
    throw DistributionError("density evaluated at non-finite x");
  }
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return -std::numeric_limits<double>::infinity();
  }
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) {
    return peak;
  }
  double acc = 0.0;
  for (double v : values) {
    acc += std::exp(v - peak);
  }
  return peak + std::log(acc);
}

GaussianParams::GaussianParams(double mean, double variance)
    : mean_(mean), variance_(variance) {
  if (!std::isfinite(mean) || !(variance > 0.0) || !std::isfinite(variance)) {
    throw DistributionError("Gaussian requires finite mean and variance > 0");
  }
  log_norm_ = -0.5 * std::log(2.0 * std::numbers::pi * variance_);
}

double GaussianParams::log_pdf(double x) const {
  require_finite(x);
  const double d = x - mean_;
  return log_norm_ - d * d / (2.0 * variance_);
}

double GaussianParams::sample(Rng& rng) const {
  std::normal_distribution<double> normal(mean_, std::sqrt(variance_));
  return normal(rng);
}

StudentTParams::StudentTParams(double location, double scale_sq, double dof)
    : location_(location), scale_sq_(scale_sq), dof_(dof) {
  if (!std::isfinite(location) || !(scale_sq > 0.0) || !std::isfinite(scale_sq) ||
      !(dof > 0.0) || !std::isfinite(dof)) {
    throw DistributionError("Student-t requires finite location, scale_sq > 0 and dof > 0");
  }
  log_norm_ = std::lgamma(0.5 * (dof_ + 1.0)) - std::lgamma(0.5 * dof_) -
              0.5 * std::log(dof_ * std::numbers::pi * scale_sq_);
}

double StudentTParams::log_pdf(double x) const {
  require_finite(x);
  const double d = x - location_;
  return log_norm_ - 0.5 * (dof_ + 1.0) * std::log1p(d * d / (dof_ * scale_sq_));
}

double StudentTParams::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(dof_);
  const double z = normal(rng);
  const double v = chi2(rng);
  return location_ + std::sqrt(scale_sq_) * z / std::sqrt(v / dof_);
}

double log_density(const ProposalFamily& p, double x) {
  return std::visit([x](const auto& d) { return d.log_pdf(x); }, p);
}

double density(const ProposalFamily& p, double x) { return std::exp(log_density(p, x)); }

double sample(const ProposalFamily& p, Rng& rng) {
  return std::visit([&rng](const auto& d) { return d.sample(rng); }, p);
}

double location_of(const ProposalFamily& p) {
  if (const auto* g = std::get_if<GaussianParams>(&p)) {
    return g->mean();
  }
  return std::get<StudentTParams>(p).location();
}

double eval_gaussian(double x, const GaussianParams& p) { return std::exp(p.log_pdf(x)); }

double eval_student_t(double x, const StudentTParams& p) { return std::exp(p.log_pdf(x)); }

MixtureSpec::MixtureSpec(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw DistributionError("mixture needs at least one component");
  }
  double total = 0.0;
  log_weights_.reserve(components_.size());
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || c.weight > 1.0) {
      throw DistributionError("mixture weights must lie in (0, 1]");
    }
    total += c.weight;
    log_weights_.push_back(std::log(c.weight));
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DistributionError("mixture weights sum to " + std::to_string(total) + ", not 1");
  }
}

MixtureSpec MixtureSpec::uniform(std::span<const ProposalFamily> components) {
  std::vector<MixtureComponent> out;
  out.reserve(components.size());
  const double w = 1.0 / static_cast<double>(components.size());
  for (const auto& c : components) {
    out.push_back({w, c});
  }
  return MixtureSpec(std::move(out));
}

double MixtureSpec::log_pdf(double x) const {
  if (components_.size() == 1) {
    return log_density(components_.front().params, x);
  }
  std::vector<double> terms(components_.size());
  for (std::size_t i = 0; i < components_.size(); ++i) {
    terms[i] = log_weights_[i] + log_density(components_[i].params, x);
  }
  return log_sum_exp(terms);
}

double eval_mixture(double x, const MixtureSpec& m) { return std::exp(m.log_pdf(x)); }

double reference_mean(const MixtureSpec& m) {
  double mean = 0.0;
  for (const auto& c : m.components()) {
    if (const auto* t = std::get_if<StudentTParams>(&c.params); t && t->dof() <= 1.0) {
      throw DistributionError("mixture mean undefined: Student-t component with dof <= 1");
    }
    mean += c.weight * location_of(c.params);
  }
  return mean;
}

double reference_second_moment(const MixtureSpec& m) {
  double moment = 0.0;
  for (const auto& c : m.components()) {
    double mu = 0.0;
    double var = 0.0;
    if (const auto* g = std::get_if<GaussianParams>(&c.params)) {
      mu = g->mean();
      var = g->variance();
    } else {
      const auto& t = std::get<StudentTParams>(c.params);
      if (t.dof() <= 2.0) {
        throw DistributionError("second moment undefined: Student-t component with dof <= 2");
      }
      mu = t.location();
      var = t.scale_sq() * t.dof() / (t.dof() - 2.0);
    }
    moment += c.weight * (mu * mu + var);
  }
  return moment;
}

TargetSpec::TargetSpec(MixtureSpec density, double normalizing_constant)
    : density_(std::move(density)), z_(normalizing_constant) {
  if (!(z_ > 0.0) || !std::isfinite(z_)) {
    throw DistributionError("normalizing constant must be positive and finite");
  }
  log_z_ = std::log(z_);
  reference_mean_ = mislab::reference_mean(density_);
}

double TargetSpec::log_eval(double x) const { return log_z_ + density_.log_pdf(x); }

double TargetSpec::eval(double x) const { return std::exp(log_eval(x)); }

}  // namespace mislab
