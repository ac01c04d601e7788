#include <doctest.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mislab/distributions.hpp"
#include "mislab/experiment.hpp"

using namespace mislab;

namespace {

double integrate(auto f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

MixtureSpec two_mode_target() {
  return MixtureSpec({{0.5, GaussianParams(-3.0, 1.0)}, {0.5, GaussianParams(5.0, 1.0)}});
}

}  // namespace

TEST_CASE("gaussian density") {
  CHECK(eval_gaussian(0.0, GaussianParams(0.0, 1.0)) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));

  const GaussianParams p(2.0, 3.0);
  for (double d : {0.1, 1.0, 4.5, 11.0}) {
    CHECK(eval_gaussian(2.0 + d, p) == eval_gaussian(2.0 - d, p));
  }
  CHECK(std::abs(integrate([&](double x) { return eval_gaussian(x, p); }, -40.0, 40.0) - 1.0) < 1e-9);

  CHECK_THROWS_AS(eval_gaussian(std::numeric_limits<double>::quiet_NaN(), p), DistributionError);
  CHECK_THROWS_AS(eval_gaussian(std::numeric_limits<double>::infinity(), p), DistributionError);
  CHECK_THROWS_AS(GaussianParams(0.0, 0.0), DistributionError);
  CHECK_THROWS_AS(GaussianParams(0.0, -1.0), DistributionError);
}

TEST_CASE("student-t density") {
  const StudentTParams p(0.0, 3.0, 4.0);
  // 50-digit mpmath evaluation of the location-scale t formula.
  CHECK(eval_student_t(0.0, p) == doctest::Approx(0.2165063509461096616909308).epsilon(1e-14));

  const StudentTParams q(-1.5, 2.0, 5.0);
  for (double d : {0.3, 2.0, 17.0}) {
    CHECK(eval_student_t(-1.5 + d, q) == eval_student_t(-1.5 - d, q));
  }

  SUBCASE("approaches the gaussian as dof grows") {
    const double mu = 2.0;
    const double s2 = 3.0;
    const StudentTParams t(mu, s2, 1e6);
    const GaussianParams g(mu, s2);
    const double sd = std::sqrt(s2);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double x = mu - 5.0 * sd + 10.0 * sd * i / 2000.0;
      worst = std::max(worst, std::abs(eval_student_t(x, t) - eval_gaussian(x, g)));
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("heavier tails than the gaussian") {
    const GaussianParams g(1.0, 2.0);
    for (double dof : {1.0, 4.0, 30.0}) {
      const StudentTParams t(1.0, 2.0, dof);
      for (double z : {10.5, 12.0, 20.0}) {
        const double x = 1.0 + z * std::sqrt(2.0);
        CHECK(eval_student_t(x, t) > eval_gaussian(x, g));
        CHECK(eval_student_t(2.0 - x, t) > eval_gaussian(2.0 - x, g));
      }
    }
  }

  CHECK_THROWS_AS(StudentTParams(0.0, 1.0, 0.0), DistributionError);
  CHECK_THROWS_AS(StudentTParams(0.0, 0.0, 3.0), DistributionError);
  CHECK_THROWS_AS(eval_student_t(std::nan(""), p), DistributionError);
}

TEST_CASE("mixtures") {
  const GaussianParams g(0.7, 2.5);
  CHECK(eval_mixture(1.3, MixtureSpec({{1.0, g}})) == eval_gaussian(1.3, g));

  const auto target = two_mode_target();
  for (double d : {0.0, 0.5, 3.0, 7.25}) {
    CHECK(eval_mixture(1.0 + d, target) == doctest::Approx(eval_mixture(1.0 - d, target)).epsilon(1e-14));
  }
  // mpmath: 0.5 N(-3;-3,1) + 0.5 N(-3;5,1)
  CHECK(eval_mixture(-3.0, target) == doctest::Approx(0.1994711402007188651055148).epsilon(1e-14));
  CHECK(std::abs(integrate([&](double x) { return eval_mixture(x, target); }, -40.0, 40.0) - 1.0) < 1e-8);

  CHECK_THROWS_AS(MixtureSpec({}), DistributionError);
  CHECK_THROWS_AS(MixtureSpec({{0.5, g}, {0.4, g}}), DistributionError);
  CHECK_THROWS_AS(MixtureSpec({{1.5, g}}), DistributionError);
}

TEST_CASE("densities stay positive far in the tails") {
  const auto target = builtin_example1().target;
  for (double x : {-40.0, -25.0, 30.0}) {
    CHECK(std::isfinite(target.log_eval(x)));
  }
  CHECK(eval_student_t(1e6, StudentTParams(0.0, 1.0, 5.0)) > 0.0);
}

TEST_CASE("reference means") {
  CHECK(reference_mean(two_mode_target()) == doctest::Approx(1.0));
  CHECK(reference_mean(MixtureSpec({{1.0, StudentTParams(7.0, 2.0, 3.0)}})) == 7.0);

  const auto ex2 = builtin_example2().target;
  CHECK(ex2.reference_mean() == doctest::Approx(0.6).epsilon(1e-15));
  // Quadrature cross-check (mpmath gives 0.6 to 20 digits as well).
  const auto& mix = ex2.mixture();
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  const double quad_mean = gauss_kronrod<double, 61>::integrate(
      [&](double x) { return x * eval_mixture(x, mix); }, -inf, inf, 15, 1e-13);
  CHECK(quad_mean == doctest::Approx(0.6).epsilon(1e-8));

  CHECK_THROWS_AS(reference_mean(MixtureSpec({{1.0, StudentTParams(0.0, 1.0, 1.0)}})), DistributionError);
  CHECK_THROWS_AS(TargetSpec(MixtureSpec({{1.0, StudentTParams(0.0, 1.0, 0.5)}}), 1.0), DistributionError);
  CHECK(reference_second_moment(two_mode_target()) == doctest::Approx(0.5 * (9 + 1) + 0.5 * (25 + 1)));
}

TEST_CASE("sampling") {
  const GaussianParams g(2.0, 3.0);
  const StudentTParams t(-1.0, 3.0, 4.0);

  Rng a(2024);
  Rng b(2024);
  CHECK(g.sample(a) == g.sample(b));
  CHECK(t.sample(a) == t.sample(b));

  constexpr int n = 100000;
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += sample(g, rng);
  }
  CHECK(std::abs(sum / n - 2.0) < 3.0 * std::sqrt(3.0 / n));

  std::vector<double> draws(n);
  for (auto& d : draws) {
    d = sample(t, rng);
  }
  std::nth_element(draws.begin(), draws.begin() + n / 2, draws.end());
  // Standard error of the median: 1 / (2 f(mu) sqrt(n)).
  const double se = 1.0 / (2.0 * eval_student_t(-1.0, t) * std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(draws[n / 2] - (-1.0)) < 3.0 * se);
}
