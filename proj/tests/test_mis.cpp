#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "mislab/clustering.hpp"
#include "mislab/experiment.hpp"
#include "mislab/mis.hpp"

using namespace mislab;

namespace {

TargetSpec two_mode_target() {
  return TargetSpec(MixtureSpec({{0.5, GaussianParams(-3.0, 1.0)}, {0.5, GaussianParams(5.0, 1.0)}}), 1.0);
}

SampleSet fixed_samples(std::vector<double> values, std::size_t num_proposals) {
  SampleSet ss{{}, num_proposals, values.size() / num_proposals};
  for (std::size_t i = 0; i < values.size(); ++i) {
    ss.samples.push_back({values[i], i / ss.per_proposal});
  }
  return ss;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
           return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
         });
}

}  // namespace

TEST_CASE("draw_mis_samples layout") {
  const ProposalSet ps({GaussianParams(0, 1), GaussianParams(1, 1), GaussianParams(2, 1)});
  Rng rng(1);
  const auto one = draw_mis_samples(ps, 1, rng);
  REQUIRE(one.size() == 3);
  CHECK(one.samples[0].proposal == 0);
  CHECK(one.samples[1].proposal == 1);
  CHECK(one.samples[2].proposal == 2);

  const ProposalSet two({GaussianParams(0, 1), StudentTParams(3, 1, 4)});
  const auto four = draw_mis_samples(two, 4, rng);
  REQUIRE(four.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(four.samples[i].proposal == i / 4);
  }

  Rng a(99);
  Rng b(99);
  CHECK(draw_mis_samples(two, 3, a) == draw_mis_samples(two, 3, b));
  CHECK_THROWS_AS(draw_mis_samples(two, 0, a), MisError);
}

TEST_CASE("standard weights") {
  SUBCASE("proposal equal to the normalized target") {
    const GaussianParams g(1.0, 2.0);
    const TargetSpec target(MixtureSpec({{1.0, g}}), 1.0);
    const ProposalSet ps({g, g});
    Rng rng(3);
    const auto ss = draw_mis_samples(ps, 5, rng);
    const auto w = weights_standard(ss, ps, target);
    for (double v : w.weights) {
      CHECK(v == 1.0);
    }
    CHECK(w.evals.proposal == 10);
    CHECK(w.evals.target == 10);
  }
  SUBCASE("target twice the proposal") {
    const GaussianParams g(-1.0, 0.5);
    const TargetSpec target(MixtureSpec({{1.0, g}}), 2.0);
    const ProposalSet ps({g});
    const auto w = weights_standard(fixed_samples({-1.2, 0.4}, 1), ps, target);
    CHECK(w.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(w.weights[1] == doctest::Approx(2.0).epsilon(1e-15));
  }
  SUBCASE("two-mode target, sample at 0 from N(0, 3)") {
    const ProposalSet ps({GaussianParams(0.0, 3.0)});
    const auto w = weights_standard(fixed_samples({0.0}, 1), ps, two_mode_target());
    // mpmath, 50 digits.
    CHECK(w.weights[0] == doctest::Approx(0.009623900588989338596499171).epsilon(1e-13));
  }
}

TEST_CASE("deterministic mixture weights") {
  const auto target = two_mode_target();
  SUBCASE("single proposal matches standard") {
    const ProposalSet ps({GaussianParams(0.5, 2.0)});
    Rng rng(5);
    const auto ss = draw_mis_samples(ps, 6, rng);
    CHECK(same_bits(weights_dm(ss, ps, target).weights, weights_standard(ss, ps, target).weights));
  }
  SUBCASE("identical proposals match standard") {
    const GaussianParams g(0.5, 2.0);
    const ProposalSet ps({g, g, g, g});
    Rng rng(6);
    const auto ss = draw_mis_samples(ps, 2, rng);
    const auto dm = weights_dm(ss, ps, target).weights;
    const auto st = weights_standard(ss, ps, target).weights;
    for (std::size_t i = 0; i < dm.size(); ++i) {
      CHECK(dm[i] == doctest::Approx(st[i]).epsilon(1e-14));
    }
  }
  SUBCASE("two proposals, hand oracle") {
    const ProposalSet ps({GaussianParams(0.0, 1.0), GaussianParams(4.0, 1.0)});
    SampleSet ss{{{1.0, 0}, {3.5, 1}}, 2, 1};
    const auto w = weights_dm(ss, ps, target);
    // mpmath: pi(1) / (0.5 phi(1;0,1) + 0.5 phi(1;4,1))
    CHECK(w.weights[0] == doctest::Approx(0.001086272957079206967966624).epsilon(1e-13));
    CHECK(w.evals.proposal == 4);
  }
}

TEST_CASE("partial weights") {
  const auto target = two_mode_target();
  SUBCASE("hand oracle, N=4, subsets {1,3} {2,4}") {
    const ProposalSet ps({GaussianParams(-2.0, 1.0), GaussianParams(0.0, 2.0), GaussianParams(1.0, 0.5),
                          GaussianParams(3.0, 1.5)});
    const auto ss = fixed_samples({-1.5, 0.3, 2.0, 2.7}, 4);
    const Partition part({{0, 2}, {1, 3}}, 4);
    const auto w = weights_partial(ss, ps, target, part);
    // mpmath, 50 digits.
    CHECK(w.weights[0] == doctest::Approx(0.3667448874250236694093844).epsilon(1e-13));
    CHECK(w.weights[1] == doctest::Approx(0.005678049136157729026651196).epsilon(1e-13));
    CHECK(w.weights[2] == doctest::Approx(0.02134617368146781693981387).epsilon(1e-13));
    CHECK(w.weights[3] == doctest::Approx(0.07831636008165640665723185).epsilon(1e-13));
    CHECK(w.evals.proposal == 8);
    CHECK(w.evals.target == 4);
  }
  SUBCASE("mismatched partition") {
    const ProposalSet ps({GaussianParams(0, 1), GaussianParams(1, 1)});
    const auto ss = fixed_samples({0.0, 1.0}, 2);
    CHECK_THROWS_AS(weights_partial(ss, ps, target, Partition::whole(4)), PartitionError);
  }
}

TEST_CASE("weight rules: degeneracies, bounds and counts over random sample sets") {
  const auto cfg = builtin_example1();
  const auto ps = cfg.proposals.build();
  const std::size_t n = ps.size();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t k = seed % 4 + 1;
    const auto ss = draw_mis_samples(ps, k, rng);
    const auto st = weights_standard(ss, ps, cfg.target);
    const auto dm = weights_dm(ss, ps, cfg.target);
    const std::size_t p = std::size_t{1} << (seed % 6);
    const auto part = random_partition(n, p, rng);
    const auto pa = weights_partial(ss, ps, cfg.target, part);
    const double m = static_cast<double>(n / p);

    CHECK(same_bits(weights_partial(ss, ps, cfg.target, Partition::whole(n)).weights, dm.weights));
    CHECK(same_bits(weights_partial(ss, ps, cfg.target, Partition::singletons(n)).weights, st.weights));
    for (std::size_t i = 0; i < ss.size(); ++i) {
      CHECK(std::isfinite(st.weights[i]));
      CHECK(st.weights[i] >= 0.0);
      CHECK(dm.weights[i] <= static_cast<double>(n) * st.weights[i] * (1 + 1e-12));
      CHECK(pa.weights[i] <= m * st.weights[i] * (1 + 1e-12));
    }
    CHECK(st.evals.proposal == ss.size());
    CHECK(dm.evals.proposal == ss.size() * n);
    CHECK(pa.evals.proposal == ss.size() * (n / p));
  }
}

TEST_CASE("normalize_weights") {
  auto norm = [](std::vector<double> w) { return normalize_weights({w, WeightScheme::standard, {}}).weights; };
  CHECK(norm({1, 1, 1, 1}) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(norm({2, 0}) == std::vector<double>{1.0, 0.0});
  CHECK(norm({3, 1, 4}) == std::vector<double>{0.375, 0.125, 0.5});
  CHECK_THROWS_WITH_AS(norm({0, 0, 0}), "degenerate weight vector", MisError);

  Rng rng(11);
  std::exponential_distribution<double> e(0.3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> w(1 + t * 7);
    for (auto& v : w) {
      v = e(rng);
    }
    const auto out = norm(w);
    CHECK(std::accumulate(out.begin(), out.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("estimators") {
  const auto ss = fixed_samples({0.0, 1.0, 2.0}, 3);
  const WeightVector w{{3.0, 1.0, 4.0}, WeightScheme::standard, {}};
  const auto id = MomentFunction::identity();

  CHECK(estimate_self_normalized(ss, w, id) == 1.125);
  CHECK(estimate_self_normalized(ss, {{2.0, 2.0, 2.0}, WeightScheme::standard, {}}, id) == doctest::Approx(1.0));
  CHECK(estimate_self_normalized(fixed_samples({4.5}, 1), {{17.0}, WeightScheme::standard, {}}, id) == 4.5);
  CHECK(estimate_self_normalized(ss, w, MomentFunction::square()) == doctest::Approx((1.0 + 16.0) / 8.0));
  CHECK(estimate_self_normalized(ss, w, MomentFunction::custom([](double x) { return x + 1.0; })) ==
        doctest::Approx(2.125));

  const WeightVector ones{{1.0, 1.0, 1.0}, WeightScheme::standard, {}};
  CHECK(estimate_unnormalized(ss, ones, id, 1.0) == doctest::Approx(1.0));
  CHECK(estimate_unnormalized(ss, w, id, 2.0) == doctest::Approx(estimate_unnormalized(ss, w, id, 1.0) / 2.0));
  CHECK_THROWS_AS(estimate_unnormalized(ss, w, id, 0.0), MisError);

  CHECK(estimate_z({{2.5, 2.5, 2.5, 2.5}, WeightScheme::dm, {}}) == 2.5);
  CHECK(estimate_z(w) == doctest::Approx(8.0 / 3.0));
  CHECK(max_normalized_weight(w) == 0.5);
  CHECK_THROWS_AS(estimate_self_normalized(ss, {{0.0, 0.0, 0.0}, WeightScheme::standard, {}}, id), MisError);
}

TEST_CASE("unnormalized estimate on a fixed-seed two-mode run matches an independent evaluation") {
  const auto cfg = builtin_example1();
  const auto ps = cfg.proposals.build();
  Rng rng(20161016);
  const auto ss = draw_mis_samples(ps, 1, rng);
  REQUIRE(ss.size() == 32);
  // First and last draws, printed at 17 digits when this oracle was frozen.
  CHECK(ss.samples.front().value == doctest::Approx(-9.0769472912816358).epsilon(1e-15));
  CHECK(ss.samples.back().value == doctest::Approx(7.4845195188913802).epsilon(1e-15));
  const auto f = MomentFunction::identity();
  // Reference values: mpmath (50 digits) over the 32 drawn values.
  CHECK(estimate_unnormalized(ss, weights_standard(ss, ps, cfg.target), f, 1.0) ==
        doctest::Approx(-0.02486836331308639919502133).epsilon(1e-12));
  CHECK(estimate_unnormalized(ss, weights_dm(ss, ps, cfg.target), f, 1.0) ==
        doctest::Approx(0.2934208073387496978786937).epsilon(1e-12));
}
