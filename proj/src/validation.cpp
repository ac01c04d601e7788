#include "mislab/validation.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "mislab/clustering.hpp"
#include "mislab/experiment.hpp"

namespace mislab {

namespace {

constexpr std::size_t kBootstrapResamples = 400;

struct Outcome {
  bool passed;
  std::string detail;
};

bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) {
      return false;
    }
  }
  return true;
}

double sample_variance(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  return variance_of(v) * n / (n - 1.0);
}

// Per-(scheme, P, k) estimator populations from a kept-runs experiment.
struct Populations {
  std::map<std::tuple<Scheme, std::size_t, std::size_t>, std::vector<const RunResult*>> cells;

  explicit Populations(const std::vector<RunResult>& runs) {
    for (const auto& r : runs) {
      cells[{r.scheme, r.num_subsets, r.k}].push_back(&r);
    }
  }

  std::vector<double> values(Scheme s, std::size_t p, std::size_t k,
                             const std::function<double(const EstimateRecord&)>& field) const {
    std::vector<double> out;
    for (const auto* r : cells.at({s, p, k})) {
      out.push_back(field(r->estimate));
    }
    return out;
  }
};

double self_normalized(const EstimateRecord& e) { return e.self_normalized; }
double unnormalized(const EstimateRecord& e) { return e.unnormalized.value_or(0.0); }

Outcome check_degeneracies(const ValidationOptions& opts) {
  const auto cfg = builtin_example1();
  const auto ps = cfg.proposals.build();
  const std::size_t n = ps.size();
  const auto whole = Partition::whole(n);
  const auto singles = Partition::singletons(n);
  int dm_mismatch = 0;
  int std_mismatch = 0;
  int alpha0_mismatch = 0;
  for (std::size_t s = 0; s < 100; ++s) {
    Rng rng(derive_seed(opts.seed, Scheme::p_dm, 0, s % 5 + 1, s));
    const auto ss = draw_mis_samples(ps, s % 5 + 1, rng);
    dm_mismatch += !bit_identical(weights_partial(ss, ps, cfg.target, whole).weights,
                                  weights_dm(ss, ps, cfg.target).weights);
    std_mismatch += !bit_identical(weights_partial(ss, ps, cfg.target, singles).weights,
                                   weights_standard(ss, ps, cfg.target).weights);

    const std::uint64_t shared = derive_seed(opts.seed, Scheme::h_dm, 16, 0, s);
    Rng hdm_rng(shared);
    const auto hdm = hdm_weights(ss, ps, cfg.target, {.num_subsets = 16, .alpha = 0.0}, hdm_rng);
    Rng pdm_rng(shared);
    const auto part = random_partition(n, 16, pdm_rng);
    const auto pdm = weights_partial(ss, ps, cfg.target, part);
    alpha0_mismatch += !(hdm.clustering.partition == part) || !bit_identical(hdm.weights.weights, pdm.weights);
  }
  return {dm_mismatch == 0 && std_mismatch == 0 && alpha0_mismatch == 0,
          fmt::format("mismatching sample sets: P=1 vs DM {}, P=N vs standard {}, alpha=0 vs p-DM {}",
                      dm_mismatch, std_mismatch, alpha0_mismatch)};
}

Outcome check_variance_ordering(const ValidationOptions& opts) {
  auto cfg = builtin_example1();
  cfg.schemes = {Scheme::s_mis, Scheme::dm, Scheme::p_dm};
  cfg.p_values = {16};
  cfg.k_values = {1};
  cfg.n_runs = 5000;
  cfg.base_seed = opts.seed;
  cfg.threads = opts.threads;
  const auto out = run_experiment(cfg, true);
  const Populations pop(out.runs);
  const auto dm = pop.values(Scheme::dm, 1, 1, unnormalized);
  const auto pdm = pop.values(Scheme::p_dm, 16, 1, unnormalized);
  const auto smis = pop.values(Scheme::s_mis, 32, 1, unnormalized);
  const double v_dm = variance_of(dm);
  const double v_p = variance_of(pdm);
  const double v_s = variance_of(smis);
  auto var_stat = [](std::span<const double> v) { return variance_of(v); };
  const double se_dm = bootstrap_standard_error(dm, var_stat, kBootstrapResamples, opts.seed + 1);
  const double se_s = bootstrap_standard_error(smis, var_stat, kBootstrapResamples, opts.seed + 2);
  const double gap_se = std::hypot(se_dm, se_s);
  const bool ordered = v_dm <= v_p && v_p <= v_s;
  const bool separated = v_s - v_dm > 2.0 * gap_se;
  return {ordered && separated,
          fmt::format("Var(I^): dm {:.4e} <= p-dm {:.4e} <= s-mis {:.4e}; s-mis - dm = {:.4e} vs 2se {:.4e}",
                      v_dm, v_p, v_s, v_s - v_dm, 2.0 * gap_se)};
}

Outcome check_example1_mse_ordering(const ValidationOptions& opts) {
  auto cfg = builtin_example1();
  cfg.n_runs = 5000;
  cfg.base_seed = opts.seed;
  cfg.threads = opts.threads;
  const auto out = run_experiment(cfg, true);
  const Populations pop(out.runs);
  const double truth = cfg.reference_value();
  auto mse_stat = [truth](std::span<const double> v) { return mse_of(v, truth); };
  bool ordered = true;
  int significant = 0;
  std::string detail;
  for (std::size_t k : cfg.k_values) {
    const auto dm = pop.values(Scheme::dm, 1, k, self_normalized);
    const auto hdm = pop.values(Scheme::h_dm, 16, k, self_normalized);
    const auto pdm = pop.values(Scheme::p_dm, 16, k, self_normalized);
    const auto smis = pop.values(Scheme::s_mis, 32, k, self_normalized);
    const double m_dm = mse_of(dm, truth);
    const double m_h = mse_of(hdm, truth);
    const double m_p = mse_of(pdm, truth);
    const double m_s = mse_of(smis, truth);
    const bool ok = m_dm <= m_h && m_h <= m_p && m_p <= m_s;
    ordered = ordered && ok;
    const double se = std::hypot(
        bootstrap_standard_error(hdm, mse_stat, kBootstrapResamples, opts.seed + 10 * k),
        bootstrap_standard_error(pdm, mse_stat, kBootstrapResamples, opts.seed + 10 * k + 1));
    const bool sig = m_p - m_h > 2.0 * se;
    significant += sig;
    detail += fmt::format("k={}: {:.3e}/{:.3e}/{:.3e}/{:.3e}{}{}; ", k, m_dm, m_h, m_p, m_s,
                          ok ? "" : " ORDER", sig ? " sig" : "");
  }
  detail += fmt::format("(dm/h-dm/p-dm/s-mis); significant h-dm < p-dm at {} of 5 k", significant);
  return {ordered && significant >= 4, detail};
}

Outcome check_example2(const ValidationOptions& opts) {
  auto cfg = builtin_example2();
  cfg.n_runs = 5000;
  cfg.base_seed = opts.seed;
  cfg.threads = opts.threads;
  const auto rows = run_experiment(cfg);
  std::map<std::pair<Scheme, std::size_t>, const SummaryRow*> by_cell;
  for (const auto& r : rows) {
    by_cell[{r.scheme, r.P}] = &r;
  }
  bool ok = true;
  std::string detail;
  for (std::size_t p : {2, 4, 8, 16}) {
    const auto& h = *by_cell.at({Scheme::h_dm, p});
    const auto& pd = *by_cell.at({Scheme::p_dm, p});
    const bool cell_ok = h.mse_unnormalized <= pd.mse_unnormalized &&
                         h.mse_self_normalized <= pd.mse_self_normalized;
    ok = ok && cell_ok;
    detail += fmt::format("P={}: I^ {:.3e} vs {:.3e}, I~ {:.3e} vs {:.3e}{}; ", p, h.mse_unnormalized,
                          pd.mse_unnormalized, h.mse_self_normalized, pd.mse_self_normalized,
                          cell_ok ? "" : " FAIL");
  }

  // Degenerate P: both pipelines on one shared sample set.
  const auto ps = cfg.proposals.build();
  int mismatches = 0;
  for (std::size_t p : {1, 32}) {
    for (std::size_t r = 0; r < cfg.n_runs; ++r) {
      const auto seed = derive_seed(opts.seed, Scheme::p_dm, p, 1, r);
      Rng pdm_rng(seed);
      const auto ss = draw_mis_samples(ps, 1, pdm_rng);
      Rng hdm_rng = pdm_rng;
      const auto part = random_partition(ps.size(), p, pdm_rng);
      const auto pdm = weights_partial(ss, ps, cfg.target, part);
      const auto hdm = hdm_weights(ss, ps, cfg.target, {.num_subsets = p, .alpha = cfg.alpha}, hdm_rng);
      mismatches += !bit_identical(pdm.weights, hdm.weights.weights);
    }
  }
  ok = ok && mismatches == 0;
  detail += fmt::format("(h-dm vs p-dm); P in {{1,32}} weight mismatches: {}", mismatches);
  return {ok, detail};
}

Outcome check_z_unbiased(const ValidationOptions& opts) {
  auto cfg = builtin_example1();
  cfg.schemes = {Scheme::s_mis, Scheme::dm, Scheme::p_dm};
  cfg.p_values = {16};
  cfg.k_values = {1};
  cfg.n_runs = 10000;
  cfg.base_seed = opts.seed ^ 0x2a2a2a2aULL;
  cfg.threads = opts.threads;
  const auto out = run_experiment(cfg, true);
  const Populations pop(out.runs);
  const double z = cfg.target.normalizing_constant();
  bool ok = true;
  std::string detail;
  const std::pair<Scheme, std::size_t> cells[] = {{Scheme::s_mis, 32}, {Scheme::dm, 1}, {Scheme::p_dm, 16}};
  for (const auto& [scheme, p] : cells) {
    const auto zs = pop.values(scheme, p, 1, [](const EstimateRecord& e) { return e.z_hat; });
    const double dev = std::abs(mean_of(zs) - z);
    const double bound = 3.0 * std::sqrt(sample_variance(zs)) / std::sqrt(static_cast<double>(zs.size()));
    ok = ok && dev < bound;
    detail += fmt::format("{}: |mean-Z| {:.3e} < {:.3e}{}; ", scheme_name(scheme), dev, bound,
                          dev < bound ? "" : " FAIL");
  }
  return {ok, detail};
}

Outcome check_eval_counts(const ValidationOptions& opts) {
  const auto cfg = builtin_example1();
  const auto ps = cfg.proposals.build();
  const std::uint64_t n = ps.size();
  Rng rng(opts.seed);
  const auto ss = draw_mis_samples(ps, 1, rng);
  const auto s = weights_standard(ss, ps, cfg.target);
  const auto d = weights_dm(ss, ps, cfg.target);
  Rng prng(opts.seed + 1);
  const auto p = weights_partial(ss, ps, cfg.target, random_partition(n, 16, prng));
  Rng hrng(opts.seed + 2);
  const auto h_exh = hdm_weights(ss, ps, cfg.target,
                                 {.num_subsets = 16, .alpha = 1.0, .search = SearchMode::exhaustive}, hrng);
  Rng hrng2(opts.seed + 2);
  const auto h_fast = hdm_weights(ss, ps, cfg.target,
                                  {.num_subsets = 16, .alpha = 1.0, .search = SearchMode::automatic}, hrng2);
  bool ok = s.evals.proposal == 32 && d.evals.proposal == 1024 && p.evals.proposal == 64 &&
            h_exh.weights.evals.proposal == 64 && h_fast.weights.evals.proposal == 64 &&
            s.evals.target == 32 && d.evals.target == 32 && p.evals.target == 32 &&
            h_exh.clustering.search_evals > 0 && h_exh.clustering.search_evals <= n * n &&
            h_fast.clustering.search_evals == 0 && h_exh.clustering.partition == h_fast.clustering.partition;
  std::string detail = fmt::format(
      "k=1: s-mis {}, dm {}, p-dm {}, h-dm reweighting {}; h-dm search {} exhaustive / {} shortcut",
      s.evals.proposal, d.evals.proposal, p.evals.proposal, h_exh.weights.evals.proposal,
      h_exh.clustering.search_evals, h_fast.clustering.search_evals);

  // Closed forms across k through the experiment runner.
  auto small = builtin_example1();
  small.n_runs = 3;
  small.base_seed = opts.seed;
  for (const auto& row : run_experiment(small)) {
    const double l = static_cast<double>(row.L);
    const double expected = row.scheme == Scheme::s_mis ? l
                            : row.scheme == Scheme::dm  ? l * static_cast<double>(n)
                                                        : l * static_cast<double>(row.M);
    if (row.mean_proposal_evals != expected) {
      ok = false;
      detail += fmt::format("; {} k={} has {} evals, expected {}", scheme_name(row.scheme), row.k,
                            row.mean_proposal_evals, expected);
    }
  }
  return {ok, detail};
}

Outcome check_max_weight(const ValidationOptions& opts) {
  auto cfg = builtin_example1();
  cfg.schemes = {Scheme::s_mis, Scheme::h_dm};
  cfg.p_values = {16};
  cfg.alpha = 1.0;
  cfg.k_values = {1};
  cfg.n_runs = 5000;
  cfg.base_seed = opts.seed;
  cfg.threads = opts.threads;
  const auto out = run_experiment(cfg, true);
  const Populations pop(out.runs);
  auto field = [](const EstimateRecord& e) { return e.max_normalized_weight; };
  const auto h = pop.values(Scheme::h_dm, 16, 1, field);
  const auto s = pop.values(Scheme::s_mis, 32, 1, field);
  const double gap = mean_of(s) - mean_of(h);
  const double se = std::sqrt(sample_variance(h) / static_cast<double>(h.size()) +
                              sample_variance(s) / static_cast<double>(s.size()));
  return {gap > 2.0 * se, fmt::format("mean max weight: h-dm {:.4f}, s-mis {:.4f}, gap {:.4f} vs 2se {:.4f}",
                                      mean_of(h), mean_of(s), gap, 2.0 * se)};
}

Outcome check_clustering_fixtures(const ValidationOptions& opts) {
  // Samples 3,1,4,2 (1-based) in descending weight; q2 is nearest to x3.
  const ProposalSet ps({GaussianParams(0.0, 1.0), GaussianParams(10.0, 1.0),
                        GaussianParams(20.0, 1.0), GaussianParams(30.0, 1.0)});
  SampleSet ss{{{25.0, 0}, {10.0, 1}, {12.0, 2}, {30.0, 3}}, 4, 1};
  WeightVector w{{3.0, 1.0, 4.0, 2.0}, WeightScheme::standard, {}};
  Rng rng(opts.seed);
  const auto traced = heretical_partition(ss, w, ps, {.num_subsets = 2, .alpha = 1.0}, rng);
  const Partition expected({{2, 1}, {0, 3}}, 4);
  bool ok = traced.partition == expected;
  std::string detail = fmt::format("fixture partition {}", ok ? "{{3,2},{1,4}}" : "MISMATCH");

  // Alpha threshold: weight-driven placement stops once ceil(alpha N) proposals are placed.
  const auto cfg = builtin_example1();
  const auto grid = cfg.proposals.build();
  int violations = 0;
  for (double alpha : {0.0, 0.1, 0.25, 0.5, 1.0}) {
    const auto threshold = static_cast<std::size_t>(std::ceil(alpha * 32.0));
    for (std::size_t r = 0; r < 20; ++r) {
      Rng srng(derive_seed(opts.seed, Scheme::h_dm, 16, 1, r));
      const auto sample_set = draw_mis_samples(grid, 1, srng);
      const auto sw = weights_standard(sample_set, grid, cfg.target);
      const auto res = heretical_partition(sample_set, sw, grid, {.num_subsets = 16, .alpha = alpha}, srng);
      const auto placed_by_weight = static_cast<std::size_t>(std::count_if(
          res.provenance.begin(), res.provenance.end(),
          [](Provenance p) { return p == Provenance::weight_driven || p == Provenance::random_fallback; }));
      const auto random_tail = static_cast<std::size_t>(
          std::count(res.provenance.begin(), res.provenance.end(), Provenance::alpha_random));
      // A pair placement can overshoot the threshold by one.
      const bool stop_ok = placed_by_weight >= threshold && placed_by_weight <= threshold + 1 &&
                           placed_by_weight + random_tail == 32;
      violations += !stop_ok;
    }
  }
  ok = ok && violations == 0;
  detail += fmt::format("; alpha-threshold violations {}", violations);
  return {ok, detail};
}

double integrate_real_line(const std::function<double(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  // Split at the +-40 window so the central mass is integrated on a finite range.
  total += gauss_kronrod<double, 61>::integrate(f, -inf, -40.0, 15, 1e-14);
  for (double a = -40.0; a < 40.0; a += 5.0) {
    total += gauss_kronrod<double, 61>::integrate(f, a, a + 5.0, 15, 1e-14);
  }
  total += gauss_kronrod<double, 61>::integrate(f, 40.0, inf, 15, 1e-14);
  return total;
}

Outcome check_density_layer(const ValidationOptions&) {
  double worst = 0.0;
  int checked = 0;
  for (int ex : {1, 2}) {
    const auto cfg = builtin_example(ex);
    const auto& mix = cfg.target.mixture();
    worst = std::max(worst, std::abs(integrate_real_line([&](double x) { return eval_mixture(x, mix); }) - 1.0));
    ++checked;
    const auto ps = cfg.proposals.build();
    for (const auto& q : ps.proposals()) {
      worst = std::max(worst, std::abs(integrate_real_line([&](double x) { return density(q, x); }) - 1.0));
      ++checked;
    }
  }
  double limit_gap = 0.0;
  for (const auto& [mu, s2] : {std::pair{0.0, 1.0}, std::pair{2.0, 3.0}, std::pair{-3.0, 0.5}}) {
    const GaussianParams g(mu, s2);
    const StudentTParams t(mu, s2, 1e6);
    const double sd = std::sqrt(s2);
    for (int i = 0; i <= 1000; ++i) {
      const double x = mu - 5.0 * sd + 10.0 * sd * i / 1000.0;
      limit_gap = std::max(limit_gap, std::abs(eval_student_t(x, t) - eval_gaussian(x, g)));
    }
  }
  return {worst <= 1e-8 && limit_gap < 1e-6,
          fmt::format("{} densities, worst |integral - 1| = {:.2e}; nu=1e6 max |t - gaussian| = {:.2e}",
                      checked, worst, limit_gap)};
}

struct CriterionSpec {
  int id;
  const char* title;
  double budget_seconds;
  Outcome (*check)(const ValidationOptions&);
};

constexpr CriterionSpec kCriteria[] = {
    {1, "exact scheme degeneracies (P=1, P=N, alpha=0)", 5.0, check_degeneracies},
    {2, "variance ordering dm <= p-dm <= s-mis for I^", 30.0, check_variance_ordering},
    {3, "two-mode Gaussian target: MSE(I~) dm <= h-dm <= p-dm <= s-mis", 120.0, check_example1_mse_ordering},
    {4, "Student-t target: h-dm beats p-dm, degenerate P identical", 120.0, check_example2},
    {5, "Z-hat unbiasedness for s-mis, dm, p-dm", 60.0, check_z_unbiased},
    {6, "proposal-evaluation counts", 5.0, check_eval_counts},
    {7, "largest normalized weight attenuated by h-dm", 30.0, check_max_weight},
    {8, "clustering fixtures (hand trace, alpha threshold)", 5.0, check_clustering_fixtures},
    {9, "density normalization and Student-t limit", 5.0, check_density_layer},
};

}  // namespace

std::vector<int> criteria_for_example(int example) {
  switch (example) {
    case 1:
      return {1, 2, 3, 5, 6, 7, 8, 9};
    case 2:
      return {4, 8, 9};
    default:
      throw ConfigError(fmt::format("no built-in example {} (expected 1 or 2)", example));
  }
}

CriterionResult run_criterion(int id, const ValidationOptions& opts) {
  const auto* spec = std::find_if(std::begin(kCriteria), std::end(kCriteria),
                                  [id](const CriterionSpec& c) { return c.id == id; });
  if (spec == std::end(kCriteria)) {
    throw ConfigError(fmt::format("no acceptance criterion {}", id));
  }
  CriterionResult result{
      .id = id, .title = spec->title, .passed = false, .detail = {}, .seconds = 0.0, .budget_seconds = spec->budget_seconds};
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome{false, ""};
  try {
    outcome = spec->check(opts);
  } catch (const std::exception& e) {
    outcome = {false, fmt::format("threw: {}", e.what())};
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.detail = outcome.detail;
  result.passed = outcome.passed && result.seconds < result.budget_seconds;
  if (outcome.passed && !result.passed) {
    result.detail += "; over time budget";
  }
  return result;
}

std::vector<CriterionResult> run_validation(std::span<const int> ids, const ValidationOptions& opts,
                                            std::ostream* out) {
  std::vector<CriterionResult> results;
  for (int id : ids) {
    results.push_back(run_criterion(id, opts));
    if (out != nullptr) {
      fmt::print(*out, "{}\n", format_result(results.back()));
      out->flush();
    }
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  return fmt::format("[{}] AC{} {} ({:.2f} s, budget {:.0f} s): {}", r.passed ? "PASS" : "FAIL", r.id,
                     r.title, r.seconds, r.budget_seconds, r.detail);
}

}  // namespace mislab
