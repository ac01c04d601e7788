#include "mislab/experiment.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace mislab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

MixtureSpec equal_weight_gaussians(std::span<const double> means, double variance) {
  std::vector<ProposalFamily> comps;
  for (double m : means) {
    comps.emplace_back(GaussianParams(m, variance));
  }
  return MixtureSpec::uniform(comps);
}

MixtureSpec equal_weight_student_t(std::span<const double> locations, double scale_sq, double dof) {
  std::vector<ProposalFamily> comps;
  for (double m : locations) {
    comps.emplace_back(StudentTParams(m, scale_sq, dof));
  }
  return MixtureSpec::uniform(comps);
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::s_mis:
      return "s-mis";
    case Scheme::dm:
      return "dm";
    case Scheme::p_dm:
      return "p-dm";
    case Scheme::h_dm:
      return "h-dm";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::s_mis, Scheme::dm, Scheme::p_dm, Scheme::h_dm}) {
    if (scheme_name(s) == name) {
      return s;
    }
  }
  throw ConfigError(fmt::format("unknown scheme '{}' (expected s-mis, dm, p-dm or h-dm)", name));
}

double ProposalGrid::location(std::size_t j) const {
  if (count == 1) {
    return lower;
  }
  return lower + (upper - lower) * static_cast<double>(j) / static_cast<double>(count - 1);
}

ProposalSet ProposalGrid::build() const {
  std::vector<ProposalFamily> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    if (family == Family::gaussian) {
      out.emplace_back(GaussianParams(location(j), scale_sq));
    } else {
      out.emplace_back(StudentTParams(location(j), scale_sq, dof));
    }
  }
  return ProposalSet(std::move(out));
}

void ExperimentConfig::validate() const {
  const std::size_t n = proposals.count;
  if (n < 1) {
    throw ConfigError("proposal count must be at least 1");
  }
  if (!(proposals.lower < proposals.upper)) {
    throw ConfigError("proposal interval needs lower < upper");
  }
  if (!(proposals.scale_sq > 0.0) || (proposals.family == Family::student_t && !(proposals.dof > 0.0))) {
    throw ConfigError("proposal scale_sq and dof must be positive");
  }
  if (schemes.empty()) {
    throw ConfigError("at least one scheme is required");
  }
  if (k_values.empty()) {
    throw ConfigError("at least one k value is required");
  }
  for (std::size_t k : k_values) {
    if (k < 1) {
      throw ConfigError("k values must be at least 1");
    }
  }
  const bool partitioned = std::any_of(schemes.begin(), schemes.end(), [](Scheme s) {
    return s == Scheme::p_dm || s == Scheme::h_dm;
  });
  if (partitioned && p_values.empty()) {
    throw ConfigError("p-dm and h-dm need at least one P value");
  }
  for (std::size_t p : p_values) {
    if (p == 0 || n % p != 0) {
      throw ConfigError(fmt::format("P = {} does not divide N = {}", p, n));
    }
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1]");
  }
  if (n_runs < 1) {
    throw ConfigError("n_runs must be at least 1");
  }
  if (threads < 1) {
    throw ConfigError("threads must be at least 1");
  }
  (void)reference_value();
}

MomentFunction ExperimentConfig::moment_function() const {
  return moment == Moment::identity ? MomentFunction::identity() : MomentFunction::square();
}

double ExperimentConfig::reference_value() const {
  try {
    return moment == Moment::identity ? target.reference_mean()
                                      : reference_second_moment(target.mixture());
  } catch (const DistributionError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig builtin_example1() {
  const double means[] = {-3.0, 5.0};
  return ExperimentConfig{
      .name = "example1",
      .target = TargetSpec(equal_weight_gaussians(means, 1.0), 1.0),
      .proposals = {.family = Family::gaussian, .count = 32, .lower = -8.0, .upper = 8.0,
                    .scale_sq = 3.0, .dof = 0.0},
      .schemes = {Scheme::s_mis, Scheme::dm, Scheme::p_dm, Scheme::h_dm},
      .p_values = {16},
      .alpha = 1.0,
      .k_values = {1, 2, 3, 4, 5},
  };
}

ExperimentConfig builtin_example2() {
  const double locations[] = {-3.0, -1.0, 0.0, 3.0, 4.0};
  return ExperimentConfig{
      .name = "example2",
      .target = TargetSpec(equal_weight_student_t(locations, 1.0, 5.0), 1.0),
      .proposals = {.family = Family::student_t, .count = 32, .lower = -8.0, .upper = 8.0,
                    .scale_sq = 3.0, .dof = 4.0},
      .schemes = {Scheme::p_dm, Scheme::h_dm},
      .p_values = {1, 2, 4, 8, 16, 32},
      .alpha = 0.1,
      .k_values = {1},
  };
}

ExperimentConfig builtin_example(int which) {
  switch (which) {
    case 1:
      return builtin_example1();
    case 2:
      return builtin_example2();
    default:
      throw ConfigError(fmt::format("no built-in example {} (expected 1 or 2)", which));
  }
}

std::uint64_t derive_seed(std::uint64_t base_seed, Scheme scheme, std::size_t num_subsets,
                          std::size_t k, std::size_t run) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(scheme));
  h = splitmix64(h ^ static_cast<std::uint64_t>(num_subsets));
  h = splitmix64(h ^ static_cast<std::uint64_t>(k));
  return splitmix64(h ^ static_cast<std::uint64_t>(run));
}

EstimateRecord run_single(const ExperimentConfig& cfg, const ProposalSet& ps, Scheme scheme,
                          std::size_t num_subsets, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  const auto ss = draw_mis_samples(ps, k, rng);
  const auto f = cfg.moment_function();
  switch (scheme) {
    case Scheme::s_mis:
      return summarize(ss, weights_standard(ss, ps, cfg.target), f, cfg.target);
    case Scheme::dm:
      return summarize(ss, weights_dm(ss, ps, cfg.target), f, cfg.target);
    case Scheme::p_dm: {
      const auto part = random_partition(ps.size(), num_subsets, rng);
      return summarize(ss, weights_partial(ss, ps, cfg.target, part), f, cfg.target);
    }
    case Scheme::h_dm: {
      const HereticalConfig hc{.num_subsets = num_subsets, .alpha = cfg.alpha, .search = cfg.search};
      const auto out = hdm_weights(ss, ps, cfg.target, hc, rng);
      auto rec = summarize(ss, out.weights, f, cfg.target);
      rec.search_evals = out.clustering.search_evals;
      return rec;
    }
  }
  throw ConfigError("unknown scheme");
}

std::vector<CellKey> experiment_cells(const ExperimentConfig& cfg) {
  std::vector<CellKey> cells;
  for (Scheme s : cfg.schemes) {
    std::vector<std::size_t> ps;
    if (s == Scheme::s_mis) {
      ps = {cfg.proposals.count};
    } else if (s == Scheme::dm) {
      ps = {1};
    } else {
      ps = cfg.p_values;
    }
    for (std::size_t p : ps) {
      for (std::size_t k : cfg.k_values) {
        cells.push_back({s, p, k});
      }
    }
  }
  std::sort(cells.begin(), cells.end(), [](const CellKey& a, const CellKey& b) {
    return std::tuple(a.scheme, a.num_subsets, a.k) < std::tuple(b.scheme, b.num_subsets, b.k);
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const CellKey& a, const CellKey& b) {
                            return a.scheme == b.scheme && a.num_subsets == b.num_subsets &&
                                   a.k == b.k;
                          }),
              cells.end());
  return cells;
}

std::vector<RunResult> run_cell(const ExperimentConfig& cfg, const ProposalSet& ps,
                                const CellKey& cell) {
  std::vector<RunResult> runs(cfg.n_runs);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto seed = derive_seed(cfg.base_seed, cell.scheme, cell.num_subsets, cell.k, r);
      runs[r] = {cell.scheme, cell.num_subsets, cell.k, r,
                 run_single(cfg, ps, cell.scheme, cell.num_subsets, cell.k, seed)};
    }
  };
  const std::size_t workers = std::min<std::size_t>(cfg.threads, cfg.n_runs);
  if (workers <= 1) {
    work(0, cfg.n_runs);
    return runs;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (cfg.n_runs + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(cfg.n_runs, begin + chunk);
    if (begin < end) {
      pool.emplace_back(work, begin, end);
    }
  }
  return runs;
}

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double variance_of(std::span<const double> values) {
  const double m = mean_of(values);
  double acc = 0.0;
  for (double v : values) {
    acc += (v - m) * (v - m);
  }
  return acc / static_cast<double>(values.size());
}

double mse_of(std::span<const double> values, double reference) {
  double acc = 0.0;
  for (double v : values) {
    acc += (v - reference) * (v - reference);
  }
  return acc / static_cast<double>(values.size());
}

SummaryRow summarize_cell(const ExperimentConfig& cfg, const CellKey& cell,
                          std::span<const RunResult> runs) {
  const double truth = cfg.reference_value();
  std::vector<double> sn, un, z, maxw, pe, se;
  for (const auto& r : runs) {
    sn.push_back(r.estimate.self_normalized);
    un.push_back(r.estimate.unnormalized.value_or(0.0));
    z.push_back(r.estimate.z_hat);
    maxw.push_back(r.estimate.max_normalized_weight);
    pe.push_back(static_cast<double>(r.estimate.proposal_evals));
    se.push_back(static_cast<double>(r.estimate.search_evals));
  }
  const std::size_t n = cfg.proposals.count;
  const double bias_sn = mean_of(sn) - truth;
  const double bias_un = mean_of(un) - truth;
  return SummaryRow{
      .scheme = cell.scheme,
      .P = cell.num_subsets,
      .M = n / cell.num_subsets,
      .k = cell.k,
      .L = cell.k * n,
      .n_runs = runs.size(),
      .mse_self_normalized = mse_of(sn, truth),
      .mse_unnormalized = mse_of(un, truth),
      .variance_self_normalized = variance_of(sn),
      .variance_unnormalized = variance_of(un),
      .bias_sq_self_normalized = bias_sn * bias_sn,
      .bias_sq_unnormalized = bias_un * bias_un,
      .mean_z_hat = mean_of(z),
      .mean_max_normalized_weight = mean_of(maxw),
      .mean_proposal_evals = mean_of(pe),
      .mean_search_evals = mean_of(se),
      .base_seed = cfg.base_seed,
  };
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool keep_runs) {
  cfg.validate();
  const auto ps = cfg.proposals.build();
  ExperimentOutput out;
  for (const auto& cell : experiment_cells(cfg)) {
    auto runs = run_cell(cfg, ps, cell);
    out.rows.push_back(summarize_cell(cfg, cell, runs));
    if (keep_runs) {
      out.runs.insert(out.runs.end(), runs.begin(), runs.end());
    }
  }
  return out;
}

std::vector<SummaryRow> run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, false).rows;
}

std::string csv_header() {
  return "scheme,P,M,k,L,n_runs,mse_self_normalized,mse_unnormalized,variance_self_normalized,"
         "variance_unnormalized,bias_sq_self_normalized,bias_sq_unnormalized,mean_z_hat,"
         "mean_max_normalized_weight,mean_proposal_evals,mean_search_evals,base_seed";
}

std::string format_csv(std::span<const SummaryRow> rows) {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) {
    out += fmt::format(
        "{},{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
        "{:.17g},{:.17g},{}\n",
        scheme_name(r.scheme), r.P, r.M, r.k, r.L, r.n_runs, r.mse_self_normalized,
        r.mse_unnormalized, r.variance_self_normalized, r.variance_unnormalized,
        r.bias_sq_self_normalized, r.bias_sq_unnormalized, r.mean_z_hat,
        r.mean_max_normalized_weight, r.mean_proposal_evals, r.mean_search_evals, r.base_seed);
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view field) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("malformed CSV field '{}'", field));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  }
  file << text;
  if (!file) {
    throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
  }
}

}  // namespace

std::vector<SummaryRow> parse_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (lines.empty() || lines.front() != csv_header()) {
    throw ConfigError("CSV header does not match the summary format");
  }
  std::vector<SummaryRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      continue;
    }
    const auto f = split(lines[i], ',');
    if (f.size() != kSummaryFieldCount) {
      throw ConfigError(fmt::format("CSV line {} has {} fields", i + 1, f.size()));
    }
    rows.push_back(SummaryRow{
        .scheme = parse_scheme(f[0]),
        .P = parse_number<std::size_t>(f[1]),
        .M = parse_number<std::size_t>(f[2]),
        .k = parse_number<std::size_t>(f[3]),
        .L = parse_number<std::size_t>(f[4]),
        .n_runs = parse_number<std::size_t>(f[5]),
        .mse_self_normalized = parse_number<double>(f[6]),
        .mse_unnormalized = parse_number<double>(f[7]),
        .variance_self_normalized = parse_number<double>(f[8]),
        .variance_unnormalized = parse_number<double>(f[9]),
        .bias_sq_self_normalized = parse_number<double>(f[10]),
        .bias_sq_unnormalized = parse_number<double>(f[11]),
        .mean_z_hat = parse_number<double>(f[12]),
        .mean_max_normalized_weight = parse_number<double>(f[13]),
        .mean_proposal_evals = parse_number<double>(f[14]),
        .mean_search_evals = parse_number<double>(f[15]),
        .base_seed = parse_number<std::uint64_t>(f[16]),
    });
  }
  return rows;
}

void write_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) {
    throw ConfigError("no summary rows to write");
  }
  write_text(path, format_csv(rows));
}

void print_table(std::span<const SummaryRow> rows, std::ostream& out) {
  fmt::print(out, "{:<6} {:>4} {:>4} {:>3} {:>5} {:>14} {:>14} {:>14} {:>12} {:>10} {:>10}\n",
             "scheme", "P", "M", "k", "L", "mse(I~)", "mse(I^)", "bias^2(I~)", "mean Z^",
             "max w", "q evals");
  for (const auto& r : rows) {
    fmt::print(out,
               "{:<6} {:>4} {:>4} {:>3} {:>5} {:>14.6e} {:>14.6e} {:>14.6e} {:>12.6f} {:>10.4f} "
               "{:>10.1f}\n",
               scheme_name(r.scheme), r.P, r.M, r.k, r.L, r.mse_self_normalized,
               r.mse_unnormalized, r.bias_sq_self_normalized, r.mean_z_hat,
               r.mean_max_normalized_weight, r.mean_proposal_evals);
  }
}

std::string format_runs_csv(std::span<const RunResult> runs) {
  std::string out =
      "scheme,P,k,run,self_normalized,unnormalized,z_hat,max_normalized_weight,target_evals,"
      "proposal_evals,search_evals\n";
  for (const auto& r : runs) {
    const auto& e = r.estimate;
    out += fmt::format("{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{}\n",
                       scheme_name(r.scheme), r.num_subsets, r.k, r.run, e.self_normalized,
                       e.unnormalized.value_or(0.0), e.z_hat, e.max_normalized_weight,
                       e.target_evals, e.proposal_evals, e.search_evals);
  }
  return out;
}

void write_runs_csv(std::span<const RunResult> runs, const std::filesystem::path& path) {
  write_text(path, format_runs_csv(runs));
}

}  // namespace mislab
