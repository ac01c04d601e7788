// mislab: run replicated MIS experiments and the acceptance checks.
//
//   mislab run --example 1 --runs 5000 --out results.csv
//   mislab run --config my.toml --schemes p-dm,h-dm --p 2,4,8
//   mislab validate --example 2

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>
#include <sstream>

#include "mislab/experiment.hpp"
#include "mislab/validation.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple importance sampling laboratory"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and report MSE tables");
  int example = 0;
  std::string config_path;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string dump_path;
  std::string schemes;
  std::optional<double> alpha;
  std::string p_list;
  std::optional<unsigned> threads;
  bool exhaustive = false;
  auto* ex_opt = run->add_option("--example", example, "built-in example (1 or 2)")->check(CLI::IsMember({1, 2}));
  auto* cfg_opt = run->add_option("--config", config_path, "TOML experiment file")->check(CLI::ExistingFile);
  ex_opt->excludes(cfg_opt);
  run->add_option("--runs", runs, "replications per cell")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "base seed");
  run->add_option("--out", out_path, "write the summary CSV here (default: table on stdout)");
  run->add_option("--dump-runs", dump_path, "write one CSV row per run here");
  run->add_option("--schemes", schemes, "comma list of s-mis,dm,p-dm,h-dm");
  run->add_option("--alpha", alpha, "fraction of proposals clustered by weight")->check(CLI::Range(0.0, 1.0));
  run->add_option("--p", p_list, "comma list of subset counts P");
  run->add_option("--threads", threads, "replication worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--exhaustive-search", exhaustive, "always evaluate every candidate density when clustering");

  auto* validate = app.add_subcommand("validate", "run the acceptance checks for a built-in example");
  int validate_example = 1;
  std::uint64_t validate_seed = mislab::ValidationOptions{}.seed;
  unsigned validate_threads = 1;
  validate->add_option("--example", validate_example, "built-in example (1 or 2)")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  validate->add_option("--seed", validate_seed, "base seed for the checks");
  validate->add_option("--threads", validate_threads, "replication worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (ex_opt->count() == 0 && cfg_opt->count() == 0) {
        throw CLI::RequiredError("--example or --config");
      }
      auto cfg = cfg_opt->count() > 0 ? mislab::load_config(config_path) : mislab::builtin_example(example);
      if (runs) cfg.n_runs = *runs;
      if (seed) cfg.base_seed = *seed;
      if (alpha) cfg.alpha = *alpha;
      if (threads) cfg.threads = *threads;
      if (exhaustive) cfg.search = mislab::SearchMode::exhaustive;
      if (!schemes.empty()) {
        cfg.schemes.clear();
        for (const auto& s : split_list(schemes)) {
          cfg.schemes.push_back(mislab::parse_scheme(s));
        }
      }
      if (!p_list.empty()) {
        cfg.p_values.clear();
        for (const auto& p : split_list(p_list)) {
          cfg.p_values.push_back(std::stoul(p));
        }
      }
      const auto output = mislab::run_experiment(cfg, !dump_path.empty());
      if (out_path.empty()) {
        mislab::print_table(output.rows, std::cout);
      } else {
        mislab::write_csv(output.rows, out_path);
      }
      if (!dump_path.empty()) {
        mislab::write_runs_csv(output.runs, dump_path);
      }
      return 0;
    }

    const mislab::ValidationOptions opts{.seed = validate_seed, .threads = validate_threads};
    const auto ids = mislab::criteria_for_example(validate_example);
    const auto results = mislab::run_validation(ids, opts, &std::cout);
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
    fmt::print("{} of {} checks passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "mislab: {}\n", e.what());
    return 2;
  }
}
