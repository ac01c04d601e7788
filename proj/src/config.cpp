// TOML experiment files.
//
//   name = "my-run"
//   [target]      family, locations, scale_sq, dof, weights (optional), normalizing_constant (optional)
//   [proposals]   family, count, interval = [lo, hi], scale_sq, dof
//   [experiment]  schemes, p_values, alpha, k_values, runs, seed, moment, search, threads
//
// Any [experiment] key left out keeps the default of ExperimentConfig.

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <toml.hpp>

#include "mislab/experiment.hpp"

namespace mislab {

namespace {

Family parse_family(std::string_view name) {
  if (name == "gaussian") {
    return Family::gaussian;
  }
  if (name == "student_t") {
    return Family::student_t;
  }
  throw ConfigError(fmt::format("unknown family '{}' (expected gaussian or student_t)", name));
}

const toml::table& require_table(const toml::table& root, std::string_view key) {
  const auto* t = root[key].as_table();
  if (t == nullptr) {
    throw ConfigError(fmt::format("missing [{}] table", key));
  }
  return *t;
}

double require_number(const toml::table& t, std::string_view key) {
  const auto v = t[key].value<double>();
  if (!v) {
    throw ConfigError(fmt::format("missing numeric key '{}'", key));
  }
  return *v;
}

std::vector<double> number_list(const toml::table& t, std::string_view key) {
  const auto* arr = t[key].as_array();
  if (arr == nullptr) {
    throw ConfigError(fmt::format("missing array key '{}'", key));
  }
  std::vector<double> out;
  for (const auto& node : *arr) {
    const auto v = node.value<double>();
    if (!v) {
      throw ConfigError(fmt::format("array '{}' must hold numbers", key));
    }
    out.push_back(*v);
  }
  return out;
}

std::vector<std::size_t> count_list(const toml::table& t, std::string_view key) {
  const auto* arr = t[key].as_array();
  if (arr == nullptr) {
    throw ConfigError(fmt::format("missing array key '{}'", key));
  }
  std::vector<std::size_t> out;
  for (const auto& node : *arr) {
    const auto v = node.value<std::int64_t>();
    if (!v || *v < 0) {
      throw ConfigError(fmt::format("array '{}' must hold non-negative integers", key));
    }
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

TargetSpec parse_target(const toml::table& t) {
  const auto family = parse_family(t["family"].value_or(std::string("gaussian")));
  const auto locations = number_list(t, "locations");
  if (locations.empty()) {
    throw ConfigError("target needs at least one location");
  }
  const double scale_sq = require_number(t, "scale_sq");
  std::vector<double> weights;
  if (t.contains("weights")) {
    weights = number_list(t, "weights");
    if (weights.size() != locations.size()) {
      throw ConfigError("target weights and locations differ in length");
    }
  } else {
    weights.assign(locations.size(), 1.0 / static_cast<double>(locations.size()));
  }
  std::vector<MixtureComponent> comps;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (family == Family::gaussian) {
      comps.push_back({weights[i], GaussianParams(locations[i], scale_sq)});
    } else {
      comps.push_back({weights[i], StudentTParams(locations[i], scale_sq, require_number(t, "dof"))});
    }
  }
  return TargetSpec(MixtureSpec(std::move(comps)), t["normalizing_constant"].value_or(1.0));
}

ProposalGrid parse_grid(const toml::table& t) {
  ProposalGrid g;
  g.family = parse_family(t["family"].value_or(std::string("gaussian")));
  const auto count = t["count"].value<std::int64_t>();
  if (!count || *count < 1) {
    throw ConfigError("proposals.count must be a positive integer");
  }
  g.count = static_cast<std::size_t>(*count);
  const auto interval = number_list(t, "interval");
  if (interval.size() != 2) {
    throw ConfigError("proposals.interval must be [lower, upper]");
  }
  g.lower = interval[0];
  g.upper = interval[1];
  g.scale_sq = require_number(t, "scale_sq");
  if (g.family == Family::student_t) {
    g.dof = require_number(t, "dof");
  }
  return g;
}

ExperimentConfig from_table(const toml::table& root) {
  ExperimentConfig cfg{
      .name = root["name"].value_or(std::string("custom")),
      .target = parse_target(require_table(root, "target")),
      .proposals = parse_grid(require_table(root, "proposals")),
      .schemes = {Scheme::s_mis, Scheme::dm, Scheme::p_dm, Scheme::h_dm},
      .p_values = {},
      .k_values = {1},
  };

  if (const auto* e = root["experiment"].as_table()) {
    if (const auto* arr = (*e)["schemes"].as_array()) {
      cfg.schemes.clear();
      for (const auto& node : *arr) {
        const auto name = node.value<std::string>();
        if (!name) {
          throw ConfigError("experiment.schemes must hold strings");
        }
        cfg.schemes.push_back(parse_scheme(*name));
      }
    }
    if (e->contains("p_values")) {
      cfg.p_values = count_list(*e, "p_values");
    }
    if (e->contains("k_values")) {
      cfg.k_values = count_list(*e, "k_values");
    }
    cfg.alpha = (*e)["alpha"].value_or(cfg.alpha);
    if (const auto runs = (*e)["runs"].value<std::int64_t>()) {
      if (*runs < 1) {
        throw ConfigError("experiment.runs must be at least 1");
      }
      cfg.n_runs = static_cast<std::size_t>(*runs);
    }
    if (const auto seed = (*e)["seed"].value<std::int64_t>()) {
      cfg.base_seed = static_cast<std::uint64_t>(*seed);
    }
    if (const auto threads = (*e)["threads"].value<std::int64_t>()) {
      cfg.threads = static_cast<unsigned>(std::max<std::int64_t>(*threads, 0));
    }
    if (const auto moment = (*e)["moment"].value<std::string>()) {
      if (*moment == "identity") {
        cfg.moment = Moment::identity;
      } else if (*moment == "square") {
        cfg.moment = Moment::square;
      } else {
        throw ConfigError(fmt::format("unknown moment '{}' (expected identity or square)", *moment));
      }
    }
    if (const auto search = (*e)["search"].value<std::string>()) {
      if (*search == "automatic") {
        cfg.search = SearchMode::automatic;
      } else if (*search == "exhaustive") {
        cfg.search = SearchMode::exhaustive;
      } else {
        throw ConfigError(fmt::format("unknown search '{}' (expected automatic or exhaustive)", *search));
      }
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view toml_text) {
  try {
    return from_table(toml::parse(toml_text));
  } catch (const toml::parse_error& e) {
    throw ConfigError(fmt::format("TOML parse error: {}", e.description()));
  } catch (const DistributionError& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace mislab
