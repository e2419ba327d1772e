#include "walkbounds/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "walkbounds/walk.hpp"

namespace walkbounds {

namespace {

using Keys = std::set<std::string>;

void check_keys(const YAML::Node& node, const std::string& path, const Keys& allowed) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "wrong type");
  }
}

double get_number(const YAML::Node& node, const std::string& path) {
  const auto d = get<double>(node, path);
  if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
  return d;
}

long get_positive(const YAML::Node& node, const std::string& path) {
  const auto v = get<long>(node, path);
  if (v <= 0) throw ConfigError(path, "must be positive");
  return v;
}

GroupSpec parse_group(const YAML::Node& n, const std::string& path) {
  check_keys(n, path,
             {"kind", "rank", "order", "label", "labels", "weights", "full", "factors",
              "convention"});
  if (!n["kind"]) throw ConfigError(path + ".kind", "missing");
  const auto kind = get<std::string>(n["kind"], path + ".kind");
  GroupSpec s;
  auto labels = [&]() {
    std::vector<std::string> out;
    if (n["labels"]) out = get<std::vector<std::string>>(n["labels"], path + ".labels");
    if (n["label"]) out = {get<std::string>(n["label"], path + ".label")};
    return out;
  };
  if (kind == "free" || kind == "free_abelian") {
    if (!n["rank"]) throw ConfigError(path + ".rank", "missing");
    const int rank = static_cast<int>(get_positive(n["rank"], path + ".rank"));
    s = kind == "free" ? GroupSpec::free(rank, labels()) : GroupSpec::free_abelian(rank, labels());
  } else if (kind == "cyclic" || kind == "integers") {
    long order = 0;
    if (kind == "cyclic") {
      if (!n["order"]) throw ConfigError(path + ".order", "missing");
      const auto text = get<std::string>(n["order"], path + ".order");
      if (text != "inf") {
        order = get<long>(n["order"], path + ".order");
        if (order != 0 && order < 2) throw ConfigError(path + ".order", "must be >= 2 or inf");
      }
    }
    const auto l = labels();
    s = GroupSpec::cyclic(order, l.empty() ? "" : l.front());
    if (n["full"]) s.full_generating_set = get<bool>(n["full"], path + ".full");
  } else if (kind == "free_product" || kind == "direct_product") {
    if (!n["factors"] || !n["factors"].IsSequence()) {
      throw ConfigError(path + ".factors", "expected a list");
    }
    std::vector<GroupSpec> factors;
    for (std::size_t i = 0; i < n["factors"].size(); ++i) {
      factors.push_back(parse_group(n["factors"][i], path + ".factors[" + std::to_string(i) + "]"));
    }
    if (kind == "free_product") {
      s = GroupSpec::free_product(std::move(factors));
    } else {
      ProductConvention conv = ProductConvention::Union;
      if (n["convention"]) {
        const auto c = get<std::string>(n["convention"], path + ".convention");
        if (c == "synchronized") {
          conv = ProductConvention::Synchronized;
        } else if (c != "union") {
          throw ConfigError(path + ".convention", "expected union or synchronized");
        }
      }
      s = GroupSpec::direct_product(std::move(factors), conv);
    }
  } else {
    throw ConfigError(path + ".kind", "unknown group kind '" + kind + "'");
  }
  if (n["weights"]) {
    const auto& w = n["weights"];
    if (!w.IsMap()) throw ConfigError(path + ".weights", "expected a mapping");
    for (const auto& kv : w) {
      const auto label = kv.first.as<std::string>();
      const double x = get_number(kv.second, path + ".weights." + label);
      if (!(x > 0)) throw ConfigError(path + ".weights." + label, "weight must be positive");
      s.weights[label] = x;
    }
  }
  return s;
}

Constant parse_constant(const YAML::Node& n, const std::string& path, bool need_citation) {
  Constant c;
  if (n.IsScalar()) {
    c.value = get_number(n, path);
  } else {
    check_keys(n, path, {"value", "citation", "note"});
    if (!n["value"]) throw ConfigError(path + ".value", "missing");
    c.value = get_number(n["value"], path + ".value");
    if (n["citation"]) c.citation = get<std::string>(n["citation"], path + ".citation");
    if (n["note"]) c.citation = get<std::string>(n["note"], path + ".note");
  }
  if (need_citation && c.citation.empty()) {
    throw ConfigError(path + ".citation", "external constants must carry a citation");
  }
  return c;
}

const Keys kQuantities{"h", "ell", "rho", "v"};
const Keys kSources{"exact", "boundary", "exact_walk", "monte_carlo", "census", "external"};

}  // namespace

std::vector<std::string> default_sources(const std::string& q) {
  if (q == "h") return {"exact", "boundary", "exact_walk", "external"};
  if (q == "ell") return {"exact", "boundary", "monte_carlo", "exact_walk", "external"};
  if (q == "rho") return {"exact", "boundary", "exact_walk", "external"};
  if (q == "v") return {"exact", "external", "census"};
  return {};
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("parse error: ") + e.what());
  }
  check_keys(root, "",
             {"name", "description", "group", "measure", "stages", "budgets", "seed",
              "tolerances", "series_terms", "poisson_times", "sources", "exact", "external"});
  RunConfig cfg;
  if (!root["name"]) throw ConfigError("name", "missing");
  cfg.name = get<std::string>(root["name"], "name");
  if (root["description"]) cfg.description = get<std::string>(root["description"], "description");
  if (root["group"]) cfg.group = parse_group(root["group"], "group");

  if (const auto m = root["measure"]) {
    check_keys(m, "measure", {"uniform", "support", "mass_tol"});
    MeasureConfig mc;
    if (m["uniform"]) mc.uniform = get<bool>(m["uniform"], "measure.uniform");
    if (m["mass_tol"]) mc.mass_tol = get_number(m["mass_tol"], "measure.mass_tol");
    if (m["support"]) {
      if (!m["support"].IsMap()) throw ConfigError("measure.support", "expected a mapping");
      for (const auto& kv : m["support"]) {
        const auto word = kv.first.as<std::string>();
        mc.support.push_back({word, get_number(kv.second, "measure.support." + word)});
      }
    }
    if (mc.uniform == !mc.support.empty()) {
      throw ConfigError("measure", "give exactly one of uniform: true or support");
    }
    cfg.measure = mc;
  }

  if (root["stages"]) {
    const auto list = get<std::vector<std::string>>(root["stages"], "stages");
    for (const auto& s : list) {
      if (std::find(known_stages().begin(), known_stages().end(), s) == known_stages().end()) {
        throw ConfigError("stages", "unknown stage '" + s + "'");
      }
      cfg.stages.insert(s);
    }
  }

  if (const auto b = root["budgets"]) {
    check_keys(b, "budgets",
               {"n_max", "ball_radius", "max_elements", "memory_bytes", "mc_paths", "mc_steps",
                "hitting_samples", "horizon", "cocycle_samples", "prune_eps", "poisson_prune_eps", "chebyshev_n"});
    auto& B = cfg.budgets;
    if (b["n_max"]) B.n_max = static_cast<int>(get_positive(b["n_max"], "budgets.n_max"));
    if (b["ball_radius"]) {
      B.ball_radius = static_cast<int>(get_positive(b["ball_radius"], "budgets.ball_radius"));
    }
    if (b["max_elements"]) B.max_elements = get_positive(b["max_elements"], "budgets.max_elements");
    if (b["memory_bytes"]) {
      const double mem = get_number(b["memory_bytes"], "budgets.memory_bytes");
      if (!(mem > 0)) throw ConfigError("budgets.memory_bytes", "must be positive");
      B.memory_bytes = static_cast<std::uint64_t>(mem);
    }
    if (b["mc_paths"]) B.mc_paths = get_positive(b["mc_paths"], "budgets.mc_paths");
    if (b["mc_steps"]) B.mc_steps = static_cast<int>(get_positive(b["mc_steps"], "budgets.mc_steps"));
    if (b["hitting_samples"]) {
      B.hitting_samples = get_positive(b["hitting_samples"], "budgets.hitting_samples");
    }
    if (b["horizon"]) B.horizon = get_positive(b["horizon"], "budgets.horizon");
    if (b["cocycle_samples"]) {
      B.cocycle_samples = get_positive(b["cocycle_samples"], "budgets.cocycle_samples");
    }
    if (b["prune_eps"]) {
      B.prune_eps = get_number(b["prune_eps"], "budgets.prune_eps");
      if (B.prune_eps < 0) throw ConfigError("budgets.prune_eps", "must be >= 0");
    }
    if (b["poisson_prune_eps"]) {
      B.poisson_prune_eps = get_number(b["poisson_prune_eps"], "budgets.poisson_prune_eps");
      if (B.poisson_prune_eps < 0) throw ConfigError("budgets.poisson_prune_eps", "must be >= 0");
    }
    if (b["chebyshev_n"]) {
      B.chebyshev_n = static_cast<int>(get_positive(b["chebyshev_n"], "budgets.chebyshev_n"));
    }
  }

  if (root["seed"]) cfg.seed = get<std::uint64_t>(root["seed"], "seed");

  if (const auto t = root["tolerances"]) {
    check_keys(t, "tolerances", {"equality", "sigma_factor", "detector"});
    if (t["equality"]) cfg.tolerances.equality = get_number(t["equality"], "tolerances.equality");
    if (t["sigma_factor"]) {
      cfg.tolerances.sigma_factor = get_number(t["sigma_factor"], "tolerances.sigma_factor");
    }
    if (t["detector"]) cfg.tolerances.detector = get_number(t["detector"], "tolerances.detector");
    if (!(cfg.tolerances.equality > 0)) throw ConfigError("tolerances.equality", "must be positive");
  }
  if (root["series_terms"]) {
    cfg.series_terms = static_cast<int>(get_positive(root["series_terms"], "series_terms"));
  }
  if (root["poisson_times"]) {
    cfg.poisson_times = get<std::vector<double>>(root["poisson_times"], "poisson_times");
    for (double t : cfg.poisson_times) {
      if (!(t > 0)) throw ConfigError("poisson_times", "times must be positive");
    }
  }
  if (const auto s = root["sources"]) {
    check_keys(s, "sources", kQuantities);
    for (const auto& kv : s) {
      const auto q = kv.first.as<std::string>();
      auto list = get<std::vector<std::string>>(kv.second, "sources." + q);
      for (const auto& src : list) {
        if (!kSources.count(src)) throw ConfigError("sources." + q, "unknown source '" + src + "'");
      }
      cfg.sources[q] = std::move(list);
    }
  }
  if (const auto e = root["exact"]) {
    check_keys(e, "exact", kQuantities);
    for (const auto& kv : e) {
      const auto q = kv.first.as<std::string>();
      cfg.exact[q] = parse_constant(kv.second, "exact." + q, false);
    }
  }
  if (const auto e = root["external"]) {
    check_keys(e, "external", {"h", "ell", "rho", "v", "rho_upper", "rho_lower", "M2"});
    for (const auto& kv : e) {
      const auto q = kv.first.as<std::string>();
      cfg.external[q] = parse_constant(kv.second, "external." + q, true);
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<Diagnostic> validate_config(const RunConfig& cfg) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string field, std::string msg) {
    out.push_back({"error", std::move(field), std::move(msg)});
  };
  auto warn = [&](std::string field, std::string msg) {
    out.push_back({"warning", std::move(field), std::move(msg)});
  };
  static const Keys walk_stages{"census", "exact_walk", "monte_carlo", "boundary", "chebyshev",
                                "poisson", "properties"};
  bool needs_walk = false;
  for (const auto& s : cfg.stages) needs_walk |= walk_stages.count(s) > 0 && s != "census";
  if (cfg.stages.count("census") && !cfg.group) error("group", "census needs a group");
  if (needs_walk && (!cfg.group || !cfg.measure)) {
    error(cfg.group ? "measure" : "group", "walk stages need a group and a measure");
  }
  if ((cfg.stages.count("monte_carlo") || cfg.stages.count("boundary")) && !cfg.seed) {
    error("seed", "a seed is required when Monte Carlo stages are enabled");
  }
  if (cfg.budgets.n_max < 3 && cfg.stages.count("exact_walk")) {
    error("budgets.n_max", "exact_walk needs n_max >= 3");
  }
  std::optional<Group> group;
  if (cfg.group) {
    try {
      group.emplace(*cfg.group);
    } catch (const Error& e) {
      error("group", e.what());
    }
  }
  if (group && cfg.measure) {
    const auto& m = *cfg.measure;
    if (!m.uniform) {
      double mass = 0;
      for (const auto& [w, p] : m.support) {
        mass += p;
        if (!(p > 0)) error("measure.support." + w, "probabilities must be positive");
        try {
          group->parse(w);
        } catch (const Error& e) {
          error("measure.support." + w, e.what());
        }
      }
      if (std::abs(mass - 1.0) > m.mass_tol) {
        std::ostringstream os;
        os.precision(12);
        os << "total mass " << mass << " differs from 1 by more than " << m.mass_tol;
        error("measure.support", os.str());
      }
    }
    bool ok = std::none_of(out.begin(), out.end(),
                           [](const Diagnostic& d) { return d.severity == "error"; });
    if (ok) {
      try {
        const Measure mu = m.uniform ? uniform_on_generators(*group)
                                     : build_measure(*group, m.support, m.mass_tol);
        if (!mu.is_symmetric()) {
          warn("measure", "measure is not symmetric; the sharp inequalities will be skipped");
        }
        // Generation: every generator must be reachable from the support.
        std::unordered_set<Element, ElementHash> seen{group->identity()};
        std::vector<Element> frontier{group->identity()};
        const std::size_t cap = 20000;
        while (!frontier.empty() && seen.size() < cap) {
          std::vector<Element> next;
          for (const auto& x : frontier) {
            for (const auto& s : mu.elements()) {
              auto y = group->compose(x, s);
              if (seen.insert(y).second) next.push_back(std::move(y));
              if (seen.size() >= cap) break;
            }
          }
          frontier = std::move(next);
        }
        for (const auto& g : group->generators()) {
          if (!seen.count(g.element)) {
            error("measure.support", "support does not generate the group: " + g.label +
                                         " not reached within " + std::to_string(seen.size()) +
                                         " elements");
            break;
          }
        }
      } catch (const Error& e) {
        error("measure", e.what());
      }
    }
  }
  for (const auto& [q, c] : cfg.exact) {
    if (q == "rho" && !(c.value > 0 && c.value <= 1)) error("exact.rho", "must lie in (0, 1]");
  }
  return out;
}

}  // namespace walkbounds
