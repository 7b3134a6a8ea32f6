#include "trajmc_cli/run_config.hpp"

#include <fstream>
#include <sstream>

#include "toml.hpp"

#include <trajmc/errors.hpp>

namespace trajmc::cli {
namespace {

namespace fs = std::filesystem;

toml::table parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return toml::parse(ss.str(), path);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
}

std::string resolve(const fs::path& source, const std::string& p) {
  if (p.empty()) return p;
  const fs::path q(p);
  if (q.is_absolute()) return p;
  return (source.parent_path() / q).lexically_normal().string();
}

VecX vector_of(const toml::node_view<const toml::node>& node, const std::string& what) {
  const auto* arr = node.as_array();
  if (arr == nullptr) throw ConfigError(what + " must be an array of numbers");
  VecX v(static_cast<Eigen::Index>(arr->size()));
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto x = (*arr)[i].value<double>();
    if (!x) throw ConfigError(what + " has a non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = *x;
  }
  return v;
}

template <class T>
T get(const toml::table& t, const char* key, T fallback) {
  return t[key].value_or(fallback);
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const fs::path& source) {
  toml::table t;
  try {
    t = toml::parse(text, source.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source.string() << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  const toml::table& ct = t;
  RunConfig c;
  c.source = source;
  c.problem = resolve(source, get(ct, "problem", std::string{}));
  if (c.problem.empty()) throw ConfigError(source.string() + ": 'problem' is required");
  if (const auto end = ct["homotopy_end"].value<std::string>()) {
    c.homotopy_end = resolve(source, *end);
  }
  c.algorithm = parse_algorithm(get(ct, "algorithm", std::string{"mala"}));
  c.n_chains = static_cast<int>(get<std::int64_t>(ct, "n_chains", 1));
  c.seed = static_cast<std::uint64_t>(get<std::int64_t>(ct, "seed", 0));
  c.threads = static_cast<int>(get<std::int64_t>(ct, "threads", 1));
  c.checkpoint_every = static_cast<int>(get<std::int64_t>(ct, "checkpoint_every", 0));
  if (const auto n = ct["n_orb"].value<std::int64_t>()) c.n_orb = static_cast<int>(*n);
  c.feasibility_tol = get(ct, "feasibility_tol", kDefaultFeasibilityTol);
  if (ct["sigma_init"]) c.sigma_init = vector_of(ct["sigma_init"], "sigma_init");
  c.schedule.burn_in = static_cast<int>(get<std::int64_t>(ct, "burn_in", 0));

  if (const auto* init = ct["init"].as_table()) {
    const std::string kind = (*init)["kind"].value_or(std::string{"gaussian"});
    if (kind == "gaussian") {
      c.init.kind = InitKind::Gaussian;
    } else if (kind == "dataset") {
      c.init.kind = InitKind::Dataset;
    } else if (kind == "model") {
      c.init.kind = InitKind::Model;
    } else {
      throw ConfigError("init.kind must be gaussian, dataset or model");
    }
    c.init.path = resolve(source, (*init)["path"].value_or(std::string{}));
    if ((*init)["mean"]) c.init.mean = vector_of((*init)["mean"], "init.mean");
    if ((*init)["std"]) c.init.std = vector_of((*init)["std"], "init.std");
    c.init.full_covariance = (*init)["covariance"].value_or(std::string{"full"}) == "full";
    c.init.count = static_cast<int>((*init)["count"].value_or(std::int64_t{0}));
  } else {
    throw ConfigError(source.string() + ": an [init] table is required");
  }

  const auto* stages = ct["stages"].as_array();
  if (stages == nullptr || stages->empty()) {
    throw ConfigError(source.string() + ": at least one [[stages]] entry is required");
  }
  for (const auto& node : *stages) {
    const auto* st = node.as_table();
    if (st == nullptr) throw ConfigError("[[stages]] entries must be tables");
    Stage s;
    s.h = (*st)["h"].value_or(0.0);
    s.iterations = static_cast<int>((*st)["iterations"].value_or(std::int64_t{0}));
    s.sigma_scale = (*st)["sigma_scale"].value_or(s.sigma_scale);
    s.epsilon = (*st)["epsilon"].value_or(s.epsilon);
    s.leapfrog = static_cast<int>((*st)["leapfrog"].value_or(std::int64_t{1}));
    s.beta = (*st)["beta"].value_or(s.beta);
    s.kappa1 = (*st)["kappa1"].value_or(s.kappa1);
    s.kappa2 = (*st)["kappa2"].value_or(s.kappa2);
    c.schedule.stages.push_back(s);
  }
  c.schedule.validate();
  if (c.n_chains < 1) throw ConfigError("n_chains must be positive");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), fs::path(path));
}

ModelRunConfig load_model_config(const std::string& path) {
  const toml::table t = parse_file(path);
  ModelRunConfig c;
  c.source = path;
  c.dataset = resolve(c.source, t["dataset"].value_or(std::string{}));
  c.base_model = resolve(c.source, t["base_model"].value_or(std::string{}));
  c.samples = resolve(c.source, t["samples"].value_or(std::string{}));
  if (const auto* m = t["model"].as_table()) {
    c.embed_dim = static_cast<int>((*m)["embed_dim"].value_or(std::int64_t{c.embed_dim}));
    c.hidden = static_cast<int>((*m)["hidden"].value_or(std::int64_t{c.hidden}));
    c.hidden_layers =
        static_cast<int>((*m)["hidden_layers"].value_or(std::int64_t{c.hidden_layers}));
    c.schedule_steps =
        static_cast<int>((*m)["schedule_steps"].value_or(std::int64_t{c.schedule_steps}));
  }
  if (const auto* tr = t["train"].as_table()) {
    c.steps = static_cast<int>((*tr)["steps"].value_or(std::int64_t{c.steps}));
    c.batch = static_cast<int>((*tr)["batch"].value_or(std::int64_t{c.batch}));
    c.learning_rate = (*tr)["learning_rate"].value_or(c.learning_rate);
    c.optimizer = (*tr)["optimizer"].value_or(c.optimizer);
  }
  c.seed = static_cast<std::uint64_t>(t["seed"].value_or(std::int64_t{0}));
  c.count = static_cast<int>(t["count"].value_or(std::int64_t{c.count}));
  if (c.optimizer != "adam" && c.optimizer != "sgd") {
    throw ConfigError(path + ": train.optimizer must be adam or sgd");
  }
  return c;
}

}  // namespace trajmc::cli
