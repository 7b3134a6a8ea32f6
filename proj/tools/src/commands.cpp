#include "trajmc_cli/commands.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include <trajmc/checkpoint.hpp>
#include <trajmc/csv.hpp>
#include <trajmc/ddpm.hpp>
#include <trajmc/errors.hpp>
#include <trajmc/problem_config.hpp>
#include <trajmc/screening.hpp>
#include <trajmc/target.hpp>

#include "trajmc_cli/run_config.hpp"

namespace trajmc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

fs::path prepare_out(const std::string& out_dir) {
  const fs::path p = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory " + p.string() + ": " + ec.message());
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
}

/// metadata.json written by every command.
void write_metadata(const fs::path& out, const std::string& command, const std::string& config,
                    std::uint64_t seed, std::chrono::steady_clock::time_point t0, json extra) {
  json j{{"version", kVersion}, {"command", command}, {"config", config}, {"seed", seed}};
  if (!config.empty()) j["config_text"] = slurp(config);
  j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  j.update(extra);
  write_json(out / "metadata.json", j);
}

json vec_json(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::vector<std::string> lambda_header(int d) {
  std::vector<std::string> h;
  for (int i = 1; i <= d; ++i) h.push_back("lambda_" + std::to_string(i));
  return h;
}

/// Indices of lambda_1, lambda_2, ... (consecutive, starting at 1).
std::vector<int> lambda_columns(const csv::Table& t) {
  std::vector<int> cols;
  for (int i = 1;; ++i) {
    const int c = t.column("lambda_" + std::to_string(i));
    if (c < 0) break;
    cols.push_back(c);
  }
  return cols;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

/// Rows of lambda_* (plus one optional named column). Malformed rows are
/// skipped and counted.
struct LambdaRows {
  std::vector<VecX> lambdas;
  std::vector<double> extra;
  int skipped = 0;
};

LambdaRows read_lambdas(const std::string& path, const std::string& extra_column = {}) {
  const csv::Table t = csv::read(path);
  const auto cols = lambda_columns(t);
  if (cols.empty()) throw IoError(path + ": no lambda_1.. columns");
  const int extra = extra_column.empty() ? -1 : t.column(extra_column);
  if (!extra_column.empty() && extra < 0) throw IoError(path + ": missing column " + extra_column);
  LambdaRows out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    VecX v(static_cast<Eigen::Index>(cols.size()));
    bool ok = true;
    for (std::size_t i = 0; i < cols.size() && ok; ++i) {
      const auto c = static_cast<std::size_t>(cols[i]);
      ok = c < row.size() && parse_double(row[c], v(static_cast<Eigen::Index>(i))) &&
           std::isfinite(v(static_cast<Eigen::Index>(i)));
    }
    double x = 0.0;
    if (ok && extra >= 0) {
      ok = static_cast<std::size_t>(extra) < row.size() &&
           parse_double(row[static_cast<std::size_t>(extra)], x);
    }
    if (!ok) {
      spdlog::warn("{}: skipping malformed row {}", path, r + 2);
      ++out.skipped;
      continue;
    }
    out.lambdas.push_back(std::move(v));
    if (extra >= 0) out.extra.push_back(x);
  }
  return out;
}

MatX as_columns(const std::vector<VecX>& rows) {
  if (rows.empty()) return {};
  MatX m(rows.front().size(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = rows[i];
  return m;
}

std::vector<OrbitSample> read_orbit_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const int tc = t.column("tau_f");
  if (tc < 0) throw IoError(path + ": missing tau_f column");
  std::vector<int> xc;
  for (int i = 1; i <= 6; ++i) {
    xc.push_back(t.column("x" + std::to_string(i)));
    if (xc.back() < 0) throw IoError(path + ": missing x" + std::to_string(i) + " column");
  }
  std::vector<OrbitSample> out;
  for (const auto& row : t.rows) {
    OrbitSample s;
    if (!parse_double(row.at(static_cast<std::size_t>(tc)), s.tau_f)) {
      throw IoError(path + ": malformed orbit row");
    }
    for (int i = 0; i < 6; ++i) {
      if (!parse_double(row.at(static_cast<std::size_t>(xc[static_cast<std::size_t>(i)])), s.x(i))) {
        throw IoError(path + ": malformed orbit row");
      }
    }
    out.push_back(s);
  }
  if (out.empty()) throw IoError(path + ": orbit file has no rows");
  return out;
}

void write_orbit_csv(const fs::path& p, const std::vector<OrbitSample>& samples) {
  auto out = open_out(p);
  csv::write_row(out, {"tau_f", "x1", "x2", "x3", "x4", "x5", "x6"});
  for (const auto& s : samples) {
    std::vector<std::string> cells{csv::format(s.tau_f)};
    for (int i = 0; i < 6; ++i) cells.push_back(csv::format(s.x(i)));
    csv::write_row(out, cells);
  }
}

template <class Fn>
void striped(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&fn, t, threads, n] {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void write_samples_csv(const fs::path& p, const std::vector<SampleRow>& rows, int d) {
  auto out = open_out(p);
  std::vector<std::string> header{"chain", "iteration"};
  for (const auto& h : lambda_header(d)) header.push_back(h);
  for (const char* h : {"j_star", "e", "delta_m", "tau_s", "tau_f", "feasible"}) {
    header.emplace_back(h);
  }
  csv::write_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{std::to_string(r.chain), std::to_string(r.iteration)};
    for (Eigen::Index i = 0; i < r.lambda.size(); ++i) cells.push_back(csv::format(r.lambda(i)));
    for (double v : {r.j_star, r.e, r.delta_m, r.tau_s, r.tau_f}) cells.push_back(csv::format(v));
    cells.emplace_back(r.feasible ? "1" : "0");
    csv::write_row(out, cells);
  }
}

void write_traces_csv(const fs::path& p, const std::vector<TraceRow>& rows) {
  auto out = open_out(p);
  csv::write_row(out, {"iteration", "h", "mean_j_star", "mean_e", "mean_dm_over_m0", "mean_tau_s",
                       "acceptance_rate"});
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.iteration), csv::format(r.h), csv::format(r.mean_j_star),
                         csv::format(r.mean_e), csv::format(r.mean_dm_over_m0),
                         csv::format(r.mean_tau_s), csv::format(r.acceptance_rate)});
  }
}

json diagnostics_json(const Diagnostics& d) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"n_samples", d.n_samples},
          {"n_feasible", d.n_feasible},
          {"feasibility_rate", d.feasibility_rate},
          {"dv_mean_ms", opt(d.dv_mean_ms)},
          {"dv_std_ms", opt(d.dv_std_ms)},
          {"tau_s_mean_days", opt(d.tau_s_mean_days)},
          {"tau_s_std_days", opt(d.tau_s_std_days)},
          {"objective_evaluations", d.counts.objective},
          {"gradient_evaluations", d.counts.gradient},
          {"refresh_objective_evaluations", d.counts.refresh_objective},
          {"refresh_gradient_evaluations", d.counts.refresh_gradient},
          {"dead_chains", d.dead_chains}};
}

std::vector<VecX> initial_samples(const RunConfig& cfg, int dim) {
  const int count = cfg.init.count > 0 ? cfg.init.count : cfg.n_chains;
  std::vector<VecX> out;
  switch (cfg.init.kind) {
    case InitKind::Dataset: {
      auto rows = read_lambdas(cfg.init.path);
      if (static_cast<int>(rows.lambdas.size()) < count) {
        throw ConfigError(cfg.init.path + ": fewer rows than initial samples requested");
      }
      out.assign(rows.lambdas.begin(), rows.lambdas.begin() + count);
      break;
    }
    case InitKind::Model: {
      const auto model = ddpm::load_model(cfg.init.path);
      if (model.data_dim() != dim) {
        throw ShapeMismatchError("model dimension does not match the problem");
      }
      const auto sch = ddpm::cosine_schedule(model.schedule_steps, model.schedule_s);
      const MatX s = ddpm::sample(model, sch, count, mix64(cfg.seed ^ 0x6d6f64656cULL));
      for (Eigen::Index j = 0; j < s.cols(); ++j) out.emplace_back(s.col(j));
      break;
    }
    case InitKind::Gaussian: {
      VecX mean = cfg.init.mean;
      MatX chol;
      if (!cfg.init.path.empty()) {
        const auto rows = read_lambdas(cfg.init.path);
        if (rows.lambdas.size() < 2) throw ConfigError("gaussian fit needs at least two seeds");
        mean = empirical_mean(rows.lambdas);
        MatX cov = MatX::Zero(mean.size(), mean.size());
        for (const auto& x : rows.lambdas) cov += (x - mean) * (x - mean).transpose();
        cov /= static_cast<double>(rows.lambdas.size() - 1);
        if (!cfg.init.full_covariance) cov = MatX(cov.diagonal().asDiagonal());
        Eigen::LLT<MatX> llt(cov);
        if (llt.info() != Eigen::Success) throw ConfigError("seed covariance is not positive definite");
        chol = llt.matrixL();
      } else {
        if (mean.size() == 0 || cfg.init.std.size() != mean.size()) {
          throw ConfigError("gaussian init needs 'path' or matching 'mean' and 'std'");
        }
        chol = MatX(cfg.init.std.asDiagonal());
      }
      if (mean.size() != dim) throw ShapeMismatchError("init dimension does not match the problem");
      KeyedRng rng(cfg.seed, 0xffffffff00000001ULL, 0);
      for (int i = 0; i < count; ++i) {
        VecX xi(dim);
        for (int k = 0; k < dim; ++k) xi(k) = rng.normal();
        out.emplace_back(mean + chol * xi);
      }
      break;
    }
  }
  if (static_cast<int>(out.size()) < cfg.n_chains) throw ConfigError("fewer initial samples than chains");
  return out;
}

}  // namespace

int cmd_correct_orbit(const std::string& problem, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto def = load_problem_definition(problem);
  const auto out = prepare_out(out_dir);
  const TransferProblem p = build_problem(def);
  write_orbit_csv(out / "orbit.csv", p.target.samples);
  write_metadata(out, "correct-orbit", problem, 0, t0,
                 {{"problem", def.name},
                  {"mu", p.system.mu},
                  {"period", p.target.period},
                  {"target", {{"x0", vec_json(p.target.x0)}, {"period", p.target.period},
                              {"n_orb", def.n_orb}}},
                  {"departure", {{"x0", vec_json(p.departure.x0)},
                                 {"period", p.departure.period}}}});
  spdlog::info("target DRO period {:.6f} TU, departure {:.6f} TU", p.target.period,
               p.departure.period);
  return 0;
}

int cmd_screen(const ScreenOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto def = load_problem_definition(opt.problem);
  const auto out = prepare_out(opt.out_dir);
  TransferProblem p;
  if (opt.orbit_csv.empty()) {
    p = build_problem(def);
  } else {
    ProblemDefinition d = def;
    d.n_orb = 1;
    p = build_problem(d);
    p.target.samples = read_orbit_csv(opt.orbit_csv);
  }
  ScreeningParams sp;
  sp.kappa1 = opt.kappa1;
  sp.kappa2 = opt.kappa2;
  sp.tau_s_max = opt.tau_s_max.value_or(p.tau_s_max);
  sp.n_orb = static_cast<int>(p.target.samples.size());
  const auto ctx = ScreeningContext::make(p, sp);

  auto rows = read_lambdas(opt.input);
  const int d = p.costate_dim();
  const int n = static_cast<int>(rows.lambdas.size());
  std::vector<std::optional<ScreeningResult>> results(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  striped(n, opt.threads, [&](int i) {
    const auto& l = rows.lambdas[static_cast<std::size_t>(i)];
    try {
      if (l.size() != d) throw ShapeMismatchError("row has the wrong number of costates");
      auto r = evaluate_objective(l, *ctx);
      if (opt.export_trajectories && r.record) {
        auto tf = open_out(out / ("trajectory_" + std::to_string(i + 1) + ".csv"));
        write_trajectory_csv(tf, *r.record);
      }
      r.record.reset();
      results[static_cast<std::size_t>(i)] = std::move(r);
    } catch (const Error& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  });

  int warnings = rows.skipped;
  auto f = open_out(out / "screened.csv");
  auto header = lambda_header(d);
  for (const char* h : {"j_star", "e", "delta_m", "tau_s", "tau_f", "feasible"}) {
    header.emplace_back(h);
  }
  csv::write_row(f, header);
  for (int i = 0; i < n; ++i) {
    const auto& r = results[static_cast<std::size_t>(i)];
    if (!r) {
      spdlog::warn("row {}: screening failed: {}", i + 1, errors[static_cast<std::size_t>(i)]);
      ++warnings;
      continue;
    }
    std::vector<std::string> cells;
    const auto& l = rows.lambdas[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < l.size(); ++k) cells.push_back(csv::format(l(k)));
    for (double v : {r->j_star, r->e, r->delta_m, r->tau_s_opt, r->tau_f_opt}) {
      cells.push_back(csv::format(v));
    }
    cells.emplace_back(is_feasible(*r) ? "1" : "0");
    csv::write_row(f, cells);
  }
  write_metadata(out, "screen", opt.problem, 0, t0,
                 {{"input", opt.input},
                  {"rows", n},
                  {"warnings", warnings},
                  {"kappa1", sp.kappa1},
                  {"kappa2", sp.kappa2},
                  {"tau_s_max", sp.tau_s_max},
                  {"feasibility_tol", kDefaultFeasibilityTol}});
  return warnings;
}

int cmd_sample(const SampleOptions& opt) {
  RunConfig cfg = load_run_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.threads) cfg.threads = *opt.threads;
  if (opt.algorithm) cfg.algorithm = parse_algorithm(*opt.algorithm);
  if (opt.epsilon) {
    for (auto& s : cfg.schedule.stages) s.epsilon = *opt.epsilon;
  }
  const auto out = prepare_out(opt.out_dir);
  const auto t_start = std::chrono::steady_clock::now();

  ProblemDefinition start = load_problem_definition(cfg.problem);
  std::optional<ProblemDefinition> end;
  if (cfg.homotopy_end) end = load_problem_definition(*cfg.homotopy_end);
  if (cfg.n_orb) {
    start.n_orb = *cfg.n_orb;
    if (end) end->n_orb = *cfg.n_orb;
  }
  const HomotopyFamily family(start, end);
  std::map<double, TransferProblem> problems;
  auto problem_at = [&](double h) -> const TransferProblem& {
    auto it = problems.find(h);
    if (it == problems.end()) it = problems.emplace(h, family.at(h)).first;
    return it->second;
  };

  TargetFactory factory = [&](const Stage& s) -> std::shared_ptr<const Target> {
    const TransferProblem& p = problem_at(s.h);
    ScreeningParams sp;
    sp.kappa1 = s.kappa1;
    sp.kappa2 = s.kappa2;
    sp.tau_s_max = p.tau_s_max;
    sp.n_orb = static_cast<int>(p.target.samples.size());
    spdlog::info("stage target: h={} mu={:.6e} beta={} kappa1={} kappa2={}", s.h, p.system.mu,
                 s.beta, s.kappa1, s.kappa2);
    return std::make_shared<TargetDensity>(ScreeningContext::make(p, sp), s.beta);
  };

  const int dim = problem_at(cfg.schedule.stages.front().h).costate_dim();
  RunOptions ro;
  ro.algorithm = cfg.algorithm;
  ro.n_chains = cfg.n_chains;
  ro.seed = cfg.seed;
  ro.threads = cfg.threads;
  ro.sigma_init = cfg.sigma_init;
  ro.feasibility_tol = cfg.feasibility_tol;
  ro.checkpoint_every = cfg.checkpoint_every;
  ro.checkpoint_path = (out / "checkpoint.json").string();
  ro.halt_after = opt.halt_after;
  ro.m0 = problem_at(cfg.schedule.stages.front().h).sc.m0;

  std::optional<RunState> resume;
  std::vector<VecX> init;
  if (opt.resume) {
    resume = load_checkpoint(ro.checkpoint_path);
    spdlog::info("resuming at global iteration {}", resume->global_iteration);
  } else {
    init = initial_samples(cfg, dim);
  }
  const RunState st = run_chains(init, cfg.schedule, ro, factory, std::move(resume));

  write_samples_csv(out / "samples.csv", st.samples, dim);
  write_traces_csv(out / "traces.csv", st.traces);

  const EvalCounts counts = total_counts(st);
  const double final_h = cfg.schedule.stages.back().h;
  Diagnostics diag = summarize(st.samples, problem_at(final_h), counts, cfg.feasibility_tol);
  for (const auto& c : st.chains) diag.dead_chains += c.stats.dead ? 1 : 0;
  long proposals = 0, accepts = 0;
  for (const auto& c : st.chains) {
    proposals += c.stats.proposals;
    accepts += c.stats.accepts;
  }
  write_metadata(out, "sample", opt.config, cfg.seed, t_start,
                 {{"algorithm", to_string(cfg.algorithm)},
                  {"threads", cfg.threads},
                  {"n_chains", cfg.n_chains},
                  {"completed", st.completed},
                  {"global_iteration", st.global_iteration},
                  {"sigma_init", vec_json(st.sigma_init)},
                  {"acceptance_rate", proposals > 0 ? double(accepts) / proposals : 0.0},
                  {"diagnostics", diagnostics_json(diag)}});
  spdlog::info("{} post-burn-in samples, {} feasible ({:.2f}%)", diag.n_samples, diag.n_feasible,
               100.0 * diag.feasibility_rate);
  return 0;
}

namespace {

ddpm::TrainHyper hyper_from(const ModelRunConfig& c, std::uint64_t seed) {
  ddpm::TrainHyper h;
  h.steps = c.steps;
  h.batch = c.batch;
  h.learning_rate = c.learning_rate;
  h.optimizer = c.optimizer == "sgd" ? ddpm::Optimizer::Sgd : ddpm::Optimizer::Adam;
  h.seed = seed;
  return h;
}

void write_loss(const fs::path& p, const std::vector<double>& loss) {
  auto out = open_out(p);
  csv::write_row(out, {"step", "loss"});
  for (std::size_t i = 0; i < loss.size(); ++i) {
    csv::write_row(out, {std::to_string(i + 1), csv::format(loss[i])});
  }
}

}  // namespace

int cmd_train(const ModelOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelRunConfig c = load_model_config(opt.config);
  const std::uint64_t seed = opt.seed.value_or(c.seed);
  const auto out = prepare_out(opt.out_dir);
  const csv::Table t = csv::read(c.dataset);
  const bool weighted = t.column("weight") >= 0;
  auto rows = read_lambdas(c.dataset, weighted ? "weight" : "");
  if (rows.lambdas.empty()) throw TrainingError(c.dataset + ": no usable rows");
  VecX w;
  if (weighted) w = Eigen::Map<const VecX>(rows.extra.data(), static_cast<Eigen::Index>(rows.extra.size()));
  const auto ds = ddpm::make_dataset(as_columns(rows.lambdas), w);

  ddpm::ModelConfig mc;
  mc.data_dim = static_cast<int>(rows.lambdas.front().size());
  mc.embed_dim = c.embed_dim;
  mc.hidden = c.hidden;
  mc.hidden_layers = c.hidden_layers;
  const ddpm::DenoiserModel init(mc, seed);
  const auto sch = ddpm::cosine_schedule(c.schedule_steps);
  spdlog::info("training on {} rows for {} steps", ds.rows(), c.steps);
  const auto res = ddpm::train(init, ds, sch, hyper_from(c, seed));
  ddpm::save_model((out / "model.json").string(), res.model);
  write_loss(out / "loss.csv", res.loss_curve);
  write_metadata(out, "train", opt.config, seed, t0,
                 {{"dataset", c.dataset},
                  {"rows", ds.rows()},
                  {"skipped_rows", rows.skipped},
                  {"steps", c.steps},
                  {"final_loss", res.loss_curve.empty() ? 0.0 : res.loss_curve.back()}});
  return rows.skipped;
}

int cmd_finetune(const ModelOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelRunConfig c = load_model_config(opt.config);
  const std::uint64_t seed = opt.seed.value_or(c.seed);
  const auto out = prepare_out(opt.out_dir);
  const auto base = ddpm::load_model(c.base_model);
  auto rows = read_lambdas(c.samples, "j_star");
  if (!rows.lambdas.empty() && rows.lambdas.front().size() != base.data_dim()) {
    throw ShapeMismatchError("sample dimension does not match the base model");
  }
  const auto ds = ddpm::prepare_finetune_data(as_columns(rows.lambdas), rows.extra);
  const auto sch = ddpm::cosine_schedule(base.schedule_steps, base.schedule_s);
  const auto res = ddpm::train(base, ds, sch, hyper_from(c, seed));
  ddpm::save_model((out / "model.json").string(), res.model);
  write_loss(out / "loss.csv", res.loss_curve);

  auto f = open_out(out / "finetune_dataset.csv");
  auto header = lambda_header(base.data_dim());
  header.emplace_back("j_star");
  header.emplace_back("reward");
  csv::write_row(f, header);
  for (int j = 0; j < ds.rows(); ++j) {
    const VecX raw = ds.z.col(j).cwiseProduct(ds.std) + ds.mean;
    std::vector<std::string> cells;
    for (Eigen::Index k = 0; k < raw.size(); ++k) cells.push_back(csv::format(raw(k)));
    cells.push_back(csv::format(ds.j_star[static_cast<std::size_t>(j)]));
    cells.push_back(csv::format(ds.weights(j)));
    csv::write_row(f, cells);
  }
  write_metadata(out, "finetune", opt.config, seed, t0,
                 {{"base_model", c.base_model},
                  {"samples", c.samples},
                  {"rows", ds.rows()},
                  {"skipped_rows", rows.skipped},
                  {"steps", c.steps},
                  {"final_loss", res.loss_curve.empty() ? 0.0 : res.loss_curve.back()}});
  return rows.skipped;
}

int cmd_generate(const ModelOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelRunConfig c = load_model_config(opt.config);
  const std::uint64_t seed = opt.seed.value_or(c.seed);
  const int count = opt.count.value_or(c.count);
  const auto out = prepare_out(opt.out_dir);
  const auto model = ddpm::load_model(c.base_model);
  const auto sch = ddpm::cosine_schedule(model.schedule_steps, model.schedule_s);
  const MatX s = ddpm::sample(model, sch, count, seed);
  auto f = open_out(out / "generated.csv");
  csv::write_row(f, lambda_header(model.data_dim()));
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    std::vector<std::string> cells;
    for (Eigen::Index k = 0; k < s.rows(); ++k) cells.push_back(csv::format(s(k, j)));
    csv::write_row(f, cells);
  }
  write_metadata(out, "generate", opt.config, seed, t0,
                 {{"model", c.base_model}, {"count", count}});
  return 0;
}

int cmd_summarize(const SummarizeOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto def = load_problem_definition(opt.problem);
  ProblemDefinition d = def;
  d.n_orb = 1;
  const TransferProblem p = build_problem(d);
  const csv::Table t = csv::read(opt.samples);
  const int ce = t.column("e"), cdm = t.column("delta_m"), cts = t.column("tau_s");
  if (ce < 0 || cdm < 0 || cts < 0) throw IoError(opt.samples + ": needs e, delta_m, tau_s");
  std::vector<SampleRow> rows;
  int warnings = 0;
  for (const auto& r : t.rows) {
    SampleRow s;
    if (!parse_double(r.at(static_cast<std::size_t>(ce)), s.e) ||
        !parse_double(r.at(static_cast<std::size_t>(cdm)), s.delta_m) ||
        !parse_double(r.at(static_cast<std::size_t>(cts)), s.tau_s)) {
      ++warnings;
      continue;
    }
    rows.push_back(s);
  }
  const Diagnostics diag = summarize(rows, p, EvalCounts{}, opt.feasibility_tol);
  const auto out = prepare_out(opt.out_dir);
  json j = diagnostics_json(diag);
  j["samples"] = opt.samples;
  j["feasibility_tol"] = opt.feasibility_tol;
  write_json(out / "summary.json", j);
  write_metadata(out, "summarize", opt.problem, 0, t0, {{"warnings", warnings}});
  spdlog::info("{} samples, {} feasible ({:.2f}%)", diag.n_samples, diag.n_feasible,
               100.0 * diag.feasibility_rate);
  if (diag.dv_mean_ms) {
    spdlog::info("dv {:.2f} +- {:.2f} m/s, tau_s {:.2f} +- {:.2f} days", *diag.dv_mean_ms,
                 *diag.dv_std_ms, *diag.tau_s_mean_days, *diag.tau_s_std_days);
  }
  return warnings;
}

}  // namespace trajmc::cli
