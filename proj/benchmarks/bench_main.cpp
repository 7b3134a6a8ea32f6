#include <random>

#include <benchmark/benchmark.h>

#include <trajmc/dynamics.hpp>
#include <trajmc/kdtree.hpp>
#include <trajmc/problem.hpp>
#include <trajmc/problem_config.hpp>
#include <trajmc/samplers.hpp>
#include <trajmc/target.hpp>

using namespace trajmc;

namespace {

const TransferProblem& europa() {
  static const TransferProblem p =
      build_problem(load_problem_definition(std::string(TRAJMC_DATA_DIR) + "/europa.toml"));
  return p;
}

VecX seed_costate() {
  VecX l(4);
  l << -0.423077, 0.019101, -0.157430, -0.283006;
  return l;
}

Vec14 sample_state() {
  Vec14 y;
  y << 1.03, 0.01, 0.0, 0.0, -0.07, 0.0, 0.95, -0.4, 0.02, 0.0, -0.16, -0.28, 0.0, -1.0;
  return y;
}

void BM_AugmentedRhs(benchmark::State& state) {
  const auto p = europa().dynamics();
  const Vec14 y = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(augmented_rhs(y, p, true));
}
BENCHMARK(BM_AugmentedRhs);

void BM_Jacobian(benchmark::State& state) {
  const auto p = europa().dynamics();
  const Vec14 y = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(y, p, true));
}
BENCHMARK(BM_Jacobian);

void BM_KdTreeNearest(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> pts(static_cast<std::size_t>(4 * n));
  for (auto& v : pts) v = u(g);
  const KdTree tree(pts, 4);
  const std::vector<double> q{0.1, -0.2, 0.3, 0.05};
  for (auto _ : state) benchmark::DoNotOptimize(tree.nearest(q));
}
BENCHMARK(BM_KdTreeNearest)->Arg(2000)->Arg(20000);

void BM_EvaluateObjective(benchmark::State& state) {
  const auto ctx = ScreeningContext::make(europa(), ScreeningParams{});
  const VecX l = seed_costate();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_objective(l, *ctx));
}
BENCHMARK(BM_EvaluateObjective)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  const auto ctx = ScreeningContext::make(europa(), ScreeningParams{});
  const TargetDensity t(ctx, 1e4);
  const VecX l = seed_costate();
  const auto ev = t.evaluate(l);
  for (auto _ : state) benchmark::DoNotOptimize(t.gradient(l, ev));
}
BENCHMARK(BM_Gradient)->Unit(benchmark::kMillisecond);

void BM_MalaStepGaussian(benchmark::State& state) {
  VecX s(4);
  s << 0.0468, 0.0010, 0.0013, 0.0353;
  const DiagonalGaussianTarget t(VecX::Zero(4), s);
  ProposalParams p;
  p.sigma = s;
  p.epsilon = 0.5;
  ChainState c;
  c.lambda = VecX::Zero(4);
  refresh_cache(c, t, true);
  std::uint64_t i = 0;
  for (auto _ : state) {
    KeyedRng rng(1, 0, i++);
    benchmark::DoNotOptimize(mala_step(c, t, p, rng));
  }
}
BENCHMARK(BM_MalaStepGaussian);

}  // namespace

BENCHMARK_MAIN();
