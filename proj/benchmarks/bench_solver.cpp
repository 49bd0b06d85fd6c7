#include <benchmark/benchmark.h>

#include "edgeflow/baselines.hpp"
#include "edgeflow/datagen.hpp"
#include "edgeflow/experiment.hpp"
#include "edgeflow/kernel_geometry.hpp"
#include "edgeflow/krim.hpp"
#include "edgeflow/sampling.hpp"
#include "edgeflow/simplicial.hpp"

namespace {

using namespace edgeflow;

struct Fixture {
  SimplicialComplex2 sc;
  FlowMatrix y;
  SamplingMask mask{1, 1};
  Eigen::MatrixXd k;
  SolverConfig cfg;
  KrimFactors init;

  explicit Fixture(int t = 120, int n_l = 30) {
    sc = load_network(std::string(EDGEFLOW_DATA_DIR) + "/sioux_falls.net");
    FlowGenSpec spec;
    spec.n_gradient_modes = 3;
    spec.n_curl_modes = 2;
    spec.temporal_freqs = {0.01, 0.03, 0.07};
    spec.noise_sigma = 0.05;
    y = generate_flows(sc, t, spec, 7);
    mask = sample_per_snapshot(y.rows(), t, 0.3, 11);
    const auto nav = build_navigators(apply_mask(y, mask), mask);
    const auto lm = select_landmarks(nav, n_l, 13);
    k = kernel_matrix(lm, KernelSpec::gaussian(median_pairwise_distance(nav))).k;
    cfg.d = 5;
    cfg.r = 5;
    init = init_factors(y, mask, n_l, cfg, 17);
  }
};

void BM_HodgeLaplacian(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state) benchmark::DoNotOptimize(hodge_laplacian_1(f.sc));
}
BENCHMARK(BM_HodgeLaplacian);

void BM_ScaStep(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(sca_step(f.init, 0.5, f.y, f.mask, f.k, f.sc, f.cfg));
}
BENCHMARK(BM_ScaStep);

void BM_SolveX(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_x(f.init, f.y, f.mask, f.k, f.sc, f.cfg));
}
BENCHMARK(BM_SolveX);

void BM_SolveV1(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_v(f.init, VBlock::kV1, f.k, f.cfg));
}
BENCHMARK(BM_SolveV1);

void BM_FlowSSL(benchmark::State& state) {
  const Fixture f;
  for (auto _ : state)
    benchmark::DoNotOptimize(flow_ssl(f.y, f.mask, f.sc, 1.0, 1.0));
}
BENCHMARK(BM_FlowSSL);

void BM_LandmarkSelection(benchmark::State& state) {
  const Fixture f;
  const auto nav = build_navigators(apply_mask(f.y, f.mask), f.mask);
  for (auto _ : state)
    benchmark::DoNotOptimize(select_landmarks(nav, 30, 13));
}
BENCHMARK(BM_LandmarkSelection);

}  // namespace

BENCHMARK_MAIN();
