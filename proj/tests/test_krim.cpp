#include <doctest.h>

#include <cmath>

#include "edgeflow/baselines.hpp"
#include "edgeflow/krim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace edgeflow;
using fixtures::Toy;

namespace {

// Eq.-style sub-objectives written independently for gradient checks.

double x_subobjective(const Toy& toy, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd m =
      toy.prev.u1 * toy.prev.u2 * toy.k * toy.prev.v1 * toy.prev.v2;
  double v = 0.5 * (x - m).squaredNorm();
  v += 0.5 * toy.cfg.lambda_l * (toy.sc.b1 * x).squaredNorm();
  v += 0.5 * toy.cfg.lambda_u * (toy.sc.b2.transpose() * x).squaredNorm();
  v += 0.5 * toy.cfg.tau_x * (x - toy.prev.x).squaredNorm();
  return v;
}

double u1_subobjective(const Toy& toy, const Eigen::MatrixXd& u1) {
  const Eigen::MatrixXd e = toy.prev.u2 * toy.k * toy.prev.v1 * toy.prev.v2;
  return 0.5 * (toy.prev.x - u1 * e).squaredNorm() +
         0.5 * toy.cfg.lambda2 * u1.squaredNorm() +
         0.5 * toy.cfg.tau_u * (u1 - toy.prev.u1).squaredNorm();
}

double u2_subobjective(const Toy& toy, const Eigen::MatrixXd& u2) {
  const Eigen::MatrixXd g = toy.k * toy.prev.v1 * toy.prev.v2;
  return 0.5 * (toy.prev.x - toy.prev.u1 * u2 * g).squaredNorm() +
         0.5 * toy.cfg.lambda2 * u2.squaredNorm() +
         0.5 * toy.cfg.tau_u * (u2 - toy.prev.u2).squaredNorm();
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

SamplingMask full_mask(Eigen::Index rows, Eigen::Index cols) {
  SamplingMask m(rows, cols);
  for (Eigen::Index t = 0; t < cols; ++t)
    for (Eigen::Index i = 0; i < rows; ++i) m.observe(i, t);
  return m;
}

}  // namespace

TEST_CASE("gamma schedule") {
  CHECK(gamma_schedule(1.0, 0.5, 0) == 1.0);
  CHECK(gamma_schedule(1.0, 0.5, 1) == 0.5);
  CHECK(gamma_schedule(1.0, 0.5, 2) == 0.375);

  double prev = 1.0;
  for (int n = 1; n < 200; ++n) {
    const double g = gamma_schedule(1.0, 0.3, n);
    CHECK(g > 0.0);
    CHECK(g < prev);
    prev = g;
  }
  CHECK_THROWS(gamma_schedule(0.0, 0.5, 1));
  CHECK_THROWS(gamma_schedule(1.0, 1.0, 1));
}

TEST_CASE("objective hand-checked values") {
  SolverConfig cfg;

  KrimFactors f;
  f.x = Eigen::MatrixXd::Zero(1, 1);
  f.u1 = f.u2 = f.v1 = f.v2 = Eigen::MatrixXd::Zero(1, 1);
  const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(1, 1);
  SolverConfig zero = cfg;
  zero.lambda1 = zero.lambda2 = zero.lambda_l = zero.lambda_u = 0.0;
  // flows live on 1 edge here, so reuse a 1-edge complex with X scalar
  const auto sc1 = build_complex(2, {{0, 1}});
  CHECK(objective(f, k, sc1, zero) == 0.0);

  // exact fit with no regularizers
  f.x.setConstant(3.0);
  f.u1.setConstant(3.0);
  f.u2.setConstant(1.0);
  f.v1.setConstant(1.0);
  f.v2.setConstant(1.0);
  CHECK(objective(f, k, sc1, zero) == 0.0);

  // X=2, product=1, lambda2=2, lambda1=1, no Hodge terms
  f.x.setConstant(2.0);
  f.u1.setConstant(1.0);
  SolverConfig c2 = zero;
  c2.lambda2 = 2.0;
  c2.lambda1 = 1.0;
  CHECK(objective(f, k, sc1, c2) == doctest::Approx(4.5));
}

TEST_CASE("solve_x with a full mask returns Y") {
  const auto toy = fixtures::random_toy(1);
  const auto mask = full_mask(toy.y.rows(), toy.y.cols());
  CHECK(bitwise_equal(solve_x(toy.prev, toy.y, mask, toy.k, toy.sc, toy.cfg), toy.y));
}

TEST_CASE("solve_x with empty mask and vanishing tau approaches the model term") {
  auto toy = fixtures::random_toy(2);
  toy.cfg.lambda_l = toy.cfg.lambda_u = 0.0;
  toy.cfg.tau_x = 1e-10;
  const SamplingMask empty(toy.y.rows(), toy.y.cols());
  const Eigen::MatrixXd m =
      toy.prev.u1 * toy.prev.u2 * toy.k * toy.prev.v1 * toy.prev.v2;
  const auto x = solve_x(toy.prev, toy.y, empty, toy.k, toy.sc, toy.cfg);
  CHECK((x - m).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("solve_x matches the KKT oracle") {
  for (std::uint64_t seed : {3, 4, 5}) {
    const auto toy = fixtures::random_toy(seed);
    const auto x = solve_x(toy.prev, toy.y, toy.mask, toy.k, toy.sc, toy.cfg);

    const Eigen::Index n1 = toy.y.rows();
    Eigen::MatrixXd h = (1.0 + toy.cfg.tau_x) * Eigen::MatrixXd::Identity(n1, n1) +
                        toy.cfg.lambda_l * toy.sc.b1.transpose() * toy.sc.b1 +
                        toy.cfg.lambda_u * toy.sc.b2 * toy.sc.b2.transpose();
    const Eigen::MatrixXd m =
        toy.prev.u1 * toy.prev.u2 * toy.k * toy.prev.v1 * toy.prev.v2;

    for (Eigen::Index col = 0; col < toy.y.cols(); ++col) {
      const auto obs = toy.mask.observed_rows(col);
      Eigen::VectorXd fixed_val(obs.size());
      for (std::size_t i = 0; i < obs.size(); ++i) fixed_val(i) = toy.y(obs[i], col);
      const Eigen::VectorXd b = m.col(col) + toy.cfg.tau_x * toy.prev.x.col(col);
      const Eigen::VectorXd ref = oracles::kkt_solve(h, b, obs, fixed_val);
      CHECK((x.col(col) - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("solve_x stationarity on the free entries") {
  const auto toy = fixtures::random_toy(6);
  const auto x = solve_x(toy.prev, toy.y, toy.mask, toy.k, toy.sc, toy.cfg);
  const auto grad = oracles::numeric_gradient(
      [&](const Eigen::MatrixXd& xx) { return x_subobjective(toy, xx); }, x);
  double free_norm = 0.0;
  for (Eigen::Index col = 0; col < x.cols(); ++col)
    for (Eigen::Index i : toy.mask.unobserved_rows(col))
      free_norm += grad(i, col) * grad(i, col);
  CHECK(std::sqrt(free_norm) < 1e-5);  // central differences carry ~1e-6 noise
}

TEST_CASE("solve_u1 interpolates when E is the identity") {
  Toy toy = fixtures::random_toy(7);
  // force E = U2 K V1 V2 = I (2x4 -> need square): rebuild a square layout
  toy.prev.u2 = Eigen::MatrixXd::Identity(2, 3);
  toy.k = Eigen::MatrixXd::Identity(3, 3);
  toy.prev.v1 = Eigen::MatrixXd::Identity(3, 2);
  toy.prev.v2 = Eigen::MatrixXd::Identity(2, 4).topRows(2);
  // E = [I2 | 0]; restrict to the leading 2x2 block by zeroing the rest of X
  toy.prev.x.setZero();
  toy.prev.x.leftCols(2) = toy.prev.u1;
  toy.cfg.lambda2 = 0.0;
  toy.cfg.tau_u = 1e-14;
  const auto u1 = solve_u1(toy.prev, toy.k, toy.cfg);
  CHECK((u1 - toy.prev.u1).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("solve_u1 returns zero for zero data and no proximity pull") {
  Toy toy = fixtures::random_toy(8);
  toy.prev.x.setZero();
  toy.cfg.tau_u = 1e-300;  // tau -> 0 limit while keeping the system SPD
  toy.cfg.lambda2 = 0.5;
  const auto u1 = solve_u1(toy.prev, toy.k, toy.cfg);
  CHECK(u1.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_u1 numeric stationarity") {
  for (std::uint64_t seed : {9, 10}) {
    const auto toy = fixtures::random_toy(seed);
    const auto u1 = solve_u1(toy.prev, toy.k, toy.cfg);
    const auto grad = oracles::numeric_gradient(
        [&](const Eigen::MatrixXd& u) { return u1_subobjective(toy, u); }, u1);
    CHECK(grad.norm() < 1e-7);
  }
}

TEST_CASE("solve_u2 scalar-denominator case") {
  Toy toy = fixtures::random_toy(11);
  // U1 with orthonormal columns and G = K V1 V2 with G G^T = I
  toy.prev.u1 = Eigen::MatrixXd::Identity(6, 2);
  toy.k = Eigen::MatrixXd::Identity(3, 3);
  toy.prev.v1 = Eigen::MatrixXd::Identity(3, 3);
  toy.cfg.r = 3;
  toy.prev.v2 = Eigen::MatrixXd::Identity(3, 4);
  // G = [I3 | 0] so G G^T = I3
  toy.cfg.lambda2 = 0.4;
  toy.cfg.tau_u = 0.6;  // lambda2 + tau_u = 1 -> denominators all 2
  Rng rng(99);
  toy.prev.u2 = fixtures::random_matrix(rng, 2, 3);

  const Eigen::MatrixXd g = toy.k * toy.prev.v1 * toy.prev.v2;
  const Eigen::MatrixXd c =
      toy.prev.u1.transpose() * toy.prev.x * g.transpose() + toy.cfg.tau_u * toy.prev.u2;
  const auto u2 = solve_u2(toy.prev, toy.k, toy.cfg);
  CHECK((u2 - c / 2.0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solve_u2 returns zero for zero data without proximity pull") {
  Toy toy = fixtures::random_toy(12);
  toy.prev.x.setZero();
  toy.cfg.tau_u = 1e-300;
  toy.cfg.lambda2 = 0.5;
  const auto u2 = solve_u2(toy.prev, toy.k, toy.cfg);
  CHECK(u2.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("solve_u2 numeric stationarity") {
  for (std::uint64_t seed : {13, 14}) {
    const auto toy = fixtures::random_toy(seed);
    const auto u2 = solve_u2(toy.prev, toy.k, toy.cfg);
    const auto grad = oracles::numeric_gradient(
        [&](const Eigen::MatrixXd& u) { return u2_subobjective(toy, u); }, u2);
    CHECK(grad.norm() < 1e-7);
  }
}

TEST_CASE("solve_v with dominant proximity term returns the affine projection") {
  Toy toy = fixtures::random_toy(15);
  toy.cfg.lambda1 = 0.0;
  toy.cfg.tau_v = 1e12;
  const auto res = solve_v(toy.prev, VBlock::kV1, toy.k, toy.cfg);

  Eigen::MatrixXd expected = toy.prev.v1;
  for (Eigen::Index j = 0; j < expected.cols(); ++j)
    expected.col(j).array() -= (expected.col(j).sum() - 1.0) / expected.rows();
  CHECK((res.v - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("solve_v beats a feasible exact-fit competitor when lambda1 = 0") {
  Toy toy = fixtures::random_toy(16);
  toy.cfg.lambda1 = 0.0;
  toy.cfg.tau_v = 1e-6;
  toy.cfg.inner_max_iters = 2000;

  // construct X = A V* B with V* feasible
  Rng rng(5);
  Eigen::MatrixXd vstar = fixtures::random_matrix(rng, 3, 2);
  for (Eigen::Index j = 0; j < vstar.cols(); ++j)
    vstar.col(j).array() -= (vstar.col(j).sum() - 1.0) / vstar.rows();
  const Eigen::MatrixXd a = toy.prev.u1 * toy.prev.u2 * toy.k;
  toy.prev.x = a * vstar * toy.prev.v2;

  auto value = [&](const Eigen::MatrixXd& v) {
    return 0.5 * (toy.prev.x - a * v * toy.prev.v2).squaredNorm() +
           0.5 * toy.cfg.tau_v * (v - toy.prev.v1).squaredNorm();
  };
  const auto res = solve_v(toy.prev, VBlock::kV1, toy.k, toy.cfg);
  CHECK(value(res.v) <= value(vstar) + 1e-6);
}

TEST_CASE("solve_v matches the projected-subgradient oracle") {
  Toy toy = fixtures::random_toy(17);
  toy.cfg.lambda1 = 0.1;
  toy.cfg.inner_max_iters = 5000;
  toy.cfg.inner_tol = 1e-12;

  for (VBlock which : {VBlock::kV1, VBlock::kV2}) {
    const bool is_v1 = which == VBlock::kV1;
    const Eigen::MatrixXd a = is_v1
        ? Eigen::MatrixXd(toy.prev.u1 * toy.prev.u2 * toy.k)
        : Eigen::MatrixXd(toy.prev.u1 * toy.prev.u2 * toy.k * toy.prev.v1);
    const Eigen::MatrixXd b = is_v1
        ? toy.prev.v2
        : Eigen::MatrixXd(Eigen::MatrixXd::Identity(toy.prev.v2.cols(), toy.prev.v2.cols()));
    const Eigen::MatrixXd& vhat = is_v1 ? toy.prev.v1 : toy.prev.v2;

    const auto res = solve_v(toy.prev, which, toy.k, toy.cfg);
    const auto ref = oracles::projected_subgradient_v(toy.prev.x, a, b, vhat,
                                                      toy.cfg.lambda1, toy.cfg.tau_v, 400000);
    auto value = [&](const Eigen::MatrixXd& v) {
      return 0.5 * (toy.prev.x - a * v * b).squaredNorm() +
             toy.cfg.lambda1 * v.lpNorm<1>() +
             0.5 * toy.cfg.tau_v * (v - vhat).squaredNorm();
    };
    CHECK(std::abs(value(res.v) - value(ref)) < 5e-4);
    // the prox solver must not be worse than the oracle
    CHECK(value(res.v) <= value(ref) + 1e-4);
    // affine feasibility per column
    CHECK((res.v.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sca_step with gamma = 1 equals the half-step tuple") {
  const auto toy = fixtures::random_toy(18);
  const auto out = sca_step(toy.prev, 1.0, toy.y, toy.mask, toy.k, toy.sc, toy.cfg);
  CHECK((out.u1 - solve_u1(toy.prev, toy.k, toy.cfg)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.u2 - solve_u2(toy.prev, toy.k, toy.cfg)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.v1 - solve_v(toy.prev, VBlock::kV1, toy.k, toy.cfg).v).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.v2 - solve_v(toy.prev, VBlock::kV2, toy.k, toy.cfg).v).cwiseAbs().maxCoeff() == 0.0);
  const auto x_half = solve_x(toy.prev, toy.y, toy.mask, toy.k, toy.sc, toy.cfg);
  CHECK((out.x - consistency_project(x_half, toy.y, toy.mask)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sca_step with tiny gamma stays near the previous tuple") {
  const auto toy = fixtures::random_toy(19);
  const auto out = sca_step(toy.prev, 1e-12, toy.y, toy.mask, toy.k, toy.sc, toy.cfg);
  CHECK((out.u1 - toy.prev.u1).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((out.v2 - toy.prev.v2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sca_step output lies entrywise between the combined tuples") {
  const auto toy = fixtures::random_toy(20);
  const auto half_u1 = solve_u1(toy.prev, toy.k, toy.cfg);
  const auto out = sca_step(toy.prev, 0.37, toy.y, toy.mask, toy.k, toy.sc, toy.cfg);
  const Eigen::MatrixXd lo = half_u1.cwiseMin(toy.prev.u1);
  const Eigen::MatrixXd hi = half_u1.cwiseMax(toy.prev.u1);
  CHECK(((out.u1.array() >= lo.array() - 1e-12) && (out.u1.array() <= hi.array() + 1e-12))
            .all());
}

TEST_CASE("fit with fully observed data returns Y exactly") {
  const auto toy = fixtures::random_toy(21);
  const auto mask = full_mask(toy.y.rows(), toy.y.cols());
  SolverConfig cfg = toy.cfg;
  cfg.max_outer_iters = 5;
  const auto res = fit(toy.y, mask, toy.sc, toy.k, cfg, 1);
  CHECK(bitwise_equal(res.factors.x, toy.y));
}

TEST_CASE("fit exits immediately at zero objective") {
  const auto sc = fixtures::small_complex();
  const Eigen::Index n1 = sc.num_edges();
  const FlowMatrix y = FlowMatrix::Zero(n1, 3);
  SamplingMask mask(n1, 3);
  SolverConfig cfg;
  cfg.lambda1 = 0.0;
  KrimFactors zero;
  zero.x = FlowMatrix::Zero(n1, 3);
  zero.u1 = Eigen::MatrixXd::Zero(n1, cfg.d);
  zero.u2 = Eigen::MatrixXd::Zero(cfg.d, 4);
  zero.v1 = Eigen::MatrixXd::Zero(4, cfg.r);
  zero.v2 = Eigen::MatrixXd::Zero(cfg.r, 3);
  const auto res = fit(y, mask, sc, Eigen::MatrixXd::Identity(4, 4), cfg, zero);
  REQUIRE(res.diagnostics.iterations.size() == 1);
  CHECK(res.diagnostics.iterations[0].objective == 0.0);
  CHECK(res.diagnostics.converged);
}

TEST_CASE("fit on a toy problem: descent, feasibility, determinism") {
  const auto sc = fixtures::small_complex();
  const Eigen::Index n1 = sc.num_edges();
  const Eigen::Index t = 12;
  Rng rng(42);
  // low-rank synthetic flows
  const Eigen::MatrixXd y =
      fixtures::random_matrix(rng, n1, 2) * fixtures::random_matrix(rng, 2, t);
  const auto mask = sample_per_snapshot(n1, t, 0.5, 7);

  const int n_l = 4;
  const auto nav = build_navigators(apply_mask(y, mask), mask);
  const auto lm = select_landmarks(nav, n_l, 3);
  const auto km = kernel_matrix(lm, KernelSpec::gaussian(median_pairwise_distance(nav)));

  SolverConfig cfg;
  cfg.d = 2;
  cfg.r = 2;
  cfg.max_outer_iters = 60;
  const auto res = fit(y, mask, sc, km.k, cfg, 11);

  const auto& iters = res.diagnostics.iterations;
  REQUIRE(iters.size() >= 2);
  CHECK(iters.back().objective <= iters.front().objective);
  for (std::size_t i = 1; i < iters.size(); ++i) {
    CHECK(iters[i].objective <=
          iters[i - 1].objective * (1.0 + 1e-9) + 1e-15);
    CHECK(iters[i].v1_residual <= 1e-8);
    CHECK(iters[i].v2_residual <= 1e-8);
    CHECK(iters[i].mask_residual == 0.0);
  }

  const auto res2 = fit(y, mask, sc, km.k, cfg, 11);
  CHECK(bitwise_equal(res.factors.x, res2.factors.x));
  CHECK(bitwise_equal(res.factors.v1, res2.factors.v1));
}

TEST_CASE("fit with identity kernel is bitwise identical to mmf_fit") {
  const auto sc = fixtures::small_complex();
  const Eigen::Index n1 = sc.num_edges();
  const Eigen::Index t = 8;
  Rng rng(6);
  const Eigen::MatrixXd y =
      fixtures::random_matrix(rng, n1, 2) * fixtures::random_matrix(rng, 2, t);
  const auto mask = sample_per_snapshot(n1, t, 0.5, 9);

  SolverConfig cfg;
  cfg.d = 2;
  cfg.r = 2;
  cfg.max_outer_iters = 20;
  const int n_l = 4;

  const auto a = fit(y, mask, sc, Eigen::MatrixXd::Identity(n_l, n_l), cfg, 33);
  const auto b = mmf_fit(y, mask, sc, n_l, cfg, 33);
  CHECK(bitwise_equal(a.factors.x, b.factors.x));
  CHECK(bitwise_equal(a.factors.u1, b.factors.u1));
  CHECK(bitwise_equal(a.factors.u2, b.factors.u2));
  CHECK(bitwise_equal(a.factors.v1, b.factors.v1));
  CHECK(bitwise_equal(a.factors.v2, b.factors.v2));
}
