#include "edgeflow/krim.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "edgeflow/rng.hpp"

namespace edgeflow {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Column-wise projection onto the affine set 1^T V = 1^T.
void affine_project(Eigen::MatrixXd& v) {
  const double n = static_cast<double>(v.rows());
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    v.col(j).array() -= (v.col(j).sum() - 1.0) / n;
}

/// Exact prox of thr*||.||_1 + indicator{1^T v = 1}, column-wise. The
/// minimizer is a soft threshold of the column shifted by a scalar dual
/// variable mu; sum_i S_thr(z_i - mu) is continuous and nonincreasing in mu,
/// so mu is pinned down by bisection.
void prox_l1_affine(Eigen::MatrixXd& v, double thr) {
  auto shrink = [thr](double d) {
    if (d > thr) return d - thr;
    if (d < -thr) return d + thr;
    return 0.0;
  };
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    auto col = v.col(j);
    auto sum_at = [&](double mu) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < col.size(); ++i) s += shrink(col(i) - mu);
      return s;
    };
    double lo = col.minCoeff() - thr - 1.0;  // sum_at(lo) >= rows >= 1
    double hi = col.maxCoeff() + thr;        // sum_at(hi) <= 0
    for (int it = 0; it < 200; ++it) {
      if (hi - lo <= 1e-14 * (std::abs(lo) + std::abs(hi) + 1.0)) break;
      const double mid = 0.5 * (lo + hi);
      (sum_at(mid) >= 1.0 ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);
    for (Eigen::Index i = 0; i < col.size(); ++i) col(i) = shrink(col(i) - mu);
  }
}

double max_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

double max_abs_column_sum_deviation(const Eigen::MatrixXd& v) {
  return (v.colwise().sum().array() - 1.0).abs().maxCoeff();
}

double max_observed_deviation(const Eigen::MatrixXd& x, const FlowMatrix& y,
                              const SamplingMask& mask) {
  double worst = 0.0;
  for (Eigen::Index t = 0; t < y.cols(); ++t)
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      if (mask.is_observed(i, t)) worst = std::max(worst, std::abs(x(i, t) - y(i, t)));
  return worst;
}

}  // namespace

void SolverConfig::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || lambda_l < 0 || lambda_u < 0)
    throw std::invalid_argument("SolverConfig: lambdas must be nonnegative");
  if (!(tau_x > 0 && tau_u > 0 && tau_v > 0))
    throw std::invalid_argument("SolverConfig: taus must be positive");
  if (d < 1 || r < 1) throw std::invalid_argument("SolverConfig: d, r must be positive");
  if (!(gamma0 > 0 && gamma0 <= 1))
    throw std::invalid_argument("SolverConfig: gamma0 must lie in (0,1]");
  if (!(zeta > 0 && zeta < 1))
    throw std::invalid_argument("SolverConfig: zeta must lie in (0,1)");
  if (max_outer_iters < 0 || inner_max_iters < 1)
    throw std::invalid_argument("SolverConfig: iteration limits invalid");
}

double gamma_schedule(double gamma0, double zeta, int n) {
  if (!(gamma0 > 0 && gamma0 <= 1) || !(zeta > 0 && zeta < 1))
    throw std::invalid_argument("gamma_schedule: gamma0 in (0,1], zeta in (0,1)");
  double g = gamma0;
  for (int i = 0; i < n; ++i) g = g * (1.0 - zeta * g);
  return g;
}

double objective(const KrimFactors& f, const Eigen::MatrixXd& k,
                 const SimplicialComplex2& sc, const SolverConfig& cfg) {
  const Eigen::MatrixXd model = f.u1 * f.u2 * k * f.v1 * f.v2;
  double obj = 0.5 * (f.x - model).squaredNorm();
  obj += 0.5 * cfg.lambda_l * (sc.b1 * f.x).squaredNorm();
  if (sc.b2.size() > 0)
    obj += 0.5 * cfg.lambda_u * (sc.b2.transpose() * f.x).squaredNorm();
  obj += 0.5 * cfg.lambda2 * (f.u1.squaredNorm() + f.u2.squaredNorm());
  obj += cfg.lambda1 * (f.v1.lpNorm<1>() + f.v2.lpNorm<1>());
  return obj;
}

FlowMatrix solve_x(const KrimFactors& prev, const FlowMatrix& y,
                   const SamplingMask& mask, const Eigen::MatrixXd& k,
                   const SimplicialComplex2& sc, const SolverConfig& cfg) {
  const Eigen::Index n1 = y.rows();
  const Eigen::Index t = y.cols();

  // A is shared by all columns; only the observed/unobserved split varies.
  Eigen::MatrixXd a = (1.0 + cfg.tau_x) * Eigen::MatrixXd::Identity(n1, n1);
  a.noalias() += cfg.lambda_l * (sc.b1.transpose() * sc.b1);
  if (sc.b2.size() > 0) a.noalias() += cfg.lambda_u * (sc.b2 * sc.b2.transpose());

  const Eigen::MatrixXd m = prev.u1 * prev.u2 * k * prev.v1 * prev.v2;

  FlowMatrix out(n1, t);
  std::map<std::vector<Eigen::Index>, Eigen::LLT<Eigen::MatrixXd>> llt_cache;

  for (Eigen::Index col = 0; col < t; ++col) {
    const auto unobs = mask.unobserved_rows(col);
    const auto obs = mask.observed_rows(col);
    for (Eigen::Index i : obs) out(i, col) = y(i, col);
    if (unobs.empty()) continue;

    const auto nu = static_cast<Eigen::Index>(unobs.size());
    auto it = llt_cache.find(unobs);
    if (it == llt_cache.end()) {
      Eigen::MatrixXd a_uu(nu, nu);
      for (Eigen::Index p = 0; p < nu; ++p)
        for (Eigen::Index q = 0; q < nu; ++q) a_uu(p, q) = a(unobs[p], unobs[q]);
      Eigen::LLT<Eigen::MatrixXd> llt(a_uu);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_x: A_uu not SPD");
      it = llt_cache.emplace(unobs, std::move(llt)).first;
    }

    Eigen::VectorXd rhs(nu);
    for (Eigen::Index p = 0; p < nu; ++p) {
      double v = m(unobs[p], col) + cfg.tau_x * prev.x(unobs[p], col);
      for (Eigen::Index i : obs) v -= a(unobs[p], i) * y(i, col);
      rhs(p) = v;
    }
    const Eigen::VectorXd xu = it->second.solve(rhs);
    for (Eigen::Index p = 0; p < nu; ++p) out(unobs[p], col) = xu(p);
  }
  return out;
}

Eigen::MatrixXd solve_u1(const KrimFactors& prev, const Eigen::MatrixXd& k,
                         const SolverConfig& cfg) {
  const Eigen::MatrixXd e = prev.u2 * k * prev.v1 * prev.v2;  // d x T
  const Eigen::Index d = e.rows();
  Eigen::MatrixXd gram = e * e.transpose();
  gram.diagonal().array() += cfg.lambda2 + cfg.tau_u;
  const Eigen::MatrixXd rhs = prev.x * e.transpose() + cfg.tau_u * prev.u1;
  // U1 = rhs * gram^{-1}; gram is SPD for tau_u > 0
  return gram.llt().solve(rhs.transpose()).transpose();
}

Eigen::MatrixXd solve_u2(const KrimFactors& prev, const Eigen::MatrixXd& k,
                         const SolverConfig& cfg) {
  const Eigen::MatrixXd g = k * prev.v1 * prev.v2;  // N_l x T
  const Eigen::MatrixXd c =
      prev.u1.transpose() * prev.x * g.transpose() + cfg.tau_u * prev.u2;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> left(prev.u1.transpose() * prev.u1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> right(g * g.transpose());
  const Eigen::MatrixXd& p = left.eigenvectors();
  const Eigen::MatrixXd& q = right.eigenvectors();

  Eigen::MatrixXd z = p.transpose() * c * q;
  const double shift = cfg.lambda2 + cfg.tau_u;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      z(i, j) /= left.eigenvalues()(i) * right.eigenvalues()(j) + shift;
  return p * z * q.transpose();
}

VSolveResult solve_v(const KrimFactors& prev, VBlock which,
                     const Eigen::MatrixXd& k, const SolverConfig& cfg) {
  // V1: min over V of 1/2 ||X - (U1 U2 K) V V2||^2 + ...,  B = V2
  // V2: min over V of 1/2 ||X - (U1 U2 K V1) V||^2 + ...,  B = I (elided)
  const bool is_v1 = which == VBlock::kV1;
  const Eigen::MatrixXd a =
      is_v1 ? Eigen::MatrixXd(prev.u1 * prev.u2 * k)
            : Eigen::MatrixXd(prev.u1 * prev.u2 * k * prev.v1);
  const Eigen::MatrixXd& vhat = is_v1 ? prev.v1 : prev.v2;
  const Eigen::MatrixXd b = is_v1 ? prev.v2 : Eigen::MatrixXd();

  const Eigen::MatrixXd ata = a.transpose() * a;
  const bool has_b = b.size() > 0;
  const Eigen::MatrixXd bbt = has_b ? Eigen::MatrixXd(b * b.transpose()) : Eigen::MatrixXd();
  const Eigen::MatrixXd atxbt = has_b
      ? Eigen::MatrixXd(a.transpose() * prev.x * b.transpose())
      : Eigen::MatrixXd(a.transpose() * prev.x);

  const double lip = max_eigenvalue(ata) * (has_b ? max_eigenvalue(bbt) : 1.0) + cfg.tau_v;
  const double step = 1.0 / lip;

  auto value = [&](const Eigen::MatrixXd& v) {
    const Eigen::MatrixXd fitted = has_b ? Eigen::MatrixXd(a * v * b) : Eigen::MatrixXd(a * v);
    return 0.5 * (prev.x - fitted).squaredNorm() + cfg.lambda1 * v.lpNorm<1>() +
           0.5 * cfg.tau_v * (v - vhat).squaredNorm();
  };

  Eigen::MatrixXd v = vhat;
  affine_project(v);

  VSolveResult res;
  res.v = v;
  double best = value(v);

  for (int it = 0; it < cfg.inner_max_iters; ++it) {
    Eigen::MatrixXd grad = has_b ? Eigen::MatrixXd(ata * v * bbt) : Eigen::MatrixXd(ata * v);
    grad -= atxbt;
    grad += cfg.tau_v * (v - vhat);

    Eigen::MatrixXd next = v - step * grad;
    prox_l1_affine(next, cfg.lambda1 * step);

    const double change = (next - v).norm();
    v = std::move(next);
    ++res.iters;

    const double obj = value(v);
    if (obj < best) {
      best = obj;
      res.v = v;
    }
    if (change < cfg.inner_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

KrimFactors sca_step(const KrimFactors& prev, double gamma_next, const FlowMatrix& y,
                     const SamplingMask& mask, const Eigen::MatrixXd& k,
                     const SimplicialComplex2& sc, const SolverConfig& cfg,
                     VSolveResult* v1_info, VSolveResult* v2_info) {
  if (!(gamma_next > 0 && gamma_next <= 1))
    throw std::invalid_argument("sca_step: gamma_next must lie in (0,1]");

  // All five sub-tasks read the same frozen tuple.
  const FlowMatrix x_half = solve_x(prev, y, mask, k, sc, cfg);
  const Eigen::MatrixXd u1_half = solve_u1(prev, k, cfg);
  const Eigen::MatrixXd u2_half = solve_u2(prev, k, cfg);
  VSolveResult v1_half = solve_v(prev, VBlock::kV1, k, cfg);
  VSolveResult v2_half = solve_v(prev, VBlock::kV2, k, cfg);

  KrimFactors out;
  out.x = gamma_next * x_half + (1.0 - gamma_next) * prev.x;
  out.u1 = gamma_next * u1_half + (1.0 - gamma_next) * prev.u1;
  out.u2 = gamma_next * u2_half + (1.0 - gamma_next) * prev.u2;
  out.v1 = gamma_next * v1_half.v + (1.0 - gamma_next) * prev.v1;
  out.v2 = gamma_next * v2_half.v + (1.0 - gamma_next) * prev.v2;

  // Both combined X's are consistent already; the projection pins the
  // observed entries to Y exactly rather than up to rounding.
  out.x = consistency_project(out.x, y, mask);

  if (v1_info) *v1_info = std::move(v1_half);
  if (v2_info) *v2_info = std::move(v2_half);
  return out;
}

KrimFactors init_factors(const FlowMatrix& y, const SamplingMask& mask, int n_l,
                         const SolverConfig& cfg, std::uint64_t seed) {
  const Eigen::Index n1 = y.rows();
  const Eigen::Index t = y.cols();
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));

  KrimFactors f;
  f.u1.resize(n1, cfg.d);
  for (Eigen::Index i = 0; i < n1; ++i)
    for (int j = 0; j < cfg.d; ++j) f.u1(i, j) = rng.uniform(-0.5, 0.5) * scale;
  f.u2.resize(cfg.d, n_l);
  for (int i = 0; i < cfg.d; ++i)
    for (int j = 0; j < n_l; ++j) f.u2(i, j) = rng.uniform(-0.5, 0.5) * scale;

  f.v1 = Eigen::MatrixXd::Constant(n_l, cfg.r, 1.0 / n_l);
  f.v2 = Eigen::MatrixXd::Constant(cfg.r, t, 1.0 / cfg.r);

  // Column-mean fill of the unobserved entries, then exact consistency.
  FlowMatrix fill(n1, t);
  for (Eigen::Index col = 0; col < t; ++col) {
    const auto obs = mask.observed_rows(col);
    double mean = 0.0;
    for (Eigen::Index i : obs) mean += y(i, col);
    if (!obs.empty()) mean /= static_cast<double>(obs.size());
    fill.col(col).setConstant(mean);
  }
  f.x = consistency_project(fill, y, mask);
  return f;
}

FitResult fit(const FlowMatrix& y, const SamplingMask& mask,
              const SimplicialComplex2& sc, const Eigen::MatrixXd& k,
              const SolverConfig& cfg, std::uint64_t init_seed) {
  return fit(y, mask, sc, k, cfg,
             init_factors(y, mask, static_cast<int>(k.rows()), cfg, init_seed));
}

FitResult fit(const FlowMatrix& y, const SamplingMask& mask,
              const SimplicialComplex2& sc, const Eigen::MatrixXd& k,
              const SolverConfig& cfg, const KrimFactors& init) {
  cfg.validate();
  FitResult res;
  res.factors = init;
  auto& diag = res.diagnostics;

  double obj = objective(res.factors, k, sc, cfg);
  if (!std::isfinite(obj)) throw std::runtime_error("fit: non-finite initial objective");

  diag.iterations.push_back({0, obj, cfg.gamma0,
                             max_abs_column_sum_deviation(res.factors.v1),
                             max_abs_column_sum_deviation(res.factors.v2),
                             max_observed_deviation(res.factors.x, y, mask), 0, 0, 0.0});
  if (obj == 0.0) {
    diag.converged = true;
    return res;
  }

  double gamma = cfg.gamma0;
  for (int n = 1; n <= cfg.max_outer_iters; ++n) {
    const auto t0 = Clock::now();
    gamma = gamma * (1.0 - cfg.zeta * gamma);

    VSolveResult v1_info, v2_info;
    res.factors = sca_step(res.factors, gamma, y, mask, k, sc, cfg, &v1_info, &v2_info);
    if (!v1_info.converged || !v2_info.converged) diag.v_subtask_nonconverged = true;

    const double next_obj = objective(res.factors, k, sc, cfg);
    diag.iterations.push_back({n, next_obj, gamma,
                               max_abs_column_sum_deviation(res.factors.v1),
                               max_abs_column_sum_deviation(res.factors.v2),
                               max_observed_deviation(res.factors.x, y, mask),
                               v1_info.iters, v2_info.iters, ms_since(t0)});
    if (!std::isfinite(next_obj))
      throw std::runtime_error("fit: non-finite objective at iteration " + std::to_string(n));

    const double rel = std::abs(next_obj - obj) / std::max(std::abs(obj), 1e-12);
    obj = next_obj;
    if (rel < cfg.outer_tol) {
      diag.converged = true;
      break;
    }
  }
  return res;
}

void write_diagnostics_csv(const FitDiagnostics& diag, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "iter,objective,gamma,v1_residual,v2_residual,mask_residual,"
         "v1_inner_iters,v2_inner_iters,wall_ms\n";
  out.precision(17);
  for (const auto& r : diag.iterations)
    out << r.iter << "," << r.objective << "," << r.gamma << "," << r.v1_residual << ","
        << r.v2_residual << "," << r.mask_residual << "," << r.v1_inner_iters << ","
        << r.v2_inner_iters << "," << r.wall_ms << "\n";
}

}  // namespace edgeflow
