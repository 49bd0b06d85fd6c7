#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "edgeflow/sampling.hpp"
#include "edgeflow/simplicial.hpp"

namespace edgeflow {

/// Iterate tuple of the four-factor kernel model X ~ U1 U2 K V1 V2.
struct KrimFactors {
  Eigen::MatrixXd x;   // N1 x T
  Eigen::MatrixXd u1;  // N1 x d
  Eigen::MatrixXd u2;  // d x N_l
  Eigen::MatrixXd v1;  // N_l x r
  Eigen::MatrixXd v2;  // r x T
};

struct SolverConfig {
  double lambda1 = 0.1;  // l1 weight on V1, V2
  double lambda2 = 0.1;  // ridge weight on U1, U2
  double lambda_l = 1.0; // divergence penalty ||B1 X||_F^2
  double lambda_u = 1.0; // curl penalty ||B2^T X||_F^2
  double tau_x = 2.0;
  double tau_u = 2.0;
  double tau_v = 2.0;
  int d = 5;
  int r = 5;
  double gamma0 = 1.0;   // in (0, 1]
  double zeta = 0.5;     // in (0, 1)
  int max_outer_iters = 500;
  double outer_tol = 1e-6;      // relative objective change
  int inner_max_iters = 300;    // V sub-task proximal-gradient iterations
  double inner_tol = 1e-9;      // successive-iterate Frobenius change

  void validate() const;
};

struct IterRecord {
  int iter = 0;
  double objective = 0.0;
  double gamma = 0.0;
  double v1_residual = 0.0;    // max column deviation of 1^T V1 from 1
  double v2_residual = 0.0;
  double mask_residual = 0.0;  // max |X - Y| over observed entries
  int v1_inner_iters = 0;
  int v2_inner_iters = 0;
  double wall_ms = 0.0;
};

struct FitDiagnostics {
  std::vector<IterRecord> iterations;
  bool converged = false;
  bool v_subtask_nonconverged = false;  // any inner loop hit its cap
};

struct FitResult {
  KrimFactors factors;
  FitDiagnostics diagnostics;
};

/// Damping schedule gamma_{n+1} = gamma_n (1 - zeta * gamma_n); returns the
/// n-th term starting from gamma_0 = gamma0.
double gamma_schedule(double gamma0, double zeta, int n);

/// Full composite objective:
///   1/2 ||X - U1 U2 K V1 V2||_F^2 + lambda_l/2 ||B1 X||_F^2
///   + lambda_u/2 ||B2^T X||_F^2 + lambda2/2 (||U1||_F^2 + ||U2||_F^2)
///   + lambda1 (||V1||_1 + ||V2||_1)
double objective(const KrimFactors& f, const Eigen::MatrixXd& k,
                 const SimplicialComplex2& sc, const SolverConfig& cfg);

/// X sub-task: exact minimizer of the quadratic with observed entries of Y
/// fixed. Per column, the free block solves A_uu x_u = m_u + tau_x xhat_u
/// - A_uo y_o with A = (1+tau_x) I + lambda_l B1^T B1 + lambda_u B2 B2^T.
FlowMatrix solve_x(const KrimFactors& prev, const FlowMatrix& y,
                   const SamplingMask& mask, const Eigen::MatrixXd& k,
                   const SimplicialComplex2& sc, const SolverConfig& cfg);

/// U1 sub-task: ridge normal equations against E = U2 K V1 V2.
Eigen::MatrixXd solve_u1(const KrimFactors& prev, const Eigen::MatrixXd& k,
                         const SolverConfig& cfg);

/// U2 sub-task: Stein-type equation (U1^T U1) U2 (G G^T) + (lambda2+tau_u) U2
/// = U1^T X G^T + tau_u U2hat, solved through the eigendecompositions of the
/// two Gram matrices.
Eigen::MatrixXd solve_u2(const KrimFactors& prev, const Eigen::MatrixXd& k,
                         const SolverConfig& cfg);

enum class VBlock { kV1, kV2 };

struct VSolveResult {
  Eigen::MatrixXd v;
  int iters = 0;
  bool converged = false;
};

/// V sub-task: proximal gradient where each step applies the exact prox of
/// the l1 term restricted to 1^T V = 1^T (a soft threshold shifted per
/// column by a scalar dual variable). Returns the best iterate seen,
/// starting from the affine projection of the previous estimate.
VSolveResult solve_v(const KrimFactors& prev, VBlock which,
                     const Eigen::MatrixXd& k, const SolverConfig& cfg);

/// One damped SCA iteration: the five sub-tasks run against the same frozen
/// tuple, each factor is convex-combined with weight gamma_next, and X is
/// re-projected onto the observed entries.
KrimFactors sca_step(const KrimFactors& prev, double gamma_next, const FlowMatrix& y,
                     const SamplingMask& mask, const Eigen::MatrixXd& k,
                     const SimplicialComplex2& sc, const SolverConfig& cfg,
                     VSolveResult* v1_info = nullptr, VSolveResult* v2_info = nullptr);

/// Feasible starting tuple: U factors i.i.d. uniform on [-0.5, 0.5]/sqrt(d),
/// V factors at the affine-feasible uniform value, X = column-mean fill
/// projected onto the observed entries.
KrimFactors init_factors(const FlowMatrix& y, const SamplingMask& mask, int n_l,
                         const SolverConfig& cfg, std::uint64_t seed);

/// Runs the damped SCA loop to tolerance. X of the returned tuple is the
/// imputation result.
FitResult fit(const FlowMatrix& y, const SamplingMask& mask,
              const SimplicialComplex2& sc, const Eigen::MatrixXd& k,
              const SolverConfig& cfg, std::uint64_t init_seed);

/// As above but with a caller-supplied starting tuple.
FitResult fit(const FlowMatrix& y, const SamplingMask& mask,
              const SimplicialComplex2& sc, const Eigen::MatrixXd& k,
              const SolverConfig& cfg, const KrimFactors& init);

/// Diagnostics CSV: iter, objective, gamma, constraint residuals, wall time.
void write_diagnostics_csv(const FitDiagnostics& diag, const std::string& path);

}  // namespace edgeflow
