#include "edgeflow/baselines.hpp"

#include <map>
#include <stdexcept>

namespace edgeflow {

FlowMatrix flow_ssl(const FlowMatrix& y, const SamplingMask& mask,
                    const SimplicialComplex2& sc, double lambda_l, double lambda_u) {
  if (!(lambda_l > 0.0) || !(lambda_u > 0.0))
    throw std::invalid_argument("flow_ssl: lambdas must be positive");
  if (y.rows() != mask.rows() || y.cols() != mask.cols())
    throw std::invalid_argument("flow_ssl: shape mismatch");

  const Eigen::Index n1 = y.rows();
  Eigen::MatrixXd l = lambda_l * (sc.b1.transpose() * sc.b1);
  if (sc.b2.size() > 0) l.noalias() += lambda_u * (sc.b2 * sc.b2.transpose());

  FlowMatrix out(n1, y.cols());
  // COD gives the exact solution when L_uu is invertible and the
  // minimum-norm least-squares solution otherwise.
  std::map<std::vector<Eigen::Index>,
           Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>> cod_cache;

  for (Eigen::Index col = 0; col < y.cols(); ++col) {
    const auto unobs = mask.unobserved_rows(col);
    const auto obs = mask.observed_rows(col);
    for (Eigen::Index i : obs) out(i, col) = y(i, col);
    if (unobs.empty()) continue;

    const auto nu = static_cast<Eigen::Index>(unobs.size());
    auto it = cod_cache.find(unobs);
    if (it == cod_cache.end()) {
      Eigen::MatrixXd l_uu(nu, nu);
      for (Eigen::Index p = 0; p < nu; ++p)
        for (Eigen::Index q = 0; q < nu; ++q) l_uu(p, q) = l(unobs[p], unobs[q]);
      it = cod_cache.emplace(unobs, l_uu.completeOrthogonalDecomposition()).first;
    }

    Eigen::VectorXd rhs(nu);
    for (Eigen::Index p = 0; p < nu; ++p) {
      double v = 0.0;
      for (Eigen::Index i : obs) v -= l(unobs[p], i) * y(i, col);
      rhs(p) = v;
    }
    const Eigen::VectorXd xu = it->second.solve(rhs);
    for (Eigen::Index p = 0; p < nu; ++p) out(unobs[p], col) = xu(p);
  }
  return out;
}

FitResult mmf_fit(const FlowMatrix& y, const SamplingMask& mask,
                  const SimplicialComplex2& sc, int n_l, const SolverConfig& cfg,
                  std::uint64_t seed) {
  return fit(y, mask, sc, Eigen::MatrixXd::Identity(n_l, n_l), cfg, seed);
}

}  // namespace edgeflow
