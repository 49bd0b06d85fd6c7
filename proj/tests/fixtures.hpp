// Shared toy problem builders for the solver tests.
#pragma once

#include <cstdint>

#include "edgeflow/kernel_geometry.hpp"
#include "edgeflow/krim.hpp"
#include "edgeflow/rng.hpp"
#include "edgeflow/sampling.hpp"
#include "edgeflow/simplicial.hpp"

namespace fixtures {

using namespace edgeflow;

struct Toy {
  SimplicialComplex2 sc;
  FlowMatrix y;
  SamplingMask mask{1, 1};
  Eigen::MatrixXd k;
  SolverConfig cfg;
  KrimFactors prev;
};

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Eigen::MatrixXd random_spd_kernel(Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  return Eigen::MatrixXd(a * a.transpose() + Eigen::MatrixXd::Identity(n, n));
}

/// Triangle + pendant edges: 5 nodes, 6 edges, 1 triangle.
inline SimplicialComplex2 small_complex() {
  return build_complex(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {1, 4}});
}

/// Random problem with dims <= 5 for oracle comparisons.
inline Toy random_toy(std::uint64_t seed, double observe_prob = 0.5) {
  Rng rng(seed);
  Toy toy;
  toy.sc = small_complex();
  const Eigen::Index n1 = toy.sc.num_edges();
  const Eigen::Index t = 4;
  const Eigen::Index n_l = 3;
  toy.cfg.d = 2;
  toy.cfg.r = 2;
  toy.cfg.lambda1 = 0.1;
  toy.cfg.lambda2 = 0.2;
  toy.cfg.lambda_l = 0.3;
  toy.cfg.lambda_u = 0.4;

  toy.y = random_matrix(rng, n1, t);
  toy.mask = SamplingMask(n1, t);
  for (Eigen::Index col = 0; col < t; ++col)
    for (Eigen::Index i = 0; i < n1; ++i)
      if (rng.uniform() < observe_prob) toy.mask.observe(i, col);
  toy.k = random_spd_kernel(rng, n_l);

  toy.prev.x = random_matrix(rng, n1, t);
  toy.prev.u1 = random_matrix(rng, n1, toy.cfg.d);
  toy.prev.u2 = random_matrix(rng, toy.cfg.d, n_l);
  toy.prev.v1 = random_matrix(rng, n_l, toy.cfg.r);
  toy.prev.v2 = random_matrix(rng, toy.cfg.r, t);
  return toy;
}

}  // namespace fixtures
