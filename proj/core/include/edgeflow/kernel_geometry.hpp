#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "edgeflow/sampling.hpp"

namespace edgeflow {

/// Navigator (pilot) vectors: one per snapshot, formed from the observed
/// entries of that column in ascending edge order. All columns must carry
/// the same number of observations.
struct NavigatorSet {
  Eigen::MatrixXd vectors;        // nu x N_nav
  std::vector<int> source_times;  // originating column indices

  Eigen::Index dim() const { return vectors.rows(); }
  Eigen::Index size() const { return vectors.cols(); }
};

/// Landmarks chosen from the navigator cloud by greedy max-min distance.
struct LandmarkSet {
  Eigen::MatrixXd points;   // nu x N_l
  std::vector<int> chosen;  // indices into the navigator set

  Eigen::Index count() const { return points.cols(); }
};

enum class KernelFamily { kGaussian, kLaplacian, kPolynomial };

struct KernelSpec {
  KernelFamily family = KernelFamily::kGaussian;
  double sigma = 1.0;   // bandwidth (gaussian / laplacian)
  int degree = 2;       // polynomial
  double offset = 1.0;  // polynomial

  static KernelSpec gaussian(double sigma) { return {KernelFamily::kGaussian, sigma}; }
  static KernelSpec laplacian(double sigma) { return {KernelFamily::kLaplacian, sigma}; }
  static KernelSpec polynomial(int degree, double offset) {
    return {KernelFamily::kPolynomial, 1.0, degree, offset};
  }
};

struct KernelMatrix {
  Eigen::MatrixXd k;  // N_l x N_l, symmetric
};

NavigatorSet build_navigators(const FlowMatrix& masked_y, const SamplingMask& mask);

/// Greedy max-min selection. The first landmark is the maximum-norm
/// navigator (ties broken by the seeded rng); each further landmark
/// maximizes the minimum Euclidean distance to those already chosen.
LandmarkSet select_landmarks(const NavigatorSet& nav, int n_l, std::uint64_t rng_seed);

/// K[k,k'] = kappa(l_k, l_k'), symmetrized as (K + K^T)/2.
KernelMatrix kernel_matrix(const LandmarkSet& landmarks, const KernelSpec& spec);

/// Median of all pairwise navigator distances (the median bandwidth heuristic).
double median_pairwise_distance(const NavigatorSet& nav);

}  // namespace edgeflow
