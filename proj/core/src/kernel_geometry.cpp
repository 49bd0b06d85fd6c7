#include "edgeflow/kernel_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "edgeflow/rng.hpp"

namespace edgeflow {

NavigatorSet build_navigators(const FlowMatrix& masked_y, const SamplingMask& mask) {
  if (masked_y.rows() != mask.rows() || masked_y.cols() != mask.cols())
    throw std::invalid_argument("build_navigators: shape mismatch");
  const Eigen::Index t = masked_y.cols();
  if (t == 0) throw std::invalid_argument("build_navigators: empty matrix");

  const Eigen::Index nu = mask.observed_count(0);
  if (nu == 0) throw std::invalid_argument("build_navigators: empty observation column");

  NavigatorSet nav;
  nav.vectors.resize(nu, t);
  nav.source_times.resize(t);
  for (Eigen::Index col = 0; col < t; ++col) {
    const auto rows = mask.observed_rows(col);
    if (static_cast<Eigen::Index>(rows.size()) != nu)
      throw std::invalid_argument(
          "build_navigators: columns carry different observation counts");
    for (Eigen::Index k = 0; k < nu; ++k) nav.vectors(k, col) = masked_y(rows[k], col);
    nav.source_times[col] = static_cast<int>(col);
  }
  return nav;
}

LandmarkSet select_landmarks(const NavigatorSet& nav, int n_l, std::uint64_t rng_seed) {
  const Eigen::Index n = nav.size();
  if (n_l < 1 || n_l > n)
    throw std::invalid_argument("select_landmarks: n_l out of range");

  Rng rng(rng_seed);
  auto pick_tied_argmax = [&](const Eigen::VectorXd& score) {
    const double best = score.maxCoeff();
    std::vector<Eigen::Index> ties;
    for (Eigen::Index i = 0; i < score.size(); ++i)
      if (score(i) == best) ties.push_back(i);
    return ties.size() == 1 ? ties[0] : ties[rng.uniform_int(ties.size())];
  };

  std::vector<int> chosen;
  chosen.reserve(n_l);

  Eigen::VectorXd norms = nav.vectors.colwise().squaredNorm();
  chosen.push_back(static_cast<int>(pick_tied_argmax(norms)));

  // min squared distance from every navigator to the chosen set
  Eigen::VectorXd min_d2 =
      (nav.vectors.colwise() - nav.vectors.col(chosen[0])).colwise().squaredNorm();
  min_d2(chosen[0]) = -std::numeric_limits<double>::infinity();

  while (static_cast<int>(chosen.size()) < n_l) {
    const Eigen::Index next = pick_tied_argmax(min_d2);
    chosen.push_back(static_cast<int>(next));
    Eigen::VectorXd d2 =
        (nav.vectors.colwise() - nav.vectors.col(next)).colwise().squaredNorm();
    min_d2 = min_d2.cwiseMin(d2);
    min_d2(next) = -std::numeric_limits<double>::infinity();
  }

  LandmarkSet lm;
  lm.chosen = chosen;
  lm.points.resize(nav.dim(), n_l);
  for (int k = 0; k < n_l; ++k) lm.points.col(k) = nav.vectors.col(chosen[k]);
  return lm;
}

KernelMatrix kernel_matrix(const LandmarkSet& landmarks, const KernelSpec& spec) {
  const Eigen::Index n = landmarks.count();
  const Eigen::MatrixXd& p = landmarks.points;
  Eigen::MatrixXd k(n, n);

  switch (spec.family) {
    case KernelFamily::kGaussian:
    case KernelFamily::kLaplacian: {
      if (!(spec.sigma > 0.0))
        throw std::invalid_argument("kernel_matrix: sigma must be positive");
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double d2 = (p.col(i) - p.col(j)).squaredNorm();
          k(i, j) = spec.family == KernelFamily::kGaussian
                        ? std::exp(-d2 / (2.0 * spec.sigma * spec.sigma))
                        : std::exp(-std::sqrt(d2) / spec.sigma);
        }
      break;
    }
    case KernelFamily::kPolynomial: {
      if (spec.degree < 1)
        throw std::invalid_argument("kernel_matrix: degree must be >= 1");
      k = ((p.transpose() * p).array() + spec.offset).pow(spec.degree);
      break;
    }
  }
  if (!k.allFinite()) throw std::invalid_argument("kernel_matrix: non-finite kernel value");
  KernelMatrix km;
  km.k = 0.5 * (k + k.transpose());
  return km;
}

double median_pairwise_distance(const NavigatorSet& nav) {
  const Eigen::Index n = nav.size();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d.push_back((nav.vectors.col(i) - nav.vectors.col(j)).norm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + d.size() / 2;
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

}  // namespace edgeflow
