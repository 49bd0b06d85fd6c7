#include "edgeflow/sampling.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "edgeflow/rng.hpp"

namespace edgeflow {

std::vector<Eigen::Index> SamplingMask::observed_rows(Eigen::Index col) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (flags_(i, col)) out.push_back(i);
  return out;
}

std::vector<Eigen::Index> SamplingMask::unobserved_rows(Eigen::Index col) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (!flags_(i, col)) out.push_back(i);
  return out;
}

FlowMatrix apply_mask(const FlowMatrix& y, const SamplingMask& mask) {
  if (y.rows() != mask.rows() || y.cols() != mask.cols())
    throw std::invalid_argument("apply_mask: shape mismatch");
  return mask.flags().select(y, FlowMatrix::Zero(y.rows(), y.cols()));
}

FlowMatrix consistency_project(const FlowMatrix& x, const FlowMatrix& y,
                               const SamplingMask& mask) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() != mask.rows() ||
      x.cols() != mask.cols())
    throw std::invalid_argument("consistency_project: shape mismatch");
  return mask.flags().select(y, x);
}

SamplingMask sample_per_snapshot(Eigen::Index n1, Eigen::Index t, double ratio,
                                 std::uint64_t rng_seed) {
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw std::invalid_argument("sample_per_snapshot: ratio must be in (0, 1]");
  const auto per_col = static_cast<Eigen::Index>(
      std::ceil(static_cast<double>(n1) * ratio));

  SamplingMask mask(n1, t);
  Rng rng(rng_seed);
  std::vector<Eigen::Index> pool(n1);
  for (Eigen::Index col = 0; col < t; ++col) {
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
    // partial Fisher-Yates: first per_col slots become the sample
    for (Eigen::Index k = 0; k < per_col; ++k) {
      const auto j = k + rng.uniform_int(n1 - k);
      std::swap(pool[k], pool[j]);
      mask.observe(pool[k], col);
    }
  }
  return mask;
}

void write_mask_csv(const SamplingMask& mask, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "edge,time\n";
  for (Eigen::Index col = 0; col < mask.cols(); ++col)
    for (Eigen::Index i : mask.observed_rows(col)) out << i << "," << col << "\n";
}

SamplingMask read_mask_csv(const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mask csv: " + path);
  SamplingMask mask(rows, cols);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    Eigen::Index i, t;
    char comma;
    if (!(ss >> i >> comma >> t) || comma != ',')
      throw std::runtime_error("malformed mask csv line: " + line);
    if (i < 0 || i >= rows || t < 0 || t >= cols)
      throw std::runtime_error("mask csv index out of range: " + line);
    mask.observe(i, t);
  }
  return mask;
}

}  // namespace edgeflow
