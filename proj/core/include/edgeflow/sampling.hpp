#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace edgeflow {

using FlowMatrix = Eigen::MatrixXd;  // N1 x T, row = edge, column = time

/// Observation index set Omega over an N1 x T flow matrix.
class SamplingMask {
 public:
  SamplingMask(Eigen::Index rows, Eigen::Index cols)
      : flags_(Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, false)) {}

  Eigen::Index rows() const { return flags_.rows(); }
  Eigen::Index cols() const { return flags_.cols(); }

  void observe(Eigen::Index edge, Eigen::Index time) { flags_(edge, time) = true; }
  void unobserve(Eigen::Index edge, Eigen::Index time) { flags_(edge, time) = false; }
  bool is_observed(Eigen::Index edge, Eigen::Index time) const { return flags_(edge, time); }

  Eigen::Index observed_count() const { return flags_.count(); }
  Eigen::Index observed_count(Eigen::Index col) const { return flags_.col(col).count(); }

  /// Observed edge indices of one column, ascending.
  std::vector<Eigen::Index> observed_rows(Eigen::Index col) const;
  /// Complement of observed_rows, ascending.
  std::vector<Eigen::Index> unobserved_rows(Eigen::Index col) const;

  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& flags() const { return flags_; }

 private:
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flags_;
};

/// The sampling mapping S_Omega: observed entries kept, the rest zeroed.
FlowMatrix apply_mask(const FlowMatrix& y, const SamplingMask& mask);

/// Returns x with entries in Omega overwritten by y's values.
FlowMatrix consistency_project(const FlowMatrix& x, const FlowMatrix& y,
                               const SamplingMask& mask);

/// Per-snapshot sampling: every column gets exactly ceil(n1 * ratio)
/// observed entries, uniformly without replacement. Deterministic in the seed.
SamplingMask sample_per_snapshot(Eigen::Index n1, Eigen::Index t, double ratio,
                                 std::uint64_t rng_seed);

/// CSV archive of the mask as 0-based `edge,time` pairs.
void write_mask_csv(const SamplingMask& mask, const std::string& path);
SamplingMask read_mask_csv(const std::string& path, Eigen::Index rows, Eigen::Index cols);

}  // namespace edgeflow
