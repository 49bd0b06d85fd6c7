#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgeflow/sampling.hpp"
#include "edgeflow/simplicial.hpp"

namespace edgeflow {

/// Generator for synthetic time-varying edge flows carrying both
/// divergence (gradient) and cyclic (curl) components.
struct FlowGenSpec {
  int n_gradient_modes = 2;          // components in im(B1^T)
  int n_curl_modes = 1;              // components in im(B2)
  std::vector<double> temporal_freqs = {0.01};  // cycles per time step
  double noise_sigma = 0.0;
};

/// y_t = sum_i a_i(t) B1^T g_i + sum_j b_j(t) B2 w_j + noise, with random
/// node potentials g_i, triangle weights w_j, sinusoidal profiles a, b at
/// the given frequencies with random phases. Deterministic in the seed.
FlowMatrix generate_flows(const SimplicialComplex2& sc, int t, const FlowGenSpec& spec,
                          std::uint64_t seed);

/// Header-free CSV, row = edge, column = time instant. Rejects ragged rows
/// and non-numeric or NaN cells, naming the offending line.
FlowMatrix load_flows(const std::string& path);
void save_flows(const FlowMatrix& y, const std::string& path);

}  // namespace edgeflow
