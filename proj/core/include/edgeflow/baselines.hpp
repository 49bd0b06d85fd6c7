#pragma once

#include <cstdint>

#include "edgeflow/krim.hpp"
#include "edgeflow/sampling.hpp"
#include "edgeflow/simplicial.hpp"

namespace edgeflow {

/// FlowSSL: per column, minimizes lambda_l/2 ||B1 x||^2 + lambda_u/2 ||B2^T x||^2
/// over the unobserved entries with the observed ones fixed. Singular systems
/// (harmonic components) fall back to the minimum-norm least-squares solution.
FlowMatrix flow_ssl(const FlowMatrix& y, const SamplingMask& mask,
                    const SimplicialComplex2& sc, double lambda_l, double lambda_u);

/// Blind multi-layer matrix factorization: the same inverse problem and
/// solver with the kernel matrix replaced by the identity.
FitResult mmf_fit(const FlowMatrix& y, const SamplingMask& mask,
                  const SimplicialComplex2& sc, int n_l, const SolverConfig& cfg,
                  std::uint64_t seed);

}  // namespace edgeflow
