#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>
#include <vector>

namespace edgeflow {

using Edge = std::pair<int, int>;           // (a, b) with a < b, oriented a -> b
using Triangle = std::array<int, 3>;        // (a, b, c) with a < b < c

/// Simplicial complex of order 2: a graph plus its filled triangles,
/// together with the signed incidence matrices B1 (node x edge) and
/// B2 (edge x triangle). Immutable after construction.
struct SimplicialComplex2 {
  int node_count = 0;
  std::vector<Edge> edges;
  std::vector<Triangle> triangles;
  Eigen::MatrixXd b1;  // N0 x N1
  Eigen::MatrixXd b2;  // N1 x N2

  int num_nodes() const { return node_count; }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
};

/// The three Hodge Laplacians acting on edge signals.
struct HodgeLaplacian1 {
  Eigen::MatrixXd lower;  // B1^T B1
  Eigen::MatrixXd upper;  // B2 B2^T
  Eigen::MatrixXd full;   // lower + upper
};

/// Builds the complex from node count and an edge list. Edges are
/// canonicalized to (min, max) and oriented low -> high. When `triangles`
/// is null, all 3-cliques of the edge set are filled; an explicit list
/// overrides the clique fill (every listed triangle must have its three
/// boundary edges present).
///
/// Throws std::invalid_argument on out-of-range indices, duplicate
/// simplices, self-loops, or triangles with missing edges.
SimplicialComplex2 build_complex(int node_count, const std::vector<Edge>& edges,
                                 const std::vector<Triangle>* triangles = nullptr);

HodgeLaplacian1 hodge_laplacian_1(const SimplicialComplex2& sc);

/// True iff B1 * B2 is exactly the zero matrix.
bool boundary_check(const SimplicialComplex2& sc);

/// Parses the plain-text network format:
///   nodes <N0>
///   edge <a> <b>        (1-based)
///   triangle <a> <b> <c>  (optional; overrides clique fill when present)
SimplicialComplex2 load_network(const std::string& path);

}  // namespace edgeflow
