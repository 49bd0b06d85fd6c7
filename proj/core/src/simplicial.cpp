#include "edgeflow/simplicial.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace edgeflow {

namespace {

Edge canonical_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("self-loop edge (" + std::to_string(a) + ")");
  return a < b ? Edge{a, b} : Edge{b, a};
}

}  // namespace

SimplicialComplex2 build_complex(int node_count, const std::vector<Edge>& edges,
                                 const std::vector<Triangle>* triangles) {
  if (node_count <= 0) throw std::invalid_argument("node_count must be positive");

  SimplicialComplex2 sc;
  sc.node_count = node_count;

  std::map<Edge, int> edge_index;
  for (const auto& e : edges) {
    Edge c = canonical_edge(e.first, e.second);
    if (c.first < 0 || c.second >= node_count)
      throw std::invalid_argument("edge endpoint out of range");
    if (!edge_index.emplace(c, static_cast<int>(sc.edges.size())).second)
      throw std::invalid_argument("duplicate edge");
    sc.edges.push_back(c);
  }
  const int n1 = sc.num_edges();

  if (triangles != nullptr) {
    std::set<Triangle> seen;
    for (Triangle t : *triangles) {
      std::sort(t.begin(), t.end());
      if (t[0] == t[1] || t[1] == t[2])
        throw std::invalid_argument("degenerate triangle");
      if (t[0] < 0 || t[2] >= node_count)
        throw std::invalid_argument("triangle vertex out of range");
      for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}})
        if (!edge_index.count({t[i], t[j]}))
          throw std::invalid_argument("triangle references a missing edge");
      if (!seen.insert(t).second) throw std::invalid_argument("duplicate triangle");
      sc.triangles.push_back(t);
    }
  } else {
    // Clique fill: for each edge (a,b), scan nodes c > b closing both chords.
    for (const auto& [a, b] : sc.edges)
      for (int c = b + 1; c < node_count; ++c)
        if (edge_index.count({a, c}) && edge_index.count({b, c}))
          sc.triangles.push_back({a, b, c});
    std::sort(sc.triangles.begin(), sc.triangles.end());
  }
  const int n2 = sc.num_triangles();

  sc.b1 = Eigen::MatrixXd::Zero(node_count, n1);
  for (int j = 0; j < n1; ++j) {
    sc.b1(sc.edges[j].first, j) = -1.0;   // tail
    sc.b1(sc.edges[j].second, j) = 1.0;   // head
  }

  sc.b2 = Eigen::MatrixXd::Zero(n1, n2);
  for (int j = 0; j < n2; ++j) {
    const auto& [a, b, c] = sc.triangles[j];
    sc.b2(edge_index.at({a, b}), j) = 1.0;
    sc.b2(edge_index.at({a, c}), j) = -1.0;
    sc.b2(edge_index.at({b, c}), j) = 1.0;
  }
  return sc;
}

HodgeLaplacian1 hodge_laplacian_1(const SimplicialComplex2& sc) {
  HodgeLaplacian1 l;
  l.lower = sc.b1.transpose() * sc.b1;
  l.upper = sc.b2 * sc.b2.transpose();
  if (l.upper.size() == 0)
    l.upper = Eigen::MatrixXd::Zero(sc.num_edges(), sc.num_edges());
  l.full = l.lower + l.upper;
  return l;
}

bool boundary_check(const SimplicialComplex2& sc) {
  if (sc.num_triangles() == 0) return true;
  return (sc.b1 * sc.b2).isZero(0.0);
}

SimplicialComplex2 load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);

  int node_count = -1;
  std::vector<Edge> edges;
  std::vector<Triangle> triangles;
  bool has_triangles = false;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string kw;
    if (!(ss >> kw) || kw[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (kw == "nodes") {
      if (!(ss >> node_count)) fail("expected node count");
    } else if (kw == "edge") {
      int a, b;
      if (!(ss >> a >> b)) fail("expected two node indices");
      edges.emplace_back(a - 1, b - 1);  // file is 1-based
    } else if (kw == "triangle") {
      int a, b, c;
      if (!(ss >> a >> b >> c)) fail("expected three node indices");
      triangles.push_back({a - 1, b - 1, c - 1});
      has_triangles = true;
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (node_count < 0) throw std::runtime_error(path + ": missing 'nodes' header");
  return build_complex(node_count, edges, has_triangles ? &triangles : nullptr);
}

}  // namespace edgeflow
