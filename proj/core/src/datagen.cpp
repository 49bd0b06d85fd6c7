#include "edgeflow/datagen.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgeflow/rng.hpp"

namespace edgeflow {

FlowMatrix generate_flows(const SimplicialComplex2& sc, int t, const FlowGenSpec& spec,
                          std::uint64_t seed) {
  if (t < 1) throw std::invalid_argument("generate_flows: t must be >= 1");
  if (spec.n_gradient_modes < 0 || spec.n_curl_modes < 0)
    throw std::invalid_argument("generate_flows: mode counts must be >= 0");
  if (spec.n_gradient_modes + spec.n_curl_modes == 0)
    throw std::invalid_argument("generate_flows: at least one mode required");
  if (spec.n_curl_modes > 0 && sc.num_triangles() == 0)
    throw std::invalid_argument("generate_flows: curl modes on a triangle-free complex");
  if (spec.temporal_freqs.empty())
    throw std::invalid_argument("generate_flows: no temporal frequencies");

  const Eigen::Index n1 = sc.num_edges();
  Rng rng(seed);

  struct Mode {
    Eigen::VectorXd pattern;  // spatial edge pattern
    double freq;
    double phase;
  };
  std::vector<Mode> modes;
  modes.reserve(spec.n_gradient_modes + spec.n_curl_modes);

  for (int i = 0; i < spec.n_gradient_modes; ++i) {
    Eigen::VectorXd g(sc.num_nodes());
    for (Eigen::Index j = 0; j < g.size(); ++j) g(j) = rng.normal();
    modes.push_back({sc.b1.transpose() * g,
                     spec.temporal_freqs[i % spec.temporal_freqs.size()],
                     rng.uniform(0.0, 2.0 * M_PI)});
  }
  for (int i = 0; i < spec.n_curl_modes; ++i) {
    Eigen::VectorXd w(sc.num_triangles());
    for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = rng.normal();
    modes.push_back({sc.b2 * w,
                     spec.temporal_freqs[i % spec.temporal_freqs.size()],
                     rng.uniform(0.0, 2.0 * M_PI)});
  }

  FlowMatrix y = FlowMatrix::Zero(n1, t);
  for (const auto& m : modes)
    for (int col = 0; col < t; ++col)
      y.col(col) += std::sin(2.0 * M_PI * m.freq * col + m.phase) * m.pattern;

  if (spec.noise_sigma > 0.0)
    for (int col = 0; col < t; ++col)
      for (Eigen::Index i = 0; i < n1; ++i) y(i, col) += spec.noise_sigma * rng.normal();
  return y;
}

FlowMatrix load_flows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open flow csv: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": non-numeric cell '" + cell + "'");
      }
      if (pos != cell.find_last_not_of(" \t\r") + 1 || !std::isfinite(v))
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": invalid cell '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty flow csv");

  FlowMatrix y(rows.size(), rows.front().size());
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index j = 0; j < y.cols(); ++j) y(i, j) = rows[i][j];
  return y;
}

void save_flows(const FlowMatrix& y, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (j) out << ",";
      out << y(i, j);
    }
    out << "\n";
  }
}

}  // namespace edgeflow
