#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgeflow/datagen.hpp"
#include "edgeflow/kernel_geometry.hpp"
#include "edgeflow/krim.hpp"
#include "edgeflow/sampling.hpp"
#include "edgeflow/simplicial.hpp"

namespace edgeflow {

/// Mean absolute error over all entries: ||X - Y||_1 / (N1 * T).
double mae(const FlowMatrix& x, const FlowMatrix& y);

/// Unknown-parameter count of the four-factor model:
/// (N1 + N_l) d + (N_l + T) r.
long long param_count(long long n1, long long n_l, long long t, long long d, long long r);

/// Fraction of entries with |value| > threshold, per factor.
struct SparsityReport {
  double u1 = 0.0;
  double u2 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
};
SparsityReport sparsity_report(const KrimFactors& f, double threshold);

/// Flat key-value run configuration (see README for the schema).
struct ExperimentConfig {
  std::string network;       // network file path (required)
  std::string dataset_name;  // display name; defaults to the network file stem
  std::string flows;         // flow CSV path; empty => synthesize with `gen`
  FlowGenSpec gen;
  int gen_t = 300;

  std::vector<std::string> methods = {"multil_krim", "mmf", "flow_ssl"};
  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5};
  int runs = 1;
  std::uint64_t seed = 0;
  std::string output_dir = ".";

  int n_l = 50;
  SolverConfig solver;
  KernelSpec kernel;
  bool sigma_median = true;  // bandwidth from the median heuristic

  // grid-search axes; empty axis = the scalar value above
  std::vector<double> grid_lambda1, grid_lambda2, grid_lambda_l, grid_lambda_u, grid_sigma;
  std::vector<int> grid_n_l, grid_d, grid_r;
  int grid_runs = 3;
  double grid_ratio = 0.3;
  double validation_fraction = 0.1;  // held-out share of observed entries
  bool tune_on_truth = false;

  static ExperimentConfig load(const std::string& path);
};

struct RunRow {
  std::string method;
  double ratio = 0.0;
  int run = 0;
  double mae = 0.0;
  double wall_ms = 0.0;
  bool ok = true;
};

struct SummaryRow {
  std::string method;
  double ratio = 0.0;
  double mean_mae = 0.0;
  double std_mae = 0.0;  // sample standard deviation
};

struct ExperimentReport {
  std::vector<RunRow> runs;
  std::vector<SummaryRow> summary;
  std::optional<KrimFactors> best_krim;  // lowest-MAE multil_krim factors
  FitDiagnostics best_krim_diagnostics;
};

/// Full protocol: for each (method, ratio, run) builds a mask, imputes and
/// scores MAE; writes per_run.csv, summary.csv, param_table.csv and, when
/// multil_krim ran, factor heatmap CSVs plus diagnostics of the best run,
/// all under cfg.output_dir.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct GridCell {
  double lambda1, lambda2, lambda_l, lambda_u, sigma;
  int n_l, d, r;
  double mean_mae = 0.0;
  long long params = 0;
};

struct GridResult {
  std::string method;
  GridCell best;
  std::vector<GridCell> cells;
};

/// Exhaustive grid search per method against a validation split of
/// the observed entries (or the full ground truth when tune_on_truth).
/// Ties break toward smaller param_count, then first in axis order.
std::vector<GridResult> grid_search(const ExperimentConfig& cfg);

/// Table-1-analog CSV row set for the configured model dimensions.
std::string param_table_csv(const std::string& dataset_name, long long n1,
                            long long n_l, long long t, long long d, long long r);

/// Entrywise |.| rescaled to [0,1] by the matrix maximum; CSV to `path`.
void write_heatmap_csv(const Eigen::MatrixXd& m, const std::string& path);

}  // namespace edgeflow
