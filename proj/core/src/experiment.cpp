#include "edgeflow/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "edgeflow/baselines.hpp"
#include "edgeflow/rng.hpp"

namespace edgeflow {

namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

// seed stream tags
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kMaskStream = 2;
constexpr std::uint64_t kLandmarkStream = 3;
constexpr std::uint64_t kInitStream = 4;
constexpr std::uint64_t kGridMaskStream = 5;
constexpr std::uint64_t kValSplitStream = 6;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_list(s)) out.push_back(std::stoi(tok));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::runtime_error("config: invalid boolean '" + s + "'");
}

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

double value_or(const std::vector<double>& axis, double fallback, std::size_t i) {
  return axis.empty() ? fallback : axis[i];
}

void write_csv(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

struct Problem {
  SimplicialComplex2 sc;
  FlowMatrix y;
};

Problem load_problem(const ExperimentConfig& cfg) {
  Problem p;
  p.sc = load_network(cfg.network);
  p.y = cfg.flows.empty()
            ? generate_flows(p.sc, cfg.gen_t, cfg.gen, derive_seed(cfg.seed, kDataStream))
            : load_flows(cfg.flows);
  if (p.y.rows() != p.sc.num_edges())
    throw std::runtime_error("flow matrix row count does not match the network edge count");
  return p;
}

void check_methods(const std::vector<std::string>& methods) {
  for (const auto& m : methods)
    if (m != "multil_krim" && m != "mmf" && m != "flow_ssl")
      throw std::runtime_error("unknown method '" + m + "'");
}

/// Kernel matrix from the observed snapshots of one run.
KernelMatrix krim_kernel(const FlowMatrix& y, const SamplingMask& mask,
                         const ExperimentConfig& cfg, int n_l, double sigma_override,
                         std::uint64_t lm_seed) {
  const NavigatorSet nav = build_navigators(apply_mask(y, mask), mask);
  const LandmarkSet lm = select_landmarks(nav, n_l, lm_seed);
  KernelSpec spec = cfg.kernel;
  if (sigma_override > 0.0)
    spec.sigma = sigma_override;
  else if (cfg.sigma_median)
    spec.sigma = median_pairwise_distance(nav);
  return kernel_matrix(lm, spec);
}

struct ImputeOutcome {
  FlowMatrix x;
  std::optional<KrimFactors> factors;
  FitDiagnostics diagnostics;
};

ImputeOutcome impute(const std::string& method, const Problem& p, const SamplingMask& mask,
                     const ExperimentConfig& cfg, const SolverConfig& solver, int n_l,
                     double sigma_override, std::uint64_t lm_seed, std::uint64_t init_seed) {
  ImputeOutcome out;
  if (method == "flow_ssl") {
    out.x = flow_ssl(p.y, mask, p.sc, solver.lambda_l, solver.lambda_u);
  } else if (method == "mmf") {
    FitResult fr = mmf_fit(p.y, mask, p.sc, n_l, solver, init_seed);
    out.x = fr.factors.x;
    out.factors = std::move(fr.factors);
    out.diagnostics = std::move(fr.diagnostics);
  } else {  // multil_krim
    const KernelMatrix km = krim_kernel(p.y, mask, cfg, n_l, sigma_override, lm_seed);
    FitResult fr = fit(p.y, mask, p.sc, km.k, solver, init_seed);
    out.x = fr.factors.x;
    out.factors = std::move(fr.factors);
    out.diagnostics = std::move(fr.diagnostics);
  }
  return out;
}

}  // namespace

double mae(const FlowMatrix& x, const FlowMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("mae: shape mismatch");
  return (x - y).cwiseAbs().sum() / static_cast<double>(x.size());
}

long long param_count(long long n1, long long n_l, long long t, long long d, long long r) {
  if (n1 < 1 || n_l < 1 || t < 1 || d < 1 || r < 1)
    throw std::invalid_argument("param_count: dimensions must be positive");
  return (n1 + n_l) * d + (n_l + t) * r;
}

SparsityReport sparsity_report(const KrimFactors& f, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("sparsity_report: threshold must be positive");
  auto frac = [threshold](const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return static_cast<double>((m.cwiseAbs().array() > threshold).count()) /
           static_cast<double>(m.size());
  };
  return {frac(f.u1), frac(f.u2), frac(f.v1), frac(f.v2)};
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);

  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "network") cfg.network = val;
    else if (key == "dataset_name") cfg.dataset_name = val;
    else if (key == "flows") cfg.flows = val;
    else if (key == "gen_t") cfg.gen_t = std::stoi(val);
    else if (key == "gen_gradient_modes") cfg.gen.n_gradient_modes = std::stoi(val);
    else if (key == "gen_curl_modes") cfg.gen.n_curl_modes = std::stoi(val);
    else if (key == "gen_freqs") cfg.gen.temporal_freqs = parse_doubles(val);
    else if (key == "gen_noise_sigma") cfg.gen.noise_sigma = std::stod(val);
    else if (key == "methods") cfg.methods = split_list(val);
    else if (key == "ratios") cfg.ratios = parse_doubles(val);
    else if (key == "runs") cfg.runs = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "output_dir") cfg.output_dir = val;
    else if (key == "n_l") cfg.n_l = std::stoi(val);
    else if (key == "d") cfg.solver.d = std::stoi(val);
    else if (key == "r") cfg.solver.r = std::stoi(val);
    else if (key == "lambda1") cfg.solver.lambda1 = std::stod(val);
    else if (key == "lambda2") cfg.solver.lambda2 = std::stod(val);
    else if (key == "lambda_l") cfg.solver.lambda_l = std::stod(val);
    else if (key == "lambda_u") cfg.solver.lambda_u = std::stod(val);
    else if (key == "tau_x") cfg.solver.tau_x = std::stod(val);
    else if (key == "tau_u") cfg.solver.tau_u = std::stod(val);
    else if (key == "tau_v") cfg.solver.tau_v = std::stod(val);
    else if (key == "gamma0") cfg.solver.gamma0 = std::stod(val);
    else if (key == "zeta") cfg.solver.zeta = std::stod(val);
    else if (key == "max_outer_iters") cfg.solver.max_outer_iters = std::stoi(val);
    else if (key == "outer_tol") cfg.solver.outer_tol = std::stod(val);
    else if (key == "inner_max_iters") cfg.solver.inner_max_iters = std::stoi(val);
    else if (key == "inner_tol") cfg.solver.inner_tol = std::stod(val);
    else if (key == "kernel") {
      if (val == "gaussian") cfg.kernel.family = KernelFamily::kGaussian;
      else if (val == "laplacian") cfg.kernel.family = KernelFamily::kLaplacian;
      else if (val == "polynomial") cfg.kernel.family = KernelFamily::kPolynomial;
      else throw std::runtime_error("config: unknown kernel '" + val + "'");
    } else if (key == "sigma") {
      if (val == "median") cfg.sigma_median = true;
      else { cfg.sigma_median = false; cfg.kernel.sigma = std::stod(val); }
    }
    else if (key == "degree") cfg.kernel.degree = std::stoi(val);
    else if (key == "offset") cfg.kernel.offset = std::stod(val);
    else if (key == "grid_lambda1") cfg.grid_lambda1 = parse_doubles(val);
    else if (key == "grid_lambda2") cfg.grid_lambda2 = parse_doubles(val);
    else if (key == "grid_lambda_l") cfg.grid_lambda_l = parse_doubles(val);
    else if (key == "grid_lambda_u") cfg.grid_lambda_u = parse_doubles(val);
    else if (key == "grid_sigma") cfg.grid_sigma = parse_doubles(val);
    else if (key == "grid_n_l") cfg.grid_n_l = parse_ints(val);
    else if (key == "grid_d") cfg.grid_d = parse_ints(val);
    else if (key == "grid_r") cfg.grid_r = parse_ints(val);
    else if (key == "grid_runs") cfg.grid_runs = std::stoi(val);
    else if (key == "grid_ratio") cfg.grid_ratio = std::stod(val);
    else if (key == "validation_fraction") cfg.validation_fraction = std::stod(val);
    else if (key == "tune_on_truth") cfg.tune_on_truth = parse_bool(val);
    else throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                  ": unknown config key '" + key + "'");
  }
  if (cfg.network.empty()) throw std::runtime_error(path + ": missing 'network' key");
  if (cfg.dataset_name.empty()) cfg.dataset_name = file_stem(cfg.network);
  return cfg;
}

std::string param_table_csv(const std::string& dataset_name, long long n1,
                            long long n_l, long long t, long long d, long long r) {
  // S-VAR counts are reported constants for the two reference networks.
  std::string svar;
  if (dataset_name == "Cherry Hills") svar = "30000";
  else if (dataset_name == "Sioux Falls") svar = "15000";
  const long long own = param_count(n1, n_l, t, d, r);
  std::ostringstream ss;
  ss << "dataset,s_var,mmf,multil_krim\n"
     << dataset_name << "," << svar << "," << own << "," << own << "\n";
  return ss.str();
}

void write_heatmap_csv(const Eigen::MatrixXd& m, const std::string& path) {
  Eigen::MatrixXd a = m.cwiseAbs();
  const double mx = a.size() ? a.maxCoeff() : 0.0;
  if (mx > 0.0) a /= mx;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j) out << ",";
      out << a(i, j);
    }
    out << "\n";
  }
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  check_methods(cfg.methods);
  cfg.solver.validate();
  fs::create_directories(cfg.output_dir);
  const Problem p = load_problem(cfg);
  const Eigen::Index n1 = p.y.rows();
  const Eigen::Index t = p.y.cols();

  ExperimentReport report;
  double best_mae = std::numeric_limits<double>::infinity();

  for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
    for (int run = 0; run < cfg.runs; ++run) {
      const std::uint64_t tag = ri * 100000ULL + static_cast<std::uint64_t>(run);
      const SamplingMask mask = sample_per_snapshot(
          n1, t, cfg.ratios[ri], derive_seed(derive_seed(cfg.seed, kMaskStream), tag));

      for (const auto& method : cfg.methods) {
        RunRow row{method, cfg.ratios[ri], run,
                   std::numeric_limits<double>::quiet_NaN(), 0.0, false};
        const auto t0 = Clock::now();
        try {
          ImputeOutcome out =
              impute(method, p, mask, cfg, cfg.solver, cfg.n_l, 0.0,
                     derive_seed(derive_seed(cfg.seed, kLandmarkStream), tag),
                     derive_seed(derive_seed(cfg.seed, kInitStream), tag));
          row.mae = mae(out.x, p.y);
          row.ok = std::isfinite(row.mae);
          if (method == "multil_krim" && row.ok && row.mae < best_mae) {
            best_mae = row.mae;
            report.best_krim = std::move(out.factors);
            report.best_krim_diagnostics = std::move(out.diagnostics);
          }
        } catch (const std::exception&) {
          row.ok = false;  // flagged in the report, sweep continues
        }
        row.wall_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        report.runs.push_back(std::move(row));
      }
    }
  }

  // summary: mean and sample std over the finished runs of each cell
  for (const auto& method : cfg.methods) {
    for (double ratio : cfg.ratios) {
      std::vector<double> vals;
      for (const auto& r : report.runs)
        if (r.method == method && r.ratio == ratio && r.ok) vals.push_back(r.mae);
      SummaryRow s{method, ratio, std::numeric_limits<double>::quiet_NaN(), 0.0};
      if (!vals.empty()) {
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        s.mean_mae = mean;
        s.std_mae = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
      }
      report.summary.push_back(s);
    }
  }

  // artifacts
  {
    std::ostringstream ss;
    ss << "method,ratio,run,mae,wall_ms,status\n";
    for (const auto& r : report.runs)
      ss << r.method << "," << fmt(r.ratio) << "," << r.run << "," << fmt(r.mae) << ","
         << fmt(r.wall_ms) << "," << (r.ok ? "ok" : "failed") << "\n";
    write_csv(cfg.output_dir + "/per_run.csv", ss.str());
  }
  {
    std::ostringstream ss;
    ss << "method,ratio,mean_mae,std_mae\n";
    for (const auto& s : report.summary)
      ss << s.method << "," << fmt(s.ratio) << "," << fmt(s.mean_mae) << ","
         << fmt(s.std_mae) << "\n";
    write_csv(cfg.output_dir + "/summary.csv", ss.str());
  }
  write_csv(cfg.output_dir + "/param_table.csv",
            param_table_csv(cfg.dataset_name, n1, cfg.n_l, t, cfg.solver.d, cfg.solver.r));
  if (report.best_krim) {
    write_heatmap_csv(report.best_krim->u1, cfg.output_dir + "/heatmap_u1.csv");
    write_heatmap_csv(report.best_krim->u2, cfg.output_dir + "/heatmap_u2.csv");
    write_heatmap_csv(report.best_krim->v1, cfg.output_dir + "/heatmap_v1.csv");
    write_heatmap_csv(report.best_krim->v2, cfg.output_dir + "/heatmap_v2.csv");
    write_diagnostics_csv(report.best_krim_diagnostics,
                          cfg.output_dir + "/diagnostics_best.csv");
  }
  return report;
}

namespace {

/// Moves a per-column slice of observed entries into a validation set so
/// that the remaining training mask keeps equal per-column counts.
struct ValidationSplit {
  SamplingMask train;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> held_out;
};

ValidationSplit split_validation(const SamplingMask& mask, double fraction,
                                 std::uint64_t seed) {
  ValidationSplit out{mask, {}};
  Rng rng(seed);
  const Eigen::Index per_col = mask.observed_count(0);
  auto hold = static_cast<Eigen::Index>(std::floor(fraction * per_col));
  hold = std::min(per_col - 1, std::max<Eigen::Index>(1, hold));
  if (hold < 1) throw std::runtime_error("grid_search: too few observations to split");

  for (Eigen::Index col = 0; col < mask.cols(); ++col) {
    auto obs = mask.observed_rows(col);
    for (Eigen::Index k = 0; k < hold; ++k) {
      const auto j = k + rng.uniform_int(static_cast<std::int64_t>(obs.size()) - k);
      std::swap(obs[k], obs[j]);
      out.train.unobserve(obs[k], col);
      out.held_out.emplace_back(obs[k], col);
    }
  }
  return out;
}

double entries_mae(const FlowMatrix& x, const FlowMatrix& y,
                   const std::vector<std::pair<Eigen::Index, Eigen::Index>>& entries) {
  double acc = 0.0;
  for (const auto& [i, t] : entries) acc += std::abs(x(i, t) - y(i, t));
  return acc / static_cast<double>(entries.size());
}

}  // namespace

std::vector<GridResult> grid_search(const ExperimentConfig& cfg) {
  check_methods(cfg.methods);
  const Problem p = load_problem(cfg);
  const Eigen::Index n1 = p.y.rows();
  const Eigen::Index t = p.y.cols();

  const std::vector<double> one{0.0};
  std::vector<GridResult> results;

  for (const auto& method : cfg.methods) {
    const bool is_krim = method == "multil_krim";
    const bool is_factor = method != "flow_ssl";

    // irrelevant axes collapse to the scalar config value
    auto axis_d = [&](const std::vector<double>& a, bool on) {
      return (on && !a.empty()) ? a : one;
    };
    auto axis_i = [&](const std::vector<int>& a, bool on) {
      return (on && !a.empty()) ? a : std::vector<int>{0};
    };
    const auto l1s = axis_d(cfg.grid_lambda1, is_factor);
    const auto l2s = axis_d(cfg.grid_lambda2, is_factor);
    const auto lls = axis_d(cfg.grid_lambda_l, true);
    const auto lus = axis_d(cfg.grid_lambda_u, true);
    const auto sigmas = axis_d(cfg.grid_sigma, is_krim);
    const auto nls = axis_i(cfg.grid_n_l, is_factor);
    const auto ds = axis_i(cfg.grid_d, is_factor);
    const auto rs = axis_i(cfg.grid_r, is_factor);

    GridResult gr;
    gr.method = method;
    bool have_best = false;

    for (double l1 : l1s)
      for (double l2 : l2s)
        for (double ll : lls)
          for (double lu : lus)
            for (double sg : sigmas)
              for (int nl : nls)
                for (int d : ds)
                  for (int r : rs) {
                    GridCell cell;
                    cell.lambda1 = cfg.grid_lambda1.empty() || !is_factor ? cfg.solver.lambda1 : l1;
                    cell.lambda2 = cfg.grid_lambda2.empty() || !is_factor ? cfg.solver.lambda2 : l2;
                    cell.lambda_l = cfg.grid_lambda_l.empty() ? cfg.solver.lambda_l : ll;
                    cell.lambda_u = cfg.grid_lambda_u.empty() ? cfg.solver.lambda_u : lu;
                    cell.sigma = cfg.grid_sigma.empty() || !is_krim ? 0.0 : sg;
                    cell.n_l = cfg.grid_n_l.empty() || !is_factor ? cfg.n_l : nl;
                    cell.d = cfg.grid_d.empty() || !is_factor ? cfg.solver.d : d;
                    cell.r = cfg.grid_r.empty() || !is_factor ? cfg.solver.r : r;
                    cell.params =
                        is_factor ? param_count(n1, cell.n_l, t, cell.d, cell.r) : 0;

                    SolverConfig s = cfg.solver;
                    s.lambda1 = cell.lambda1;
                    s.lambda2 = cell.lambda2;
                    s.lambda_l = cell.lambda_l;
                    s.lambda_u = cell.lambda_u;
                    s.d = cell.d;
                    s.r = cell.r;

                    double acc = 0.0;
                    int counted = 0;
                    for (int run = 0; run < cfg.grid_runs; ++run) {
                      const SamplingMask mask = sample_per_snapshot(
                          n1, t, cfg.grid_ratio,
                          derive_seed(derive_seed(cfg.seed, kGridMaskStream), run));
                      try {
                        double err;
                        const auto lm_seed =
                            derive_seed(derive_seed(cfg.seed, kLandmarkStream), run);
                        const auto init_seed =
                            derive_seed(derive_seed(cfg.seed, kInitStream), run);
                        if (cfg.tune_on_truth) {
                          ImputeOutcome out = impute(method, p, mask, cfg, s, cell.n_l,
                                                     cell.sigma, lm_seed, init_seed);
                          err = mae(out.x, p.y);
                        } else {
                          const ValidationSplit vs = split_validation(
                              mask, cfg.validation_fraction,
                              derive_seed(derive_seed(cfg.seed, kValSplitStream), run));
                          ImputeOutcome out = impute(method, p, vs.train, cfg, s, cell.n_l,
                                                     cell.sigma, lm_seed, init_seed);
                          err = entries_mae(out.x, p.y, vs.held_out);
                        }
                        if (std::isfinite(err)) {
                          acc += err;
                          ++counted;
                        }
                      } catch (const std::exception&) {
                        // failed cell run; skipped from the mean
                      }
                    }
                    cell.mean_mae = counted > 0
                                        ? acc / counted
                                        : std::numeric_limits<double>::infinity();
                    gr.cells.push_back(cell);

                    const bool better =
                        !have_best || cell.mean_mae < gr.best.mean_mae ||
                        (cell.mean_mae == gr.best.mean_mae && cell.params < gr.best.params);
                    if (better) {
                      gr.best = cell;
                      have_best = true;
                    }
                  }
    if (gr.cells.empty()) throw std::runtime_error("grid_search: empty grid");
    results.push_back(std::move(gr));
  }

  fs::create_directories(cfg.output_dir);
  std::ostringstream best;
  best << "method,lambda1,lambda2,lambda_l,lambda_u,sigma,n_l,d,r,params,mean_mae\n";
  for (const auto& gr : results) {
    std::ostringstream ss;
    ss << "lambda1,lambda2,lambda_l,lambda_u,sigma,n_l,d,r,params,mean_mae\n";
    for (const auto& c : gr.cells)
      ss << fmt(c.lambda1) << "," << fmt(c.lambda2) << "," << fmt(c.lambda_l) << ","
         << fmt(c.lambda_u) << "," << fmt(c.sigma) << "," << c.n_l << "," << c.d << ","
         << c.r << "," << c.params << "," << fmt(c.mean_mae) << "\n";
    write_csv(cfg.output_dir + "/grid_" + gr.method + ".csv", ss.str());
    const auto& c = gr.best;
    best << gr.method << "," << fmt(c.lambda1) << "," << fmt(c.lambda2) << ","
         << fmt(c.lambda_l) << "," << fmt(c.lambda_u) << "," << fmt(c.sigma) << ","
         << c.n_l << "," << c.d << "," << c.r << "," << c.params << ","
         << fmt(c.mean_mae) << "\n";
  }
  write_csv(cfg.output_dir + "/best_params.csv", best.str());
  return results;
}

}  // namespace edgeflow
