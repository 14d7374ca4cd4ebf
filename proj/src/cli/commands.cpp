// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bkr/csv.hpp"
#include "bkr/error.hpp"
#include "bkr/generators.hpp"
#include "bkr/hankel.hpp"
#include "bkr/kernels.hpp"
#include "bkr/krylov.hpp"
#include "bkr/matrix_market.hpp"
#include "bkr/sketch.hpp"
#include "bkr/solver.hpp"
#include "bkr/xlab/report.hpp"

namespace bkr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSolveSchema = "bkr.solve-report/1";
constexpr const char* kSpectrumSchema = "bkr.krylov-spectrum/1";

// Raised for bad input files and inconsistent flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw UsageError("cannot write '" + p.string() + "'");
  out << j.dump(2) << '\n';
}

json read_json(const std::string& path_or_text) {
  std::string text = path_or_text;
  if (fs::exists(path_or_text)) {
    std::ifstream in(path_or_text);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid JSON in '") + path_or_text + "': " + e.what());
  }
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + dir.string() + "'");
}

SparseMatrix load_matrix(const std::string& path) {
  try {
    return mm::read(fs::path(path));
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  }
}

std::vector<double> load_vector(const std::string& path) {
  try {
    return io::read_vector(fs::path(path));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string out;
  std::string config;
  Index m = 4;
  double alpha = 1e-6;
  double c_h = 1.0;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  Index retries = 1;
  Index refine = 2;
  std::string hankel_mode = "auto";
  int threads = 0;
};

int cmd_solve(const SolveArgs& a, const CLI::App& sub, std::ostream& out) {
  SolverConfig cfg;
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    cfg = (j.contains("solver") ? j.at("solver") : j).get<SolverConfig>();
  }
  if (sub.count("--m") || a.config.empty()) cfg.m = a.m;
  if (sub.count("--alpha") || a.config.empty()) cfg.alpha_A = a.alpha;
  if (sub.count("--c-h") || a.config.empty()) cfg.c_h = a.c_h;
  if (sub.count("--seed") || a.config.empty()) cfg.seed = a.seed;
  if (sub.count("--tol") || a.config.empty()) cfg.target_residual = a.tol;
  if (sub.count("--retries") || a.config.empty()) cfg.max_retries = a.retries;
  if (sub.count("--refine") || a.config.empty()) cfg.refine_steps = a.refine;
  if (sub.count("--hankel-mode") || a.config.empty()) cfg.hankel.mode = hankel_mode_from_string(a.hankel_mode);
  cfg.validate();

  const fs::path dir(a.out);
  prepare_dir(dir);
  write_json(dir / "resolved-config.json",
             {{"command", "solve"}, {"matrix", a.matrix}, {"rhs", a.rhs}, {"threads", a.threads}, {"solver", cfg}});

  SparseMatrix mat = load_matrix(a.matrix);
  const std::vector<double> b = load_vector(a.rhs);
  if (mat.rows() != mat.cols()) throw UsageError("matrix must be square");
  if (b.size() != mat.rows()) throw UsageError("rhs length does not match matrix dimension");
  if (!mat.is_symmetric()) throw UsageError("matrix must be symmetric");

  SolveReport report;
  std::string status = "ok";
  std::string message;
  try {
    report = simplified_block_krylov_solve(make_operator(std::move(mat)), b, cfg);
  } catch (const SolverFailure& e) {
    report = e.best();
    status = "solver-failure";
    message = e.what();
  }
  const bool converged = status == "ok" && report.relative_residual <= cfg.target_residual;
  if (status == "ok" && !converged) status = "above-tolerance";

  json j = to_json(report, false);
  j["schema"] = kSolveSchema;
  j["status"] = status;
  j["tolerance"] = cfg.target_residual;
  if (!message.empty()) j["message"] = message;
  write_json(dir / "report.json", j);
  if (!report.x.empty()) io::write_vector(dir / "x.txt", report.x);
  out << "solve: " << status << " relative_residual=" << io::format_double(report.relative_residual) << '\n';
  return converged ? kExitOk : kExitContract;
}

// ----------------------------------------------------------- gen-matrix

struct GenArgs {
  std::string kind = "spd";
  std::string out;
  Index n = 64;
  double cond = 1e3;
  double density = 0.05;
  Index rank = 0;
  std::uint64_t seed = 0;
  std::string sketch;
};

std::vector<double> linspace(double lo, double hi, Index n) {
  std::vector<double> v(n);
  for (Index i = 0; i < n; ++i)
    v[i] = n == 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

int cmd_gen_matrix(const GenArgs& a, std::ostream& out) {
  const fs::path dir(a.out);
  prepare_dir(dir);
  json resolved = {{"command", "gen-matrix"}, {"kind", a.kind}, {"n", a.n},       {"cond", a.cond},
                   {"density", a.density},    {"rank", a.rank}, {"seed", a.seed}};
  if (a.n == 0) throw UsageError("gen-matrix: n must be positive");

  if (a.kind == "sketch") {
    if (a.sketch.empty()) throw UsageError("gen-matrix sketch: --spec is required");
    SketchSpec spec = read_json(a.sketch).get<SketchSpec>();
    resolved["sketch"] = spec;
    write_json(dir / "resolved-config.json", resolved);
    mm::write(dir / "matrix.mtx", sample_sparse_gaussian(spec), mm::Symmetry::general);
    out << "gen-matrix: sketch " << spec.n << "x" << spec.s << '\n';
    return kExitOk;
  }

  SparseMatrix mat;
  bool has_solution = true;
  if (a.kind == "spd") {
    mat = gen::random_sparse_spd(a.n, a.cond, a.density, a.seed);
  } else if (a.kind == "identity") {
    mat = SparseMatrix::identity(a.n);
  } else if (a.kind == "diag") {
    const std::vector<double> eigs = linspace(1.0 / a.cond, 1.0, a.n);
    std::vector<Triplet> t;
    for (Index i = 0; i < a.n; ++i) t.push_back({i, i, eigs[i]});
    mat = SparseMatrix::from_triplets(a.n, a.n, std::move(t));
  } else if (a.kind == "rank-deficient") {
    const Index rank = a.rank == 0 ? a.n / 2 : a.rank;
    if (rank >= a.n) throw UsageError("gen-matrix rank-deficient: rank must be below n");
    resolved["rank"] = rank;
    std::vector<double> eigs(a.n, 0.0);
    const std::vector<double> top = linspace(0.1, 1.0, rank);
    std::copy(top.begin(), top.end(), eigs.begin());
    mat = gen::rotated_diagonal(eigs, a.seed);
    has_solution = false;
  } else {
    throw UsageError("gen-matrix: unknown kind '" + a.kind + "'");
  }
  write_json(dir / "resolved-config.json", resolved);

  mm::write(dir / "matrix.mtx", mat, mm::Symmetry::symmetric);
  const std::vector<double> x = gen::gaussian_vector(a.n, SeedPath(a.seed, {1}).key());
  if (has_solution) {
    io::write_vector(dir / "rhs.txt", spmv(mat, x));
    io::write_vector(dir / "solution.txt", x);
  } else {
    io::write_vector(dir / "rhs.txt", x);
  }
  out << "gen-matrix: " << a.kind << " n=" << a.n << " nnz=" << mat.nnz() << '\n';
  return kExitOk;
}

// ------------------------------------------------------ krylov-spectrum

struct SpectrumArgs {
  std::string matrix;
  std::string out;
  Index m = 4;
  double alpha = 1e-6;
  double c_h = 1.0;
  double h = 0.0;
  std::uint64_t seed = 0;
  int threads = 0;
};

int cmd_krylov_spectrum(const SpectrumArgs& a, std::ostream& out) {
  const fs::path dir(a.out);
  prepare_dir(dir);
  SparseMatrix mat = load_matrix(a.matrix);
  const Index n = mat.rows();
  if (mat.rows() != mat.cols() || !mat.is_symmetric()) throw UsageError("matrix must be square and symmetric");
  if (a.m == 0 || n % a.m != 0) throw UsageError("krylov-spectrum: m must divide n");
  const SketchShape shape = default_sketch_width_and_density(n, a.m, a.alpha, a.c_h);
  const SketchSpec spec{n, shape.s, a.h > 0.0 ? a.h : shape.h, a.seed};
  write_json(dir / "resolved-config.json", {{"command", "krylov-spectrum"},
                                            {"matrix", a.matrix},
                                            {"m", a.m},
                                            {"alpha", a.alpha},
                                            {"c_h", a.c_h},
                                            {"threads", a.threads},
                                            {"sketch", spec}});
  const SpectralSummary s = krylov_spectrum(build_krylov(make_operator(std::move(mat)), sample_sparse_gaussian(spec), a.m));
  json j = {{"schema", kSpectrumSchema},
            {"n", n},
            {"m", a.m},
            {"s", spec.s},
            {"h", spec.h},
            {"seed", a.seed},
            {"singular_values", s.singular_values},
            {"sigma_min", s.sigma_min},
            {"sigma_max", s.sigma_max()},
            {"condition_number", std::isfinite(s.condition_number) ? json(s.condition_number) : json("inf")}};
  write_json(dir / "spectrum.json", j);
  out << "krylov-spectrum: sigma_min=" << io::format_double(s.sigma_min) << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- experiment

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct ExperimentArgs {
  std::string kind;
  std::string out;
  std::string config;
  std::string m;
  Index n = 0;
  Index trials = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool expect_fail = false;
  double alpha = kUnset;
  double beta = kUnset;
  double s_bound = 0.0;
  std::string sampler;
  std::string tag;
  double budget = kUnset;
  double pass_constant = kUnset;
  std::vector<double> eps_grid;
  double h = 0.0;
  double c_h = 1.0;
  double alpha_A = 1e-6;
  double gap = 1e-3;
  Index repeated = 0;
  bool negative_control = false;
  Index directions = 32;
  Index samples = 10000;
  Index descent = 32;
  double base_shift = 0.0;
  double decay_ratio = 0.1;
};

struct Params {
  double alpha = 0.0;
  double beta = 0.0;
  double s_bound = 0.0;
  std::string sampler;
  std::string tag;
  double base_shift = 0.0;
  Index directions = 32;
  Index samples = 10000;
  Index descent = 32;
};

void to_json(json& j, const Params& p) {
  j = {{"alpha", p.alpha},           {"beta", p.beta},         {"s_bound", p.s_bound},
       {"sampler", p.sampler},       {"tag", p.tag},           {"base_shift", p.base_shift},
       {"directions", p.directions}, {"samples", p.samples},   {"descent", p.descent}};
}

void from_json(const json& j, Params& p) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("alpha", p.alpha);
  get("beta", p.beta);
  get("s_bound", p.s_bound);
  get("sampler", p.sampler);
  get("tag", p.tag);
  get("base_shift", p.base_shift);
  get("directions", p.directions);
  get("samples", p.samples);
  get("descent", p.descent);
}

Index single_dim(const std::vector<Index>& dims) {
  if (dims.size() != 1) throw UsageError("--m takes a single value for this experiment");
  return dims.front();
}

double default_alpha(const std::string& kind) {
  if (kind == "psd-sum") return 0.1;
  if (kind == "small-ball") return 1.0;
  return 0.5;
}

std::string default_sampler(const std::string& kind) {
  if (kind == "psd-sum") return "rank-one";
  if (kind == "jointly-gaussian") return "iid";
  if (kind == "gaussian-combination") return "gaussian";
  if (kind == "small-ball") return "gaussian";
  return "default";
}

xlab::MatrixTypeTag sampler_tag(const std::string& sampler) {
  if (sampler == "complex-gaussian") return xlab::MatrixTypeTag::complex;
  if (sampler == "symmetric" || sampler == "counterexample" || sampler == "identity")
    return xlab::MatrixTypeTag::real_symmetric;
  if (sampler == "hermitian") return xlab::MatrixTypeTag::self_adjoint;
  return xlab::MatrixTypeTag::real;
}

xlab::MatrixSampler small_ball_sampler(const std::string& name, Index m) {
  if (name == "gaussian") return xlab::gaussian_sampler(m);
  if (name == "zero") return xlab::zero_sampler(m);
  if (name == "complex-gaussian") return xlab::complex_gaussian_sampler(m);
  if (name == "symmetric") return xlab::symmetric_gaussian_sampler(m);
  if (name == "hermitian") return xlab::hermitian_gaussian_sampler(m);
  if (name == "counterexample") return xlab::counterexample_ensemble(m).sampler();
  throw UsageError("small-ball: unknown sampler '" + name + "'");
}

void write_small_ball(const fs::path& dir, const xlab::SmallBallEstimate& e, const json& params) {
  json j = {{"schema", xlab::kSmallBallSchema}, {"params", params}, {"estimate", to_json(e)}};
  write_json(dir / "report.json", j);
  std::ofstream csv(dir / "trials.csv");
  csv << "pair,probability\n";
  for (Index i = 0; i < e.pair_probabilities.size(); ++i)
    csv << i << ',' << io::format_double(e.pair_probabilities[i]) << '\n';
}

int finish_exit(bool pass, bool expect_fail) {
  return (pass != expect_fail) ? kExitOk : kExitContract;
}

int cmd_experiment(const ExperimentArgs& a, const CLI::App& sub, std::ostream& out) {
  const std::string& kind = a.kind;
  const bool small_ball = kind == "small-ball";
  xlab::EnsembleSpec spec;
  if (!small_ball) {
    try {
      spec = xlab::default_spec(xlab::ensemble_kind_from_string(kind));
    } catch (const std::invalid_argument&) {
      throw UsageError("unknown experiment kind '" + kind + "'");
    }
  }
  Params p;
  p.alpha = default_alpha(kind);
  p.sampler = default_sampler(kind);
  if (!a.config.empty()) {
    const json cfg = read_json(a.config);
    if (cfg.contains("spec")) from_json(cfg.at("spec"), spec);
    if (cfg.contains("params")) from_json(cfg.at("params"), p);
  }

  if (sub.count("--trials")) spec.trials = a.trials;
  if (sub.count("--seed")) spec.seed = a.seed;
  if (!std::isnan(a.budget)) spec.failure_budget = a.budget;
  if (!std::isnan(a.pass_constant)) spec.pass_constant = a.pass_constant;
  if (sub.count("--eps-grid")) spec.eps_grid = a.eps_grid;
  if (!std::isnan(a.alpha)) p.alpha = a.alpha;
  if (sub.count("--s-bound")) p.s_bound = a.s_bound;
  if (sub.count("--sampler")) p.sampler = a.sampler;
  if (sub.count("--base-shift")) p.base_shift = a.base_shift;
  if (sub.count("--directions")) p.directions = a.directions;
  if (sub.count("--samples")) p.samples = a.samples;
  if (sub.count("--descent")) p.descent = a.descent;
  if (sub.count("--sketch-h")) spec.h = a.h;
  if (sub.count("--c-h")) spec.c_h = a.c_h;
  if (sub.count("--alpha-A")) spec.alpha_A = a.alpha_A;
  if (sub.count("--gap")) spec.eig_gap = a.gap;
  if (sub.count("--repeated")) spec.repeated = a.repeated;
  if (sub.count("--decay-ratio")) spec.decay_ratio = a.decay_ratio;
  if (!p.sampler.empty()) spec.sampler = p.sampler;

  const std::vector<Index> dims = parse_index_list(a.m);
  if (kind == "krylov") {
    if (sub.count("--n")) spec.dim = a.n;
    if (!dims.empty()) spec.krylov_steps = single_dim(dims);
    if (a.negative_control) spec.repeated = spec.dim / spec.krylov_steps + 1;
  } else if (kind == "counterexample") {
    if (!dims.empty()) spec.dims = dims;
  } else {
    if (!dims.empty()) spec.dim = single_dim(dims);
    if (sub.count("--n")) spec.terms = a.n;
  }
  if (small_ball) {
    if (dims.empty()) spec.dim = 8;
  }

  if (!std::isnan(a.beta)) {
    p.beta = a.beta;
  } else if (a.config.empty()) {
    if (kind == "psd-sum") p.beta = p.sampler == "rank-one" ? xlab::chi_square_1_tail(p.alpha) : 1.0;
  }
  if (p.tag.empty() || sub.count("--tag")) p.tag = a.tag.empty() ? xlab::to_string(sampler_tag(p.sampler)) : a.tag;

  const fs::path dir(a.out);
  prepare_dir(dir);
  json resolved = {{"command", "experiment"}, {"kind", kind}, {"threads", a.threads},
                   {"expect_fail", a.expect_fail}, {"params", p}};
  if (small_ball) {
    resolved["spec"] = {{"dim", spec.dim}, {"seed", spec.seed}};
  } else {
    resolved["spec"] = spec;
  }
  write_json(dir / "resolved-config.json", resolved);

  if (small_ball) {
    xlab::SmallBallConfig cfg;
    cfg.alpha = p.alpha;
    cfg.tag = xlab::matrix_type_from_string(p.tag);
    cfg.n_directions = p.directions;
    cfg.n_samples = p.samples;
    cfg.descent_steps = p.descent;
    cfg.seed = spec.seed;
    const xlab::SmallBallEstimate e = xlab::estimate_small_ball(small_ball_sampler(p.sampler, spec.dim), cfg);
    write_small_ball(dir, e, resolved);
    out << "small-ball: beta_hat=" << io::format_double(e.beta_hat) << '\n';
    return finish_exit(true, a.expect_fail);
  }

  xlab::ExperimentReport report;
  try {
    const Index m = spec.dim;
    switch (spec.kind) {
      case xlab::EnsembleKind::psd_sum: {
        xlab::PsdSampler sampler;
        if (p.sampler == "rank-one") {
          sampler = xlab::rank_one_gaussian_psd(m);
        } else if (p.sampler == "identity") {
          sampler = xlab::fixed_psd(Eigen::MatrixXd::Identity(m, m));
        } else if (p.sampler == "e1") {
          Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(m, m);
          e1(0, 0) = 1.0;
          sampler = xlab::fixed_psd(e1);
        } else {
          throw UsageError("psd-sum: unknown sampler '" + p.sampler + "'");
        }
        report = xlab::run_psd_sum_experiment(spec, p.alpha, p.beta, sampler);
        break;
      }
      case xlab::EnsembleKind::jointly_gaussian: {
        xlab::JointlyGaussianEnsemble ens;
        if (p.sampler == "iid") {
          ens = xlab::iid_gaussian_ensemble(m);
        } else if (p.sampler == "counterexample") {
          ens = xlab::counterexample_ensemble(m);
        } else {
          throw UsageError("jointly-gaussian: unknown ensemble '" + p.sampler + "'");
        }
        report = xlab::run_jointly_gaussian_experiment(spec, ens, p.alpha, p.s_bound);
        break;
      }
      case xlab::EnsembleKind::gaussian_combination: {
        xlab::CoefficientSampler coeffs;
        if (p.sampler == "gaussian") {
          coeffs = xlab::gaussian_coefficients(m);
        } else if (p.sampler == "identity") {
          coeffs = xlab::fixed_coefficients({xlab::CMatrix::Identity(m, m)});
        } else {
          throw UsageError("gaussian-combination: unknown sampler '" + p.sampler + "'");
        }
        const xlab::CMatrix base = p.base_shift * xlab::CMatrix::Identity(m, m);
        report = xlab::run_gaussian_combination_experiment(spec, base, coeffs, xlab::matrix_type_from_string(p.tag),
                                                           p.alpha, p.beta, p.s_bound);
        break;
      }
      case xlab::EnsembleKind::krylov:
        report = xlab::run_krylov_experiment(spec);
        break;
      case xlab::EnsembleKind::counterexample:
        report = xlab::run_counterexample_experiment(spec);
        break;
    }
  } catch (const PreconditionFailed& e) {
    write_json(dir / "report.json", {{"schema", xlab::kExperimentSchema},
                                     {"spec", spec},
                                     {"params", p},
                                     {"status", "precondition-failed"},
                                     {"message", e.what()},
                                     {"pass", false}});
    std::ofstream(dir / "trials.csv") << "trial,group,sigma_min,sigma_max,statistic,violated\n";
    out << "experiment " << kind << ": precondition failed: " << e.what() << '\n';
    return finish_exit(false, a.expect_fail);
  }
  xlab::write_report(dir, report);
  out << "experiment " << kind << ": violation_fraction=" << io::format_double(report.violation_fraction)
      << " bound=" << io::format_double(report.bound_value) << (report.pass ? " PASS" : " FAIL") << '\n';
  return finish_exit(report.pass, a.expect_fail);
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string m = "64,128";
  Index s = 8;
  Index reps = 20;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const fs::path dir(a.out);
  prepare_dir(dir);
  const std::vector<Index> grid = parse_index_list(a.m);
  write_json(dir / "resolved-config.json", {{"command", "bench"},
                                            {"m", grid},
                                            {"s", a.s},
                                            {"reps", a.reps},
                                            {"seed", a.seed},
                                            {"threads", a.threads}});
  const std::vector<BenchRow> rows = bench_hankel_grid(grid, a.s, a.reps, a.seed);
  std::ofstream csv(dir / "bench.csv");
  if (!csv) throw UsageError("cannot write bench.csv");
  write_bench_csv(csv, rows);
  out << "bench: " << rows.size() << " rows\n";
  return kExitOk;
}

template <typename F>
double seconds_per_call(Index inner, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  for (Index k = 0; k < inner; ++k) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
         static_cast<double>(inner);
}

// Repeat count bringing one timed repetition to about a millisecond.
template <typename F>
Index calibrate(F&& f) {
  f();
  const double once = seconds_per_call(1, f);
  return std::clamp<Index>(static_cast<Index>(1e-3 / std::max(once, 1e-9)), 1, 10000);
}

double median_of(std::vector<double> t) {
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

struct BenchCase {
  Index m = 0;
  Index s = 0;
  BlockHankelMatrix h;
  std::unique_ptr<FastHankelOperator> fast;
  std::unique_ptr<DenseHankelOperator> dense;
  std::vector<double> v, yf, yd;
  Index fast_inner = 1, dense_inner = 1;
  std::vector<double> fast_times, dense_times;
};

BenchCase make_bench_case(Index m, Index s, std::uint64_t seed) {
  const Index n = m * s;
  std::vector<Triplet> diag;
  const std::vector<double> eigs = linspace(0.5, 1.0, n);
  for (Index i = 0; i < n; ++i) diag.push_back({i, i, eigs[i]});
  const OperatorPtr a = make_operator(SparseMatrix::from_triplets(n, n, std::move(diag)));
  const SketchShape shape = default_sketch_width_and_density(n, m, 1e-6, 1.0);
  const SketchSpec spec{n, s, shape.h, SeedPath(seed, {m, s}).key()};
  BenchCase c;
  c.m = m;
  c.s = s;
  c.h = assemble_block_hankel(build_krylov(a, sample_sparse_gaussian(spec), m));
  c.fast = std::make_unique<FastHankelOperator>(c.h);
  c.dense = std::make_unique<DenseHankelOperator>(c.h);
  c.v = gen::gaussian_vector(n, SeedPath(seed, {m, s, 1}).key());
  c.yf.resize(n);
  c.yd.resize(n);
  return c;
}

}  // namespace

std::vector<BenchRow> bench_hankel_grid(const std::vector<Index>& ms, Index s, Index repetitions,
                                        std::uint64_t seed) {
  require(s >= 1 && repetitions >= 1, "bench: s and repetitions must be >= 1");
  std::vector<BenchCase> cases;
  for (Index m : ms) {
    require(m >= 1, "bench: m must be >= 1");
    cases.push_back(make_bench_case(m, s, seed));
  }
  for (BenchCase& c : cases) {
    c.fast_inner = calibrate([&] { c.fast->apply(c.v, c.yf); });
    c.dense_inner = calibrate([&] { c.dense->apply(c.v, c.yd); });
  }
  // Sizes are interleaved inside each repetition so slow drifts of the
  // machine affect every size alike.
  for (Index r = 0; r < repetitions; ++r)
    for (BenchCase& c : cases) {
      c.fast_times.push_back(seconds_per_call(c.fast_inner, [&] { c.fast->apply(c.v, c.yf); }));
      c.dense_times.push_back(seconds_per_call(c.dense_inner, [&] { c.dense->apply(c.v, c.yd); }));
    }

  std::vector<BenchRow> rows;
  for (BenchCase& c : cases) {
    BenchRow row;
    row.m = c.m;
    row.s = c.s;
    row.fast_matvec_time = median_of(c.fast_times);
    row.dense_matvec_time = median_of(c.dense_times);
    double diff = 0.0, scale = 0.0;
    for (Index i = 0; i < c.yd.size(); ++i) {
      diff = std::max(diff, std::abs(c.yf[i] - c.yd[i]));
      scale = std::max(scale, std::abs(c.yd[i]));
    }
    row.max_rel_diff = scale > 0.0 ? diff / scale : diff;

    HankelSolveConfig cfg;
    cfg.mode = HankelMode::structured_cg;
    const HankelSolver solver(c.h, cfg);
    const auto start = std::chrono::steady_clock::now();
    try {
      solver.solve(c.yd);
    } catch (const IllConditionedSystem&) {
    }
    row.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return rows;
}

BenchRow bench_hankel(Index m, Index s, Index repetitions, std::uint64_t seed) {
  require(m >= 1, "bench: m must be >= 1");
  return bench_hankel_grid({m}, s, repetitions, seed).front();
}

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item[0] == '-') throw UsageError("invalid list entry '" + item + "'");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "m,s,fast_matvec_time,dense_matvec_time,solve_time,fast_dense_ratio,max_rel_diff\n";
  for (const BenchRow& r : rows) {
    const double ratio = r.dense_matvec_time > 0.0 ? r.fast_matvec_time / r.dense_matvec_time : 0.0;
    out << r.m << ',' << r.s << ',' << io::format_double(r.fast_matvec_time) << ','
        << io::format_double(r.dense_matvec_time) << ',' << io::format_double(r.solve_time) << ','
        << io::format_double(ratio) << ',' << io::format_double(r.max_rel_diff) << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bkrylov: sparse block Krylov solver and random-matrix experiments", "bkrylov"};
  app.require_subcommand(1);
  std::function<int()> action;
  int threads = 0;

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Solve A x = b for a symmetric Matrix Market A");
  s->add_option("matrix", solve.matrix, "Matrix Market file")->required();
  s->add_option("rhs", solve.rhs, "right-hand side, one value per line")->required();
  s->add_option("--out", solve.out, "output directory")->required();
  s->add_option("--config", solve.config, "solver configuration JSON (e.g. a resolved-config solver block)");
  s->add_option("--m", solve.m, "Krylov steps");
  s->add_option("--alpha", solve.alpha, "eigenvalue range proxy feeding the sketch density");
  s->add_option("--c-h", solve.c_h, "sketch density constant");
  s->add_option("--seed", solve.seed, "root seed");
  s->add_option("--tol", solve.tol, "target relative residual");
  s->add_option("--retries", solve.retries, "fresh sketches after the first");
  s->add_option("--refine", solve.refine, "iterative refinement steps");
  s->add_option("--hankel-mode", solve.hankel_mode, "auto, structured-cg or dense-ldl");
  s->add_option("--threads", threads, "worker threads (0 = all)");
  s->callback([&] { action = [&] {
      solve.threads = threads;
      return cmd_solve(solve, *s, out);
    }; });

  GenArgs gen;
  auto* g = app.add_subcommand("gen-matrix", "Write a test matrix with right-hand side and known solution");
  g->add_option("--kind", gen.kind, "spd, identity, diag, rank-deficient or sketch");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--n", gen.n, "dimension");
  g->add_option("--cond", gen.cond, "condition number (spd, diag)");
  g->add_option("--density", gen.density, "off-diagonal density (spd)");
  g->add_option("--rank", gen.rank, "rank (rank-deficient; default n/2)");
  g->add_option("--seed", gen.seed, "seed");
  g->add_option("--spec", gen.sketch, "sketch JSON {n, s, h, seed} or a path to one");
  g->callback([&] { action = [&] { return cmd_gen_matrix(gen, out); }; });

  SpectrumArgs spec;
  auto* k = app.add_subcommand("krylov-spectrum", "Singular values of the Krylov matrix of A");
  k->add_option("matrix", spec.matrix, "Matrix Market file")->required();
  k->add_option("--out", spec.out, "output directory")->required();
  k->add_option("--m", spec.m, "Krylov steps");
  k->add_option("--alpha", spec.alpha, "eigenvalue range proxy");
  k->add_option("--c-h", spec.c_h, "sketch density constant");
  k->add_option("--sketch-h", spec.h, "sketch density h (0 = default formula)");
  k->add_option("--seed", spec.seed, "sketch seed");
  k->add_option("--threads", threads, "worker threads (0 = all)");
  k->callback([&] { action = [&] {
      spec.threads = threads;
      return cmd_krylov_spectrum(spec, out);
    }; });

  ExperimentArgs ex;
  auto* e = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  e->add_option("kind", ex.kind,
                "psd-sum, jointly-gaussian, gaussian-combination, krylov, counterexample or small-ball")
      ->required();
  e->add_option("--out", ex.out, "output directory")->required();
  e->add_option("--config", ex.config, "resolved-config.json of an earlier run");
  e->add_option("--m", ex.m, "matrix dimension; Krylov steps for krylov; comma list for counterexample");
  e->add_option("--n", ex.n, "summands; operator dimension for krylov");
  e->add_option("--trials", ex.trials, "trials");
  e->add_option("--seed", ex.seed, "root seed");
  e->add_option("--threads", threads, "worker threads (0 = all)");
  e->add_flag("--expect-fail", ex.expect_fail, "exit 0 iff the pass criterion fails");
  e->add_option("--alpha", ex.alpha, "small-ball threshold alpha");
  e->add_option("--beta", ex.beta, "small-ball probability beta");
  e->add_option("--s-bound", ex.s_bound, "bound s on sigma_1 (0 = empirical 7/8 quantile)");
  e->add_option("--sampler", ex.sampler, "sampler or ensemble name");
  e->add_option("--tag", ex.tag, "matrix type: real, complex, real-symmetric, self-adjoint");
  e->add_option("--budget", ex.budget, "failure budget");
  e->add_option("--pass-constant", ex.pass_constant, "C in violation <= C eps");
  e->add_option("--eps-grid", ex.eps_grid, "eps grid")->delimiter(',');
  e->add_option("--sketch-h", ex.h, "sketch density h (krylov; 0 = default formula)");
  e->add_option("--c-h", ex.c_h, "sketch density constant (krylov)");
  e->add_option("--alpha-A", ex.alpha_A, "alpha feeding the default h (krylov)");
  e->add_option("--gap", ex.gap, "minimum eigenvalue gap (krylov)");
  e->add_option("--repeated", ex.repeated, "multiplicity of a repeated eigenvalue (krylov)");
  e->add_flag("--negative-control", ex.negative_control, "krylov: repeat one eigenvalue n/m + 1 times");
  e->add_option("--directions", ex.directions, "small-ball random directions");
  e->add_option("--samples", ex.samples, "small-ball matrix samples");
  e->add_option("--descent", ex.descent, "small-ball descent steps");
  e->add_option("--base-shift", ex.base_shift, "M_0 = shift * I (gaussian-combination)");
  e->add_option("--decay-ratio", ex.decay_ratio, "largest allowed ratio of successive medians");
  e->callback([&] { action = [&] {
      ex.threads = threads;
      return cmd_experiment(ex, *e, out);
    }; });

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time fast and dense Hankel products");
  b->add_option("--m", bench.m, "comma list of block counts m");
  b->add_option("--s", bench.s, "block size s");
  b->add_option("--reps", bench.reps, "repetitions per measurement");
  b->add_option("--seed", bench.seed, "seed");
  b->add_option("--out", bench.out, "output directory")->required();
  b->add_option("--threads", threads, "worker threads (0 = all)");
  b->callback([&] { action = [&] {
      bench.threads = threads;
      return cmd_bench(bench, out);
    }; });

  std::vector<std::string> argv_store{"bkrylov"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_thread_count(threads);
    const int code = action ? action() : kExitUsage;
    set_thread_count(0);
    return code;
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (const json::exception& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    set_thread_count(0);
    return kExitContract;
  }
  set_thread_count(0);
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bkr::cli
