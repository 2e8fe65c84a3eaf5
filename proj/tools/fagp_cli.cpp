// fagp: dataset generation, benchmark sweeps, verification and one-shot
// prediction for the low-rank Mercer GP.
//
// Exit codes: 0 success, 1 usage, 2 verification failure, 3 I/O, 4 numerical.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fagp/backend.hpp"
#include "fagp/datagen.hpp"
#include "fagp/errors.hpp"
#include "fagp/harness.hpp"
#include "fagp/posterior.hpp"

namespace fs = std::filesystem;
using namespace fagp;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kVerifyFailed = 2, kIo = 3, kNumerical = 4 };

Interval parse_domain(const std::string& text) {
  const auto bounds = parse_double_list(text);
  if (bounds.size() != 2) throw UsageError("--domain expects 'lo,hi'");
  Interval iv{bounds[0], bounds[1]};
  iv.validate();
  return iv;
}

std::vector<ExecMode> parse_backends(const std::string& text) {
  std::vector<ExecMode> modes;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    modes.push_back(parse_exec_mode(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return modes;
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
  std::int64_t samples = 10000;
  std::vector<int> dims{1};
  std::vector<std::uint64_t> seeds{1};
  double noise_std = kDefaultNoiseStd;
  std::string domain = "-1,1";
  std::string out_dir = ".";
};

int cmd_generate(const GenerateArgs& args) {
  if (args.samples < 1) throw UsageError("--n-samples must be >= 1");
  for (int p : args.dims) {
    if (p < 1) throw UsageError("--dim must be >= 1");
  }
  const Interval domain = parse_domain(args.domain);
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (!fs::is_directory(args.out_dir)) throw IoError("cannot create output directory '" + args.out_dir + "'");

  for (int p : args.dims) {
    for (std::uint64_t seed : args.seeds) {
      const Dataset ds = generate(args.samples, p, seed, args.noise_std, domain);
      const fs::path path = fs::path(args.out_dir) / dataset_file_name(args.samples, p, seed);
      save_csv(ds, path);
      std::cout << path.string() << " N=" << args.samples << " p=" << p << " seed=" << seed << '\n';
    }
  }
  return kOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::string out = "bench_results.csv";
  std::int64_t samples = 0;
  std::int64_t test_samples = 0;
  std::string dims;
  std::string eigen_counts;
  int reps = 0;
  std::string backends;
  int workers = -1;
  std::string epsilon;
  std::string rho;
  double noise_var = 0.0;
  double noise_std = -1.0;
  std::uint64_t seed_base = 0;
  std::string memory_cap;
  bool reordered_reduction = false;
  bool quiet = false;
};

int cmd_bench(const BenchArgs& args, const CLI::App& sub) {
  BenchConfig config;
  if (!args.config.empty()) config = load_config(args.config);
  if (sub.count("--n-samples")) config.samples = args.samples;
  if (sub.count("--n-test")) config.test_samples = args.test_samples;
  if (sub.count("--dims")) config.dims = parse_int_list(args.dims);
  if (sub.count("--eigen-counts")) config.eigen_counts = parse_eigen_counts(args.eigen_counts);
  if (sub.count("--reps")) config.reps = args.reps;
  if (sub.count("--backends")) config.backends = parse_backends(args.backends);
  if (sub.count("--workers")) config.workers = args.workers;
  if (sub.count("--epsilon")) config.epsilon = parse_double_list(args.epsilon);
  if (sub.count("--rho")) config.rho = parse_double_list(args.rho);
  if (sub.count("--noise-var")) config.noise_var = args.noise_var;
  if (sub.count("--noise-std")) config.noise_std = args.noise_std;
  if (sub.count("--seed-base")) config.seed_base = args.seed_base;
  if (sub.count("--memory-cap")) config.memory_cap = parse_bytes(args.memory_cap);
  if (args.reordered_reduction) config.deterministic_reduction = false;
  config.validate();

  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw IoError("cannot open '" + args.out + "' for writing");
  run_bench(config, out, args.quiet ? nullptr : &std::cerr);
  out.flush();
  if (!out) throw IoError("failed writing '" + args.out + "'");
  return kOk;
}

// --- verify ----------------------------------------------------------------

int cmd_verify(const std::string& level, int workers, const std::string& fault) {
  VerifyOptions options;
  if (level == "fast") {
    options.level = VerifyLevel::fast;
  } else if (level == "full") {
    options.level = VerifyLevel::full;
  } else {
    throw UsageError("--level must be fast or full");
  }
  if (fault == "none") {
    options.fault = FaultInjection::none;
  } else if (fault == "sign") {
    options.fault = FaultInjection::flip_correction_sign;
  } else {
    throw UsageError("--inject-fault must be none or sign");
  }
  options.workers = workers;

  const auto results = run_verification(options);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(20) << r.name << std::right
              << std::fixed << std::setprecision(2) << std::setw(7) << r.seconds << " s  " << r.detail << '\n';
    all = all && r.passed;
  }
  if (!all) {
    for (const auto& r : results) {
      if (!r.passed) std::cerr << "verification failed: " << r.name << '\n';
    }
    return kVerifyFailed;
  }
  return kOk;
}

// --- predict ---------------------------------------------------------------

struct PredictArgs {
  std::string train;
  std::string test;
  std::string out = "predictions.csv";
  int n_eigen = 10;
  std::string epsilon = "1";
  std::string rho = "1";
  double noise_var = kDefaultNoiseStd * kDefaultNoiseStd;
  double prior_mean = 0.0;
  bool exact = false;
  bool cov = false;
  std::string backend = "serial";
  int workers = 0;
  std::string form = "scaled";
  std::string memory_cap = "8GiB";
};

int cmd_predict(const PredictArgs& args) {
  const Dataset train = load_csv(args.train);
  const Matrix x_star = load_points_csv(args.test);
  const int p = static_cast<int>(train.dims());

  BenchConfig kernel_source;
  kernel_source.epsilon = parse_double_list(args.epsilon);
  kernel_source.rho = parse_double_list(args.rho);
  GpModel model;
  model.kernel = kernel_source.kernel_for(p);
  model.noise_var = args.noise_var;
  model.prior_mean.value = args.prior_mean;
  model.n_eigen = args.n_eigen;

  PosteriorResult result;
  if (args.exact) {
    result = exact_posterior(train, x_star, model, args.cov);
  } else {
    const SizeBudget budget{parse_bytes(args.memory_cap)};
    const ExecMode mode = parse_exec_mode(args.backend);
    const Backend backend =
        (mode == ExecMode::serial ? Backend::serial() : Backend::parallel(args.workers)).with_budget(budget);
    FagpOptions options;
    options.want_cov = args.cov;
    options.mercer.budget = budget;
    if (args.form == "scaled") {
      options.form = FagpForm::scaled_features;
    } else if (args.form == "woodbury") {
      options.form = FagpForm::woodbury;
    } else {
      throw UsageError("--form must be scaled or woodbury");
    }
    result = fagp_posterior(train, x_star, model, backend, options);
  }

  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw IoError("cannot open '" + args.out + "' for writing");
  for (int d = 0; d < p; ++d) out << 'x' << (d + 1) << ',';
  out << "mean" << (args.cov ? ",var" : "") << '\n';
  for (Eigen::Index i = 0; i < x_star.rows(); ++i) {
    for (int d = 0; d < p; ++d) out << format_double(x_star(i, d)) << ',';
    out << format_double(result.mean[i]);
    if (args.cov) out << ',' << format_double((*result.cov)(i, i));
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing '" + args.out + "'");
  return kOk;
}

// --- plotdata --------------------------------------------------------------

int cmd_plotdata(const std::string& input, const std::string& out_dir) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw IoError("cannot open '" + input + "'");
  const auto rows = read_bench_csv(in);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (const auto& [p, plot_rows] : aggregate(rows)) {
    const fs::path path = fs::path(out_dir) / plot_file_name(p);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_plot_csv(out, plot_rows);
    std::cout << path.string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank Mercer Gaussian-process regression: data generation, benchmarks, verification"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Write synthetic training datasets");
  generate_cmd->add_option("--n-samples", gen.samples, "Samples per dataset")->capture_default_str();
  generate_cmd->add_option("--dim", gen.dims, "Input dimension(s)")->delimiter(',')->capture_default_str();
  generate_cmd->add_option("--seed", gen.seeds, "Seed(s)")->delimiter(',')->capture_default_str();
  generate_cmd->add_option("--noise-std", gen.noise_std, "Observation noise std")->capture_default_str();
  generate_cmd->add_option("--domain", gen.domain, "Sampling interval per dimension, 'lo,hi'")->capture_default_str();
  generate_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the timing sweep and write a results CSV");
  bench_cmd->add_option("--config", bench.config, "key = value configuration file");
  bench_cmd->add_option("--out", bench.out, "Results CSV")->capture_default_str();
  bench_cmd->add_option("--n-samples", bench.samples, "Training samples N");
  bench_cmd->add_option("--n-test", bench.test_samples, "Test samples N*");
  bench_cmd->add_option("--dims", bench.dims, "Comma-separated p values");
  bench_cmd->add_option("--eigen-counts", bench.eigen_counts, "Per-p eigenvalue counts, e.g. '1:8,16;2:3,4'");
  bench_cmd->add_option("--reps", bench.reps, "Monte Carlo repetitions");
  bench_cmd->add_option("--backends", bench.backends, "serial,parallel");
  bench_cmd->add_option("--workers", bench.workers, "Parallel workers (0 = all)");
  bench_cmd->add_option("--epsilon", bench.epsilon, "Inverse length scale(s)");
  bench_cmd->add_option("--rho", bench.rho, "Global scale factor(s)");
  bench_cmd->add_option("--noise-var", bench.noise_var, "Model noise variance");
  bench_cmd->add_option("--noise-std", bench.noise_std, "Data noise std");
  bench_cmd->add_option("--seed-base", bench.seed_base, "Seed of repetition 0");
  bench_cmd->add_option("--memory-cap", bench.memory_cap, "Memory cap, bytes or with KiB/MiB/GiB suffix");
  bench_cmd->add_flag("--reordered-reduction", bench.reordered_reduction,
                      "Allow parallel kernels to split reductions (not bitwise reproducible)");
  bench_cmd->add_flag("--quiet", bench.quiet, "No progress on stderr");

  std::string verify_level = "fast";
  int verify_workers = 8;
  std::string verify_fault = "none";
  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle and invariant checks");
  verify_cmd->add_option("--level", verify_level, "fast or full")->capture_default_str();
  verify_cmd->add_option("--workers", verify_workers, "Workers for the backend comparison")->capture_default_str();
  verify_cmd->add_option("--inject-fault", verify_fault, "Test hook: none or sign")->group("");

  PredictArgs pred;
  auto* predict_cmd = app.add_subcommand("predict", "Fit on a training CSV and predict on a test CSV");
  predict_cmd->add_option("--train", pred.train, "Training CSV (x1..xp,y)")->required();
  predict_cmd->add_option("--test", pred.test, "Test CSV (x1..xp)")->required();
  predict_cmd->add_option("--out", pred.out, "Output CSV")->capture_default_str();
  predict_cmd->add_option("--n-eigen", pred.n_eigen, "Eigenvalues per dimension")->capture_default_str();
  predict_cmd->add_option("--epsilon", pred.epsilon, "Inverse length scale(s)")->capture_default_str();
  predict_cmd->add_option("--rho", pred.rho, "Global scale factor(s)")->capture_default_str();
  predict_cmd->add_option("--noise-var", pred.noise_var, "Noise variance")->capture_default_str();
  predict_cmd->add_option("--prior-mean", pred.prior_mean, "Constant prior mean")->capture_default_str();
  predict_cmd->add_flag("--exact", pred.exact, "Use the exact GP instead of the low-rank posterior");
  predict_cmd->add_flag("--cov", pred.cov, "Also write the predictive variance");
  predict_cmd->add_option("--backend", pred.backend, "serial or parallel")->capture_default_str();
  predict_cmd->add_option("--workers", pred.workers, "Parallel workers (0 = all)")->capture_default_str();
  predict_cmd->add_option("--form", pred.form, "scaled or woodbury")->capture_default_str();
  predict_cmd->add_option("--memory-cap", pred.memory_cap, "Memory cap")->capture_default_str();

  std::string plot_input = "bench_results.csv";
  std::string plot_dir = ".";
  auto* plot_cmd = app.add_subcommand("plotdata", "Aggregate a results CSV into one plot CSV per p");
  plot_cmd->add_option("input", plot_input, "Results CSV")->capture_default_str();
  plot_cmd->add_option("--out-dir", plot_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen);
    if (*bench_cmd) return cmd_bench(bench, *bench_cmd);
    if (*verify_cmd) return cmd_verify(verify_level, verify_workers, verify_fault);
    if (*predict_cmd) return cmd_predict(pred);
    if (*plot_cmd) return cmd_plotdata(plot_input, plot_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
