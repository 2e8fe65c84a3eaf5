#include "fagp/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <tuple>

#include <Eigen/LU>

#include "fagp/errors.hpp"

namespace fagp {

namespace {

using Index = Eigen::Index;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
T parse_scalar(std::string_view text, const char* what) {
  text = trim(text);
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last) {
    throw UsageError(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw UsageError("invalid boolean '" + std::string(text) + "'");
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::string fmt_sci(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 3);
  return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::vector<int> default_eigen_counts(int p) {
  switch (p) {
    case 1: return {8, 16, 32, 64, 128};
    case 2: return {3, 4, 5, 6, 7, 8, 9, 10, 11};
    case 3: return {2, 3, 4, 5, 6, 7, 8};
    case 4: return {2, 3, 4, 5, 6, 7};
    default: return {2, 3, 4};
  }
}

std::vector<int> BenchConfig::counts_for(int p) const {
  if (auto it = eigen_counts.find(p); it != eigen_counts.end()) return it->second;
  return default_eigen_counts(p);
}

ArdKernelParams BenchConfig::kernel_for(int p) const {
  const auto pick = [p](const std::vector<double>& values, const char* what) {
    if (values.size() == 1) return std::vector<double>(static_cast<std::size_t>(p), values[0]);
    if (values.size() < static_cast<std::size_t>(p)) {
      throw UsageError(std::string(what) + " lists " + std::to_string(values.size()) + " values but p = " +
                       std::to_string(p));
    }
    return std::vector<double>(values.begin(), values.begin() + p);
  };
  const auto eps = pick(epsilon, "epsilon");
  const auto rh = pick(rho, "rho");
  ArdKernelParams params;
  for (int d = 0; d < p; ++d) params.per_dim.push_back({eps[static_cast<std::size_t>(d)], rh[static_cast<std::size_t>(d)]});
  params.validate();
  return params;
}

Backend BenchConfig::make_backend(ExecMode mode) const {
  Backend b = mode == ExecMode::serial ? Backend::serial() : Backend::parallel(workers, deterministic_reduction);
  return b.with_budget(SizeBudget{memory_cap});
}

void BenchConfig::validate() const {
  if (samples < 1) throw UsageError("N must be >= 1");
  if (test_samples < 1) throw UsageError("Nstar must be >= 1");
  if (dims.empty()) throw UsageError("dims must not be empty");
  if (reps < 1) throw UsageError("reps must be >= 1");
  if (backends.empty()) throw UsageError("backends must not be empty");
  if (workers < 0) throw UsageError("workers must be >= 0");
  if (!std::isfinite(noise_var) || noise_var <= 0.0) throw UsageError("noise_var must be > 0");
  if (!std::isfinite(noise_std) || noise_std < 0.0) throw UsageError("noise_std must be >= 0");
  if (memory_cap == 0) throw UsageError("memory_cap must be > 0");
  domain.validate();
  for (int p : dims) {
    if (p < 1) throw UsageError("every p in dims must be >= 1");
    const auto counts = counts_for(p);
    if (counts.empty()) throw UsageError("no eigen_counts for p = " + std::to_string(p));
    for (int n : counts) {
      if (n < 1) throw UsageError("eigen_counts must be >= 1");
    }
    (void)kernel_for(p);
  }
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> values;
  for (auto part : split(text, ',')) values.push_back(parse_scalar<int>(part, "integer"));
  return values;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> values;
  for (auto part : split(text, ',')) values.push_back(parse_scalar<double>(part, "number"));
  return values;
}

std::map<int, std::vector<int>> parse_eigen_counts(std::string_view text) {
  std::map<int, std::vector<int>> counts;
  for (auto group : split(text, ';')) {
    if (group.empty()) continue;
    const auto colon = group.find(':');
    if (colon == std::string_view::npos) {
      throw UsageError("eigen_counts entry '" + std::string(group) + "' must look like p:n1,n2,...");
    }
    const int p = parse_scalar<int>(group.substr(0, colon), "dimension");
    counts[p] = parse_int_list(group.substr(colon + 1));
  }
  return counts;
}

std::uint64_t parse_bytes(std::string_view text) {
  text = trim(text);
  std::uint64_t scale = 1;
  for (auto [suffix, factor] : {std::pair<std::string_view, std::uint64_t>{"GiB", kGiB}, {"MiB", kMiB}, {"KiB", 1024}}) {
    if (text.ends_with(suffix)) {
      scale = factor;
      text.remove_suffix(suffix.size());
      break;
    }
  }
  return parse_scalar<std::uint64_t>(text, "byte count") * scale;
}

BenchConfig parse_config(std::istream& in, BenchConfig base) {
  using Setter = std::function<void(BenchConfig&, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"N", [](BenchConfig& c, std::string_view v) { c.samples = parse_scalar<std::int64_t>(v, "N"); }},
      {"Nstar", [](BenchConfig& c, std::string_view v) { c.test_samples = parse_scalar<std::int64_t>(v, "Nstar"); }},
      {"dims", [](BenchConfig& c, std::string_view v) { c.dims = parse_int_list(v); }},
      {"eigen_counts", [](BenchConfig& c, std::string_view v) { c.eigen_counts = parse_eigen_counts(v); }},
      {"reps", [](BenchConfig& c, std::string_view v) { c.reps = parse_scalar<int>(v, "reps"); }},
      {"backends",
       [](BenchConfig& c, std::string_view v) {
         c.backends.clear();
         for (auto part : split(v, ',')) c.backends.push_back(parse_exec_mode(part));
       }},
      {"workers", [](BenchConfig& c, std::string_view v) { c.workers = parse_scalar<int>(v, "workers"); }},
      {"deterministic_reduction", [](BenchConfig& c, std::string_view v) { c.deterministic_reduction = parse_bool(v); }},
      {"epsilon", [](BenchConfig& c, std::string_view v) { c.epsilon = parse_double_list(v); }},
      {"rho", [](BenchConfig& c, std::string_view v) { c.rho = parse_double_list(v); }},
      {"noise_var", [](BenchConfig& c, std::string_view v) { c.noise_var = parse_scalar<double>(v, "noise_var"); }},
      {"noise_std", [](BenchConfig& c, std::string_view v) { c.noise_std = parse_scalar<double>(v, "noise_std"); }},
      {"seed_base", [](BenchConfig& c, std::string_view v) { c.seed_base = parse_scalar<std::uint64_t>(v, "seed_base"); }},
      {"memory_cap", [](BenchConfig& c, std::string_view v) { c.memory_cap = parse_bytes(v); }},
      {"domain",
       [](BenchConfig& c, std::string_view v) {
         const auto bounds = parse_double_list(v);
         if (bounds.size() != 2) throw UsageError("domain must be 'lo, hi'");
         c.domain = Interval{bounds[0], bounds[1]};
       }},
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string_view key = trim(view.substr(0, eq));
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    it->second(base, trim(view.substr(eq + 1)));
  }
  return base;
}

BenchConfig load_config(const std::filesystem::path& path, BenchConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_config(in, std::move(base));
}

// ---------------------------------------------------------------------------
// Benchmark

TimingRecord run_repetition(const BenchConfig& config, const Backend& backend, int p, int n, int rep) {
  const SizeBudget budget{config.memory_cap};
  budget.require(static_cast<std::uint64_t>(config.samples + config.test_samples), static_cast<std::uint64_t>(n),
                 static_cast<std::uint64_t>(p));

  GpModel model;
  model.kernel = config.kernel_for(p);
  model.noise_var = config.noise_var;
  model.n_eigen = n;

  const std::uint64_t seed = config.seed_base + static_cast<std::uint64_t>(rep);
  const std::vector<Interval> domain(static_cast<std::size_t>(p), config.domain);
  const Dataset source = generate(config.samples, p, seed, config.noise_std, domain);
  const Matrix test_source = uniform_points(config.test_samples, domain, seed, Stream::test_inputs);

  TimingRecord record;
  record.backend_mode = std::string(to_string(backend.mode()));
  record.samples = static_cast<std::uint64_t>(config.samples);
  record.dims = p;
  record.n_eigen = n;
  record.rep_id = rep;

  const MercerOptions mercer{Delta2Convention::fasshauer, budget};
  Matrix x, x_star;
  Vector y;
  {
    PhaseScope scope(record, Phase::setup);
    x = source.x;
    y = source.y;
    x_star = test_source;
  }
  EigenSystem train_es, test_es;
  {
    PhaseScope scope(record, Phase::eigen);
    train_es = eigensystem(x, model.kernel, n, backend, mercer);
    test_es = eigensystem(x_star, model.kernel, n, backend, mercer);
  }
  PosteriorResult posterior;
  {
    PhaseScope scope(record, Phase::mean);
    posterior = fagp_from_eigensystems(train_es, test_es, y, model, backend, FagpOptions{});
  }
  std::vector<double> host_mean;
  {
    PhaseScope scope(record, Phase::retrieve);
    host_mean.assign(posterior.mean.data(), posterior.mean.data() + posterior.mean.size());
  }
  if (!std::all_of(host_mean.begin(), host_mean.end(), [](double v) { return std::isfinite(v); })) {
    throw NumericalError("benchmark produced a non-finite posterior mean");
  }
  return record;
}

void write_bench_row(std::ostream& out, const BenchRow& row) {
  out << row.backend << ',' << row.p << ',' << row.n << ',' << row.rep << ',' << row.phase << ','
      << format_double(row.seconds) << '\n';
}

std::vector<BenchRow> run_bench(const BenchConfig& config, std::ostream& csv, std::ostream* log) {
  config.validate();
  std::vector<BenchRow> rows;
  csv << kBenchHeader << '\n';
  const auto emit = [&](BenchRow row) {
    write_bench_row(csv, row);
    rows.push_back(std::move(row));
  };

  for (ExecMode mode : config.backends) {
    const Backend backend = config.make_backend(mode);
    const std::string name(to_string(mode));
    for (int p : config.dims) {
      for (int n : config.counts_for(p)) {
        if (!SizeBudget{config.memory_cap}.admits(
                static_cast<std::uint64_t>(config.samples + config.test_samples), static_cast<std::uint64_t>(n),
                static_cast<std::uint64_t>(p))) {
          if (log) *log << "skip " << name << " p=" << p << " n=" << n << ": over memory cap\n";
          emit({name, p, n, 0, std::string(kSkippedPhase), -1.0});
          continue;
        }
        for (int rep = 0; rep < config.reps; ++rep) {
          const TimingRecord record = run_repetition(config, backend, p, n, rep);
          for (Phase phase : kAllPhases) {
            emit({name, p, n, rep, std::string(to_string(phase)), record.seconds(phase)});
          }
          if (log) {
            *log << name << " p=" << p << " n=" << n << " rep=" << rep << " total=" << fmt_sci(record.total())
                 << " s\n";
          }
        }
        csv.flush();
      }
    }
  }
  return rows;
}

std::vector<BenchRow> read_bench_csv(std::istream& in) {
  std::vector<BenchRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!header) {
      if (view != kBenchHeader) throw ParseError("expected header '" + std::string(kBenchHeader) + "'", line_no);
      header = true;
      continue;
    }
    const auto fields = split(view, ',');
    if (fields.size() != 6) throw ParseError("expected 6 fields, found " + std::to_string(fields.size()), line_no);
    BenchRow row;
    try {
      row.backend = std::string(fields[0]);
      row.p = parse_scalar<int>(fields[1], "p");
      row.n = parse_scalar<int>(fields[2], "n");
      row.rep = parse_scalar<int>(fields[3], "rep");
      row.phase = std::string(fields[4]);
      row.seconds = parse_scalar<double>(fields[5], "seconds");
    } catch (const UsageError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (row.phase != kSkippedPhase && !parse_phase(row.phase)) {
      throw ParseError("unknown phase '" + row.phase + "'", line_no);
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ParseError("empty results file", 0);
  return rows;
}

std::map<int, std::vector<PlotRow>> aggregate(const std::vector<BenchRow>& rows) {
  // (p, backend, n) -> rep -> per-phase seconds
  std::map<std::tuple<int, std::string, int>, std::map<int, TimingRecord>> groups;
  for (const auto& row : rows) {
    if (row.phase == kSkippedPhase) continue;
    const auto phase = parse_phase(row.phase);
    if (!phase) throw UsageError("unknown phase '" + row.phase + "'");
    groups[{row.p, row.backend, row.n}][row.rep].seconds(*phase) += row.seconds;
  }

  std::map<int, std::vector<PlotRow>> out;
  for (const auto& [key, reps] : groups) {
    const auto& [p, backend, n] = key;
    PlotRow pr;
    pr.backend = backend;
    pr.n = n;
    pr.reps = static_cast<int>(reps.size());
    std::vector<double> totals;
    for (const auto& [rep, rec] : reps) {
      totals.push_back(rec.total());
      pr.mean_setup += rec.setup_s;
      pr.mean_eigen += rec.eigen_s;
      pr.mean_mean += rec.mean_s;
      pr.mean_retrieve += rec.retrieve_s;
    }
    const double count = static_cast<double>(reps.size());
    for (double t : totals) pr.mean_total += t;
    pr.mean_total /= count;
    pr.std_total = sample_std(totals, pr.mean_total);
    pr.mean_setup /= count;
    pr.mean_eigen /= count;
    pr.mean_mean /= count;
    pr.mean_retrieve /= count;
    out[p].push_back(std::move(pr));
  }
  return out;
}

void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows) {
  out << kPlotHeader << '\n';
  for (const auto& r : rows) {
    out << r.backend << ',' << r.n << ',' << format_double(r.mean_total) << ',' << format_double(r.std_total) << ','
        << format_double(r.mean_eigen) << ',' << format_double(r.mean_mean) << ',' << format_double(r.mean_setup)
        << ',' << format_double(r.mean_retrieve) << ',' << r.reps << '\n';
  }
}

std::string plot_file_name(int p) { return "plot_p" + std::to_string(p) + ".csv"; }

// ---------------------------------------------------------------------------
// Verification

namespace {

CheckResult timed_check(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult result{name, false, "", 0.0};
  try {
    auto [ok, detail] = body();
    result.passed = ok;
    result.detail = std::move(detail);
  } catch (const std::exception& e) {
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

std::string join_sci(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_sci(v[i]);
  return s;
}

std::pair<bool, std::string> check_oracle(const VerifyOptions& opt) {
  const std::vector<Interval> domain{Interval{-1.0, 1.0}};
  const Dataset train = generate(200, 1, 2024, kDefaultNoiseStd, domain);
  const Matrix x_star = uniform_points(100, domain, 2024);
  GpModel model{ArdKernelParams::isotropic(1, 1.0, 1.0), 1e-2, {}, 5};
  const bool with_cov = opt.level == VerifyLevel::full;
  const PosteriorResult exact = exact_posterior(train, x_star, model, with_cov);

  FagpOptions fo;
  fo.fault = opt.fault;
  fo.want_cov = with_cov;
  std::vector<double> errors;
  double cov_error = 0.0;
  const Backend backend = Backend::serial();
  for (int n : {5, 10, 15, 20, 25}) {
    model.n_eigen = n;
    const PosteriorResult approx = fagp_posterior(train, x_star, model, backend, fo);
    errors.push_back(max_abs(approx.mean - exact.mean));
    if (with_cov) cov_error = (*approx.cov - *exact.cov).cwiseAbs().maxCoeff();
  }
  const double bound = 1e-3 * max_abs(train.y);
  bool ok = non_increasing(errors) && errors.back() < bound;
  std::string detail = "max|mean err| over n=5..25: " + join_sci(errors) + " (bound " + fmt_sci(bound) + ")";
  if (with_cov) {
    ok = ok && cov_error < 1e-3;
    detail += ", max|cov err| at n=25: " + fmt_sci(cov_error);
  }
  return {ok, detail};
}

std::pair<bool, std::string> check_woodbury() {
  const Backend backend = Backend::serial();
  const CounterRng rng(77, 9);
  std::uint64_t counter = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const Index rows = 5 + (instance * 7) % 36;
    const Index features = 1 + instance % 10;
    EigenSystem es;
    es.phi.resize(rows, features);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < features; ++j) es.phi(i, j) = rng.normal(counter++);
    }
    es.lambda.resize(features);
    for (Index j = 0; j < features; ++j) es.lambda[j] = 0.1 + 0.9 * rng.uniform(counter++);
    es.lambda_exact = es.lambda;
    const double s2 = 0.1 + 0.9 * rng.uniform(counter++);

    Eigen::MatrixXd approx_kernel = es.phi * es.lambda.asDiagonal() * es.phi.transpose();
    approx_kernel.diagonal().array() += s2;
    const Eigen::MatrixXd direct = approx_kernel.inverse();

    const LambdaBar lb = LambdaBar::build(es, s2, backend, FagpForm::woodbury);
    const Matrix inner = lb.solve(Matrix(es.phi.transpose()));
    Matrix woodbury = -gemm(backend, es.phi, Op::none, inner, Op::none) / s2;
    woodbury.diagonal().array() += 1.0;
    woodbury /= s2;
    const double rel = (Matrix(direct) - woodbury).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff();
    worst = std::max(worst, rel);
  }
  return {worst < 1e-8, "worst relative error over 20 instances: " + fmt_sci(worst)};
}

std::pair<bool, std::string> check_reconstruction() {
  const Backend backend = Backend::serial();
  Matrix grid(21, 1);
  for (Index k = 0; k < 21; ++k) grid(k, 0) = -1.0 + 0.1 * static_cast<double>(k);
  const auto params = ArdKernelParams::isotropic(1, 1.0, 1.0);
  const Matrix exact = gram_matrix(grid, grid, params);
  std::vector<double> errors;
  for (int n : {2, 5, 10, 20, 30}) {
    const EigenSystem es = eigensystem(grid, params, n, backend);
    errors.push_back((reconstruct_kernel(es, es, backend) - exact).cwiseAbs().maxCoeff());
  }
  const bool ok = non_increasing(errors) && errors.back() < 1e-6;
  return {ok, "max|K - Phi Lambda Phi^T| over n=2..30: " + join_sci(errors)};
}

std::pair<bool, std::string> check_orthonormality() {
  const KernelParams1D params{1.0, 1.0};
  const int terms = 10;
  const int nodes = 200;
  const double half = 8.0 / params.rho;
  const double h = 2.0 * half / (nodes - 1);
  const ShapeParams shape = shape_params(params, terms);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(terms, terms);
  std::vector<double> phi(terms);
  for (int k = 0; k < nodes; ++k) {
    const double x = -half + h * k;
    const double trapezoid = (k == 0 || k == nodes - 1) ? 0.5 * h : h;
    const double weight = params.rho / std::sqrt(std::numbers::pi) * std::exp(-params.rho * params.rho * x * x);
    eigenfunctions_1d(x, params, shape, phi);
    for (int i = 0; i < terms; ++i) {
      for (int j = 0; j < terms; ++j) gram(i, j) += trapezoid * weight * phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)];
    }
  }
  const double err = (gram - Eigen::MatrixXd::Identity(terms, terms)).cwiseAbs().maxCoeff();
  return {err < 1e-6, "max|<phi_i, phi_j>_w - delta_ij|, i,j <= 10: " + fmt_sci(err)};
}

std::pair<bool, std::string> check_backends(const VerifyOptions& opt) {
  const std::int64_t samples = opt.level == VerifyLevel::full ? 5000 : 1000;
  const std::vector<Interval> domain(2, Interval{-1.0, 1.0});
  const Dataset train = generate(samples, 2, 99, kDefaultNoiseStd, domain);
  const Matrix x_star = uniform_points(200, domain, 99);
  const GpModel model{ArdKernelParams::isotropic(2, 1.0, 1.0), kDefaultNoiseStd * kDefaultNoiseStd, {}, 8};

  const Vector serial = fagp_posterior(train, x_star, model, Backend::serial()).mean;
  const Vector det = fagp_posterior(train, x_star, model, Backend::parallel(opt.workers, true)).mean;
  const Vector loose = fagp_posterior(train, x_star, model, Backend::parallel(opt.workers, false)).mean;
  const bool bitwise = serial == det;
  const double rel = max_abs(serial - loose) / max_abs(serial);
  return {bitwise && rel < 1e-10, std::string("deterministic parallel ") + (bitwise ? "bitwise equal" : "DIFFERS") +
                                      ", reordered-reduction max relative diff " + fmt_sci(rel)};
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  results.push_back(timed_check("oracle-equivalence", [&] { return check_oracle(options); }));
  results.push_back(timed_check("woodbury", [] { return check_woodbury(); }));
  results.push_back(timed_check("reconstruction", [] { return check_reconstruction(); }));
  results.push_back(timed_check("orthonormality", [] { return check_orthonormality(); }));
  results.push_back(timed_check("backend-equivalence", [&] { return check_backends(options); }));
  return results;
}

}  // namespace fagp
