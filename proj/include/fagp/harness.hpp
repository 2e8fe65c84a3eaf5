#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fagp/backend.hpp"
#include "fagp/datagen.hpp"
#include "fagp/mercer.hpp"
#include "fagp/posterior.hpp"

namespace fagp {

// Benchmark sweep over (backend, p, n, rep).
struct BenchConfig {
  std::int64_t samples = 10000;       // N
  std::int64_t test_samples = 1000;   // N*
  std::vector<int> dims{1, 2, 4};
  std::map<int, std::vector<int>> eigen_counts;  // per p; defaults fill gaps
  int reps = 10;
  std::vector<ExecMode> backends{ExecMode::serial, ExecMode::parallel};
  int workers = 0;  // 0 = every available hardware thread
  bool deterministic_reduction = true;
  std::vector<double> epsilon{1.0};  // one value, or one per dimension
  std::vector<double> rho{1.0};
  double noise_var = kDefaultNoiseStd * kDefaultNoiseStd;
  double noise_std = kDefaultNoiseStd;
  std::uint64_t seed_base = 1;
  std::uint64_t memory_cap = 8 * kGiB;
  Interval domain{};

  // Eigenvalue counts used for p (explicit entry or the built-in default).
  std::vector<int> counts_for(int p) const;
  ArdKernelParams kernel_for(int p) const;
  Backend make_backend(ExecMode mode) const;
  void validate() const;
};

std::vector<int> default_eigen_counts(int p);

// Applies "key = value" lines on top of `base`. '#' starts a comment.
// Unknown keys are a UsageError; malformed lines a ParseError.
BenchConfig parse_config(std::istream& in, BenchConfig base = {});
BenchConfig load_config(const std::filesystem::path& path, BenchConfig base = {});

// Parsers shared by the config file and the command line.
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);
std::map<int, std::vector<int>> parse_eigen_counts(std::string_view text);
std::uint64_t parse_bytes(std::string_view text);

inline constexpr std::string_view kBenchHeader = "backend,p,n,rep,phase,seconds";
inline constexpr std::string_view kSkippedPhase = "skipped";

struct BenchRow {
  std::string backend;
  int p = 0;
  int n = 0;
  int rep = 0;
  std::string phase;
  double seconds = 0.0;
};

// One timed repetition: staging, eigensystems, posterior mean, copy-out.
// Throws ResourceError when (n, p) does not fit config.memory_cap.
TimingRecord run_repetition(const BenchConfig& config, const Backend& backend, int p, int n, int rep);

// Full sweep. Rows are written to `csv` (header first) as they complete, in
// (backend, p, n, rep, phase) order. Configurations over the memory cap
// produce one `skipped` row with seconds = -1. Progress goes to `log` if set.
std::vector<BenchRow> run_bench(const BenchConfig& config, std::ostream& csv, std::ostream* log = nullptr);

void write_bench_row(std::ostream& out, const BenchRow& row);
std::vector<BenchRow> read_bench_csv(std::istream& in);

inline constexpr std::string_view kPlotHeader =
    "backend,n,mean_total_s,std_total_s,mean_eigen_s,mean_mean_s,mean_setup_s,mean_retrieve_s,reps";

struct PlotRow {
  std::string backend;
  int n = 0;
  double mean_total = 0.0;
  double std_total = 0.0;
  double mean_eigen = 0.0;
  double mean_mean = 0.0;
  double mean_setup = 0.0;
  double mean_retrieve = 0.0;
  int reps = 0;
};

// Per-p aggregation over repetitions: arithmetic mean and sample standard
// deviation (0 for a single repetition). Skipped rows are ignored.
std::map<int, std::vector<PlotRow>> aggregate(const std::vector<BenchRow>& rows);
void write_plot_csv(std::ostream& out, const std::vector<PlotRow>& rows);
std::string plot_file_name(int p);

// ---------------------------------------------------------------------------
// Verification

enum class VerifyLevel { fast, full };

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::fast;
  FaultInjection fault = FaultInjection::none;
  int workers = 8;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Oracle equivalence, Woodbury identity, Mercer reconstruction,
// eigenfunction orthonormality and backend equivalence.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

}  // namespace fagp
