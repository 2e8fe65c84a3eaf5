#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fagp/budget.hpp"
#include "fagp/matrix.hpp"

namespace fagp {

enum class ExecMode { serial, parallel };

std::string_view to_string(ExecMode mode) noexcept;
ExecMode parse_exec_mode(std::string_view text);

// Environment variable capping the worker count of parallel backends.
inline constexpr const char* kMaxWorkersEnv = "FAGP_MAX_WORKERS";

// Execution policy for the dense kernels. Immutable after construction and
// safe to share between threads.
//
// Every output element is computed by exactly one worker with a fixed
// summation order, so with deterministic_reduction the parallel results are
// bitwise identical to serial ones for any worker count. Without it, kernels
// whose output is too small to feed all workers may split the inner
// dimension and sum per-worker partials.
class Backend {
 public:
  static Backend serial();
  // workers == 0 picks every hardware thread OpenMP reports. The result is
  // then capped by FAGP_MAX_WORKERS when that is set.
  static Backend parallel(int workers = 0, bool deterministic_reduction = true);

  ExecMode mode() const noexcept { return mode_; }
  int workers() const noexcept { return workers_; }
  bool deterministic_reduction() const noexcept { return deterministic_; }
  const SizeBudget& budget() const noexcept { return budget_; }

  Backend with_budget(SizeBudget budget) const;
  std::string describe() const;

 private:
  Backend(ExecMode mode, int workers, bool deterministic);

  ExecMode mode_;
  int workers_;
  bool deterministic_;
  SizeBudget budget_;
};

enum class Op { none, transpose };

// C = op(A) * op(B).
Matrix gemm(const Backend& backend, const Matrix& a, Op op_a, const Matrix& b, Op op_b);
inline Matrix gemm(const Backend& backend, const Matrix& a, const Matrix& b) {
  return gemm(backend, a, Op::none, b, Op::none);
}

// A^T A, computed on the lower triangle and mirrored so the result is
// exactly symmetric.
Matrix crossprod(const Backend& backend, const Matrix& a);

// y = op(A) * x.
Vector gemv(const Backend& backend, const Matrix& a, Op op_a, const Vector& x);

// Triple-loop product kept as the reference the blocked kernels are tested
// against. Accumulates in ascending inner index from zero.
Matrix gemm_reference(const Matrix& a, Op op_a, const Matrix& b, Op op_b);

// Lower Cholesky factor of a symmetric positive definite matrix with
// escalating diagonal jitter. Reusable for any number of solves.
class SpdFactor {
 public:
  // Tries the plain factorization, then jitter 1e-12 * trace / n growing
  // x10 per retry for kJitterRetries retries. Throws NumericalError with the
  // failing pivot when every attempt fails.
  static SpdFactor factor(const Backend& backend, const Matrix& m);

  static constexpr int kJitterRetries = 3;
  static constexpr double kJitterScale = 1e-12;

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  // L^{-1} B, used for covariances of the form B^T M^{-1} B.
  Matrix solve_lower(const Matrix& b) const;

  const Matrix& lower() const noexcept { return lower_; }
  double jitter() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return lower_.rows(); }

 private:
  SpdFactor(Backend backend, Matrix lower, double jitter)
      : backend_(std::move(backend)), lower_(std::move(lower)), jitter_(jitter) {}

  Backend backend_;
  Matrix lower_;
  double jitter_;
};

// Unjittered blocked Cholesky. Returns the first non-positive pivot on failure.
std::optional<Eigen::Index> cholesky_in_place(const Backend& backend, Matrix& m);

// X with M X = B. M must be symmetric within 1e-9 of its largest entry.
Matrix spd_solve(const Backend& backend, const Matrix& m, const Matrix& b);

// Largest |M - M^T| entry.
double asymmetry(const Matrix& m);

// Copies the lower triangle onto the upper one.
void mirror_lower(Matrix& m);

// ---------------------------------------------------------------------------
// Phase timing

enum class Phase { setup, eigen, mean, retrieve };

inline constexpr Phase kAllPhases[] = {Phase::setup, Phase::eigen, Phase::mean, Phase::retrieve};

std::string_view to_string(Phase phase) noexcept;
std::optional<Phase> parse_phase(std::string_view text) noexcept;

// Wall times of one benchmark repetition. Single owner; not thread safe.
struct TimingRecord {
  double setup_s = 0.0;
  double eigen_s = 0.0;
  double mean_s = 0.0;
  double retrieve_s = 0.0;
  std::string backend_mode;
  std::uint64_t samples = 0;
  int dims = 0;
  int n_eigen = 0;
  int rep_id = 0;

  double& seconds(Phase phase) noexcept;
  double seconds(Phase phase) const noexcept;
  double total() const noexcept { return setup_s + eigen_s + mean_s + retrieve_s; }
  std::optional<Phase> open_phase() const noexcept { return open_; }

 private:
  friend class PhaseScope;
  std::optional<Phase> open_;
};

// Adds the monotonic wall time of its lifetime to one phase of a record.
// Scopes on the same record may not overlap.
class PhaseScope {
 public:
  PhaseScope(TimingRecord& record, Phase phase);
  ~PhaseScope();

  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  TimingRecord& record_;
  Phase phase_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace fagp
