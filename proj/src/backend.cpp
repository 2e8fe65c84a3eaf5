#include "fagp/backend.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "fagp/errors.hpp"

namespace fagp {

namespace {

using Index = Eigen::Index;

// Cache blocking for the product kernel: inner panel depth and output
// column panel width.
constexpr Index kDepthPanel = 256;
constexpr Index kColumnPanel = 512;
// Minimum rows per parallel block.
constexpr Index kMinRowBlock = 32;
// Diagonal block size of the Cholesky factorization.
constexpr Index kCholeskyBlock = 64;

int env_worker_cap() {
  const char* raw = std::getenv(kMaxWorkersEnv);
  if (raw == nullptr || *raw == '\0') return 0;
  int value = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc{} || ptr != end || value < 1) {
    throw UsageError(std::string(kMaxWorkersEnv) + " must be a positive integer, got '" + raw + "'");
  }
  return value;
}

// Read-only view of op(A) for a row-major A.
struct OpView {
  const double* data;
  Index rows;    // rows of op(A)
  Index cols;    // cols of op(A)
  Index stride;  // leading dimension of the stored matrix
  bool transposed;

  OpView(const Matrix& a, Op op)
      : data(a.data()),
        rows(op == Op::none ? a.rows() : a.cols()),
        cols(op == Op::none ? a.cols() : a.rows()),
        stride(a.cols()),
        transposed(op == Op::transpose) {}

  double operator()(Index i, Index k) const noexcept {
    return transposed ? data[k * stride + i] : data[i * stride + k];
  }
};

// Four interleaved partial sums combined in a fixed order. Deterministic
// for a given length, independent of which thread calls it.
double dot(const double* x, const double* y, Index len) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  Index k = 0;
  for (; k + 4 <= len; k += 4) {
    s0 += x[k] * y[k];
    s1 += x[k + 1] * y[k + 1];
    s2 += x[k + 2] * y[k + 2];
    s3 += x[k + 3] * y[k + 3];
  }
  double tail = 0.0;
  for (; k < len; ++k) tail += x[k] * y[k];
  return ((s0 + s1) + (s2 + s3)) + tail;
}

struct RowBlocks {
  Index block;
  Index count;
};

RowBlocks row_blocks(Index rows, int workers) {
  const Index per_worker = (rows + workers - 1) / std::max(workers, 1);
  const Index block = std::max(kMinRowBlock, per_worker);
  return {block, rows == 0 ? 0 : (rows + block - 1) / block};
}

// C[r0:r1, :] += op(A)[r0:r1, k0:k1] * Bp[k0:k1, :], Bp row-major with n
// columns. When lower_only is set only entries with j <= i are touched.
void product_rows(const OpView& a, const double* bp, Index n, double* c, Index r0, Index r1, Index k0, Index k1,
                  bool lower_only) {
  for (Index kb = k0; kb < k1; kb += kDepthPanel) {
    const Index ke = std::min(kb + kDepthPanel, k1);
    for (Index jb = 0; jb < n; jb += kColumnPanel) {
      const Index je = std::min(jb + kColumnPanel, n);
      for (Index i = r0; i < r1; ++i) {
        const Index jend = lower_only ? std::min(je, i + 1) : je;
        if (jend <= jb) continue;
        double* ci = c + i * n;
        for (Index k = kb; k < ke; ++k) {
          const double aik = a(i, k);
          const double* bk = bp + k * n;
          for (Index j = jb; j < jend; ++j) ci[j] += aik * bk[j];
        }
      }
    }
  }
}

// Dispatches product_rows over row blocks, or over inner-dimension chunks
// when reductions may be reordered and the output is too short.
void run_product(const Backend& backend, const OpView& a, const double* bp, Index n, Matrix& c, bool lower_only) {
  const Index m = a.rows;
  const Index depth = a.cols;
  if (backend.mode() == ExecMode::serial || backend.workers() == 1) {
    product_rows(a, bp, n, c.data(), 0, m, 0, depth, lower_only);
    return;
  }
  const int workers = backend.workers();
  const RowBlocks blocks = row_blocks(m, workers);

  if (!backend.deterministic_reduction() && blocks.count < workers && depth >= 4 * workers) {
    const Index chunk = (depth + workers - 1) / workers;
    std::vector<Matrix> partial(static_cast<std::size_t>(workers));
#pragma omp parallel for num_threads(workers) schedule(static)
    for (int w = 0; w < workers; ++w) {
      const Index k0 = std::min<Index>(w * chunk, depth);
      const Index k1 = std::min<Index>(k0 + chunk, depth);
      Matrix& part = partial[static_cast<std::size_t>(w)];
      part = Matrix::Zero(m, n);
      product_rows(a, bp, n, part.data(), 0, m, k0, k1, lower_only);
    }
    for (const Matrix& part : partial) c += part;
    return;
  }

#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (Index b = 0; b < blocks.count; ++b) {
    const Index r0 = b * blocks.block;
    const Index r1 = std::min(r0 + blocks.block, m);
    product_rows(a, bp, n, c.data(), r0, r1, 0, depth, lower_only);
  }
}

// op(B) as a contiguous row-major buffer; aliases B when no copy is needed.
const double* packed_rhs(const Matrix& b, Op op_b, std::vector<double>& storage) {
  if (op_b == Op::none) return b.data();
  const Index rows = b.cols();
  const Index cols = b.rows();
  storage.resize(static_cast<std::size_t>(rows * cols));
  for (Index j = 0; j < cols; ++j) {
    for (Index k = 0; k < rows; ++k) storage[static_cast<std::size_t>(k * cols + j)] = b(j, k);
  }
  return storage.data();
}

void check_output_budget(const Backend& backend, Index rows, Index cols) {
  const std::uint64_t bytes = 8ULL * static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
  if (bytes > backend.budget().cap_bytes) {
    throw ResourceError("product output " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                            std::to_string(bytes) + " bytes, cap is " +
                            std::to_string(backend.budget().cap_bytes),
                        static_cast<std::uint64_t>(cols), bytes);
  }
}

// Runs body(c0, c1) over column slices of a k-column right-hand side.
template <class Body>
void over_column_slices(const Backend& backend, Index columns, Body&& body) {
  if (backend.mode() == ExecMode::serial || backend.workers() == 1 || columns <= kMinRowBlock) {
    body(Index{0}, columns);
    return;
  }
  const RowBlocks blocks = row_blocks(columns, backend.workers());
#pragma omp parallel for num_threads(backend.workers()) schedule(static)
  for (Index b = 0; b < blocks.count; ++b) {
    const Index c0 = b * blocks.block;
    body(c0, std::min(c0 + blocks.block, columns));
  }
}

// Solves L X = B in place on the columns [c0, c1) of a row-major B.
void forward_substitute(const Matrix& l, Matrix& x, Index c0, Index c1) {
  const Index n = l.rows();
  for (Index i = 0; i < n; ++i) {
    double* xi = x.row(i).data();
    for (Index k = 0; k < i; ++k) {
      const double lik = l(i, k);
      const double* xk = x.row(k).data();
      for (Index j = c0; j < c1; ++j) xi[j] -= lik * xk[j];
    }
    const double d = l(i, i);
    for (Index j = c0; j < c1; ++j) xi[j] /= d;
  }
}

// Solves L^T X = B in place on the columns [c0, c1).
void backward_substitute(const Matrix& l, Matrix& x, Index c0, Index c1) {
  const Index n = l.rows();
  for (Index i = n - 1; i >= 0; --i) {
    double* xi = x.row(i).data();
    for (Index k = i + 1; k < n; ++k) {
      const double lki = l(k, i);
      const double* xk = x.row(k).data();
      for (Index j = c0; j < c1; ++j) xi[j] -= lki * xk[j];
    }
    const double d = l(i, i);
    for (Index j = c0; j < c1; ++j) xi[j] /= d;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Backend

std::string_view to_string(ExecMode mode) noexcept {
  return mode == ExecMode::serial ? "serial" : "parallel";
}

ExecMode parse_exec_mode(std::string_view text) {
  if (text == "serial") return ExecMode::serial;
  if (text == "parallel") return ExecMode::parallel;
  throw UsageError("unknown backend mode '" + std::string(text) + "' (expected serial or parallel)");
}

Backend::Backend(ExecMode mode, int workers, bool deterministic)
    : mode_(mode), workers_(workers), deterministic_(deterministic) {}

Backend Backend::serial() { return Backend(ExecMode::serial, 1, true); }

Backend Backend::parallel(int workers, bool deterministic_reduction) {
  if (workers < 0) throw UsageError("worker count must be positive");
  int count = workers == 0 ? omp_get_max_threads() : workers;
  if (const int cap = env_worker_cap(); cap > 0) count = std::min(count, cap);
  return Backend(ExecMode::parallel, std::max(count, 1), deterministic_reduction);
}

Backend Backend::with_budget(SizeBudget budget) const {
  Backend copy = *this;
  copy.budget_ = budget;
  return copy;
}

std::string Backend::describe() const {
  if (mode_ == ExecMode::serial) return "serial";
  return "parallel(workers=" + std::to_string(workers_) +
         (deterministic_ ? ", deterministic)" : ", reordered-reduction)");
}

// ---------------------------------------------------------------------------
// Products

Matrix gemm(const Backend& backend, const Matrix& a, Op op_a, const Matrix& b, Op op_b) {
  const OpView av(a, op_a);
  const Index b_rows = op_b == Op::none ? b.rows() : b.cols();
  const Index b_cols = op_b == Op::none ? b.cols() : b.rows();
  if (av.cols != b_rows) {
    throw DimensionError("gemm: inner dimensions differ (" + std::to_string(av.rows) + "x" +
                         std::to_string(av.cols) + " times " + std::to_string(b_rows) + "x" +
                         std::to_string(b_cols) + ")");
  }
  check_output_budget(backend, av.rows, b_cols);
  std::vector<double> storage;
  const double* bp = packed_rhs(b, op_b, storage);
  Matrix c = Matrix::Zero(av.rows, b_cols);
  run_product(backend, av, bp, b_cols, c, false);
  return c;
}

Matrix crossprod(const Backend& backend, const Matrix& a) {
  check_output_budget(backend, a.cols(), a.cols());
  const OpView av(a, Op::transpose);
  Matrix c = Matrix::Zero(a.cols(), a.cols());
  run_product(backend, av, a.data(), a.cols(), c, true);
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = i + 1; j < c.cols(); ++j) c(i, j) = c(j, i);
  }
  return c;
}

Vector gemv(const Backend& backend, const Matrix& a, Op op_a, const Vector& x) {
  const OpView av(a, op_a);
  if (av.cols != x.size()) {
    throw DimensionError("gemv: matrix has " + std::to_string(av.cols) + " columns, vector has " +
                         std::to_string(x.size()) + " entries");
  }
  const bool parallel = backend.mode() == ExecMode::parallel && backend.workers() > 1;
  const int workers = backend.workers();
  Vector y = Vector::Zero(av.rows);

  if (op_a == Op::none) {
    const auto rows = [&](Index r0, Index r1) {
      for (Index i = r0; i < r1; ++i) {
        const double* ai = a.row(i).data();
        double s = 0.0;
        for (Index k = 0; k < av.cols; ++k) s += ai[k] * x[k];
        y[i] = s;
      }
    };
    if (!parallel) {
      rows(0, av.rows);
      return y;
    }
    const RowBlocks blocks = row_blocks(av.rows, workers);
#pragma omp parallel for num_threads(workers) schedule(static)
    for (Index b = 0; b < blocks.count; ++b) {
      const Index r0 = b * blocks.block;
      rows(r0, std::min(r0 + blocks.block, av.rows));
    }
    return y;
  }

  // y = A^T x for row-major A: accumulate rows of A scaled by x, in row order.
  const Index stored_rows = a.rows();
  const auto accumulate = [&](double* out, Index j0, Index j1, Index i0, Index i1) {
    for (Index i = i0; i < i1; ++i) {
      const double xi = x[i];
      const double* ai = a.row(i).data();
      for (Index j = j0; j < j1; ++j) out[j] += xi * ai[j];
    }
  };
  if (!parallel) {
    accumulate(y.data(), 0, av.rows, 0, stored_rows);
    return y;
  }
  const RowBlocks blocks = row_blocks(av.rows, workers);
  if (!backend.deterministic_reduction() && blocks.count < workers && stored_rows >= 4 * workers) {
    const Index chunk = (stored_rows + workers - 1) / workers;
    std::vector<Vector> partial(static_cast<std::size_t>(workers));
#pragma omp parallel for num_threads(workers) schedule(static)
    for (int w = 0; w < workers; ++w) {
      const Index i0 = std::min<Index>(w * chunk, stored_rows);
      const Index i1 = std::min<Index>(i0 + chunk, stored_rows);
      Vector& part = partial[static_cast<std::size_t>(w)];
      part = Vector::Zero(av.rows);
      accumulate(part.data(), 0, av.rows, i0, i1);
    }
    for (const Vector& part : partial) y += part;
    return y;
  }
#pragma omp parallel for num_threads(workers) schedule(static)
  for (Index b = 0; b < blocks.count; ++b) {
    const Index j0 = b * blocks.block;
    accumulate(y.data(), j0, std::min(j0 + blocks.block, av.rows), 0, stored_rows);
  }
  return y;
}

Matrix gemm_reference(const Matrix& a, Op op_a, const Matrix& b, Op op_b) {
  const OpView av(a, op_a);
  const OpView bv(b, op_b);
  if (av.cols != bv.rows) throw DimensionError("gemm_reference: inner dimensions differ");
  Matrix c(av.rows, bv.cols);
  for (Index i = 0; i < av.rows; ++i) {
    for (Index j = 0; j < bv.cols; ++j) {
      double s = 0.0;
      for (Index k = 0; k < av.cols; ++k) s += av(i, k) * bv(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Cholesky

std::optional<Index> cholesky_in_place(const Backend& backend, Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("cholesky: matrix is not square");
  const Index n = m.rows();
  const bool parallel = backend.mode() == ExecMode::parallel && backend.workers() > 1;
  const int workers = backend.workers();

  for (Index kb = 0; kb < n; kb += kCholeskyBlock) {
    const Index ke = std::min(kb + kCholeskyBlock, n);

    // Diagonal block; earlier columns were already folded in by the
    // trailing updates.
    for (Index j = kb; j < ke; ++j) {
      const double* lj = m.row(j).data() + kb;
      const double d = m(j, j) - dot(lj, lj, j - kb);
      if (!(d > 0.0) || !std::isfinite(d)) return j;
      const double ljj = std::sqrt(d);
      m(j, j) = ljj;
      for (Index i = j + 1; i < ke; ++i) {
        const double* li = m.row(i).data() + kb;
        m(i, j) = (m(i, j) - dot(li, lj, j - kb)) / ljj;
      }
    }

    // Panel below the diagonal block: L21 = A21 L11^{-T}, row by row.
    const auto panel_row = [&](Index i) {
      double* li = m.row(i).data();
      for (Index j = kb; j < ke; ++j) {
        const double* lj = m.row(j).data() + kb;
        li[j] = (li[j] - dot(li + kb, lj, j - kb)) / m(j, j);
      }
    };
    // Trailing update of the lower triangle: A22 -= L21 L21^T.
    const auto trailing_row = [&](Index i) {
      double* li = m.row(i).data();
      for (Index j = ke; j <= i; ++j) li[j] -= dot(li + kb, m.row(j).data() + kb, ke - kb);
    };

    if (parallel && n - ke > kMinRowBlock) {
#pragma omp parallel num_threads(workers)
      {
#pragma omp for schedule(static)
        for (Index i = ke; i < n; ++i) panel_row(i);
#pragma omp for schedule(dynamic, 16)
        for (Index i = ke; i < n; ++i) trailing_row(i);
      }
    } else {
      for (Index i = ke; i < n; ++i) panel_row(i);
      for (Index i = ke; i < n; ++i) trailing_row(i);
    }
  }

  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) m(i, j) = 0.0;
  }
  return std::nullopt;
}

SpdFactor SpdFactor::factor(const Backend& backend, const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spd factor: matrix is not square");
  const Index n = m.rows();
  Matrix work = m;
  auto failed = cholesky_in_place(backend, work);
  if (!failed) return SpdFactor(backend, std::move(work), 0.0);

  const double trace = m.diagonal().sum();
  double jitter = kJitterScale * (trace > 0.0 ? trace / static_cast<double>(n) : 1.0);
  for (int attempt = 0; attempt <= kJitterRetries; ++attempt, jitter *= 10.0) {
    work = m;
    work.diagonal().array() += jitter;
    failed = cholesky_in_place(backend, work);
    if (!failed) return SpdFactor(backend, std::move(work), jitter);
  }
  throw NumericalError("matrix is not positive definite after jitter escalation (pivot " +
                           std::to_string(*failed) + " of " + std::to_string(n) + ")",
                       *failed);
}

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != size()) throw DimensionError("spd solve: right-hand side has wrong length");
  Matrix x = b;
  forward_substitute(lower_, x, 0, 1);
  backward_substitute(lower_, x, 0, 1);
  return Vector(x.col(0));
}

Matrix SpdFactor::solve(const Matrix& b) const {
  if (b.rows() != size()) throw DimensionError("spd solve: right-hand side has wrong row count");
  Matrix x = b;
  over_column_slices(backend_, x.cols(), [&](Index c0, Index c1) {
    forward_substitute(lower_, x, c0, c1);
    backward_substitute(lower_, x, c0, c1);
  });
  return x;
}

Matrix SpdFactor::solve_lower(const Matrix& b) const {
  if (b.rows() != size()) throw DimensionError("spd solve: right-hand side has wrong row count");
  Matrix x = b;
  over_column_slices(backend_, x.cols(), [&](Index c0, Index c1) { forward_substitute(lower_, x, c0, c1); });
  return x;
}

double asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("asymmetry: matrix is not square");
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void mirror_lower(Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) m(i, j) = m(j, i);
  }
}

Matrix spd_solve(const Backend& backend, const Matrix& m, const Matrix& b) {
  if (m.rows() != m.cols()) throw DimensionError("spd_solve: matrix is not square");
  if (b.rows() != m.rows()) throw DimensionError("spd_solve: right-hand side has wrong row count");
  if (m.size() > 0) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asymmetry(m) > 1e-9 * scale) throw UsageError("spd_solve: matrix is not symmetric");
  }
  return SpdFactor::factor(backend, m).solve(b);
}

// ---------------------------------------------------------------------------
// Timing

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::setup: return "setup";
    case Phase::eigen: return "eigen";
    case Phase::mean: return "mean";
    case Phase::retrieve: return "retrieve";
  }
  return "unknown";
}

std::optional<Phase> parse_phase(std::string_view text) noexcept {
  for (Phase p : kAllPhases) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

double& TimingRecord::seconds(Phase phase) noexcept {
  switch (phase) {
    case Phase::setup: return setup_s;
    case Phase::eigen: return eigen_s;
    case Phase::mean: return mean_s;
    case Phase::retrieve: break;
  }
  return retrieve_s;
}

double TimingRecord::seconds(Phase phase) const noexcept {
  return const_cast<TimingRecord&>(*this).seconds(phase);
}

PhaseScope::PhaseScope(TimingRecord& record, Phase phase) : record_(record), phase_(phase) {
  if (record_.open_) {
    throw UsageError("phase '" + std::string(to_string(phase)) + "' opened while phase '" +
                     std::string(to_string(*record_.open_)) + "' is still open");
  }
  record_.open_ = phase;
  start_ = std::chrono::steady_clock::now();
}

PhaseScope::~PhaseScope() {
  const auto stop = std::chrono::steady_clock::now();
  record_.seconds(phase_) += std::chrono::duration<double>(stop - start_).count();
  record_.open_.reset();
}

}  // namespace fagp
