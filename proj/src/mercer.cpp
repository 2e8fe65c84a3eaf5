#include "fagp/mercer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fagp/errors.hpp"

namespace fagp {

namespace {

using Index = Eigen::Index;

void require_order(int n, const char* what) {
  if (n < 1) throw UsageError(std::string(what) + ": eigenvalue count must be >= 1, got " + std::to_string(n));
}

}  // namespace

void KernelParams1D::validate() const {
  if (!std::isfinite(epsilon) || epsilon < 0.0) {
    throw UsageError("kernel epsilon must be finite and >= 0, got " + std::to_string(epsilon));
  }
  if (!std::isfinite(rho) || rho <= 0.0) {
    throw UsageError("kernel rho must be finite and > 0, got " + std::to_string(rho));
  }
}

ArdKernelParams ArdKernelParams::isotropic(int dims, double epsilon, double rho) {
  if (dims < 1) throw UsageError("kernel needs at least one dimension");
  return ArdKernelParams{std::vector<KernelParams1D>(static_cast<std::size_t>(dims), {epsilon, rho})};
}

void ArdKernelParams::validate() const {
  if (per_dim.empty()) throw UsageError("kernel needs at least one dimension");
  for (const auto& p : per_dim) p.validate();
}

double se_kernel(double x, double x2, const KernelParams1D& params) {
  const double d = x - x2;
  return std::exp(-((params.epsilon * params.epsilon) * (d * d)));
}

double ard_kernel(std::span<const double> x, std::span<const double> x2, const ArdKernelParams& params) {
  if (x.size() != params.dims() || x2.size() != params.dims()) {
    throw DimensionError("ard_kernel: inputs have " + std::to_string(x.size()) + " and " +
                         std::to_string(x2.size()) + " coordinates, kernel has " +
                         std::to_string(params.dims()) + " dimensions");
  }
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double eps = params.per_dim[d].epsilon;
    const double diff = x[d] - x2[d];
    s += (eps * eps) * (diff * diff);
  }
  return std::exp(-s);
}

Matrix gram_matrix(const Matrix& a, const Matrix& b, const ArdKernelParams& params) {
  const auto p = static_cast<Index>(params.dims());
  if (a.cols() != p || b.cols() != p) {
    throw DimensionError("gram_matrix: inputs have " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.cols()) + " columns, kernel has " + std::to_string(p) + " dimensions");
  }
  Matrix k(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i) {
    const std::span<const double> ai(a.row(i).data(), static_cast<std::size_t>(p));
    for (Index j = 0; j < b.rows(); ++j) {
      k(i, j) = ard_kernel(ai, std::span<const double>(b.row(j).data(), static_cast<std::size_t>(p)), params);
    }
  }
  return k;
}

ShapeParams shape_params(const KernelParams1D& params, int n, Delta2Convention convention) {
  params.validate();
  require_order(n, "shape_params");
  ShapeParams shape;
  const double ratio = 2.0 * params.epsilon / params.rho;
  shape.beta = std::pow(1.0 + ratio * ratio, 0.25);
  const double beta2m1 = shape.beta * shape.beta - 1.0;
  const double rho_factor = convention == Delta2Convention::fasshauer ? params.rho * params.rho : params.rho;
  shape.delta2 = 0.5 * rho_factor * beta2m1;

  // gamma_i = sqrt(beta / (2^{i-1} (i-1)!)), built from gamma_{i+1} = gamma_i / sqrt(2i).
  shape.gamma.resize(static_cast<std::size_t>(n));
  shape.gamma[0] = std::sqrt(shape.beta);
  for (int i = 1; i < n; ++i) {
    shape.gamma[static_cast<std::size_t>(i)] = shape.gamma[static_cast<std::size_t>(i - 1)] / std::sqrt(2.0 * i);
  }
  return shape;
}

std::vector<double> eigenvalues_1d(const KernelParams1D& params, int n, Delta2Convention convention) {
  const ShapeParams shape = shape_params(params, n, convention);
  const double rho2 = params.rho * params.rho;
  const double eps2 = params.epsilon * params.epsilon;
  const double denom = rho2 + shape.delta2 + eps2;
  const double ratio = eps2 / denom;
  std::vector<double> lambda(static_cast<std::size_t>(n));
  lambda[0] = std::sqrt(rho2 / denom);
  for (std::size_t i = 1; i < lambda.size(); ++i) lambda[i] = lambda[i - 1] * ratio;
  return lambda;
}

void normalized_hermite(double z, std::span<double> out) noexcept {
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = z * std::sqrt(2.0);
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = z * std::sqrt(2.0 / (kk + 1.0)) * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

void eigenfunctions_1d(double x, const KernelParams1D& params, const ShapeParams& shape, std::span<double> out) {
  if (!std::isfinite(x)) throw UsageError("eigenfunction argument is not finite");
  normalized_hermite(params.rho * shape.beta * x, out);
  const double scale = std::sqrt(shape.beta) * std::exp(-shape.delta2 * x * x);
  for (double& v : out) v *= scale;
}

double eigenfunction_1d(int i, double x, const KernelParams1D& params, Delta2Convention convention) {
  if (i < 1) throw UsageError("eigenfunction index must be >= 1, got " + std::to_string(i));
  const ShapeParams shape = shape_params(params, i, convention);
  std::vector<double> values(static_cast<std::size_t>(i));
  eigenfunctions_1d(x, params, shape, values);
  return values.back();
}

std::vector<MultiIndex> multi_indices(int n, int p, const SizeBudget& budget) {
  require_order(n, "multi_indices");
  if (p < 1) throw UsageError("multi_indices: dimension must be >= 1, got " + std::to_string(p));
  budget.require(0, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p));
  const std::uint64_t count = *checked_pow(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p));

  std::vector<MultiIndex> result;
  result.reserve(static_cast<std::size_t>(count));
  std::vector<int> current(static_cast<std::size_t>(p), 1);
  for (std::uint64_t c = 0; c < count; ++c) {
    result.push_back(MultiIndex{current});
    // Odometer increment, last dimension fastest.
    for (int d = p - 1; d >= 0; --d) {
      auto& digit = current[static_cast<std::size_t>(d)];
      if (++digit <= n) break;
      digit = 1;
    }
  }
  return result;
}

EigenSystem eigensystem(const Matrix& x, const ArdKernelParams& params, int n, const Backend& backend,
                        const MercerOptions& options) {
  params.validate();
  require_order(n, "eigensystem");
  const auto p = static_cast<Index>(params.dims());
  if (x.cols() != p) {
    throw DimensionError("eigensystem: inputs have " + std::to_string(x.cols()) + " columns, kernel has " +
                         std::to_string(p) + " dimensions");
  }
  if (!x.allFinite()) throw UsageError("eigensystem: inputs contain non-finite values");
  options.budget.require(static_cast<std::uint64_t>(x.rows()), static_cast<std::uint64_t>(n),
                         static_cast<std::uint64_t>(p));

  EigenSystem es;
  es.params = params;
  es.n_eigen = n;
  es.convention = options.convention;
  es.indices = multi_indices(n, static_cast<int>(p), options.budget);
  const auto features = static_cast<Index>(es.indices.size());

  std::vector<ShapeParams> shapes;
  std::vector<std::vector<double>> lambda_1d;
  for (const auto& dim : params.per_dim) {
    shapes.push_back(shape_params(dim, n, options.convention));
    lambda_1d.push_back(eigenvalues_1d(dim, n, options.convention));
  }

  // Flattened zero-based indices, row j holds the p digits of feature j.
  std::vector<int> flat(static_cast<std::size_t>(features * p));
  for (Index j = 0; j < features; ++j) {
    for (Index d = 0; d < p; ++d) {
      flat[static_cast<std::size_t>(j * p + d)] = es.indices[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)] - 1;
    }
  }

  es.lambda_exact.resize(features);
  for (Index j = 0; j < features; ++j) {
    double v = lambda_1d[0][static_cast<std::size_t>(flat[static_cast<std::size_t>(j * p)])];
    for (Index d = 1; d < p; ++d) {
      v *= lambda_1d[static_cast<std::size_t>(d)][static_cast<std::size_t>(flat[static_cast<std::size_t>(j * p + d)])];
    }
    es.lambda_exact[j] = v;
  }
  const double floor = es.lambda_exact.maxCoeff() * kEigenvalueFloor;
  es.lambda = es.lambda_exact.cwiseMax(floor);

  es.phi.resize(x.rows(), features);
  const auto assemble = [&](Index r0, Index r1) {
    std::vector<double> table(static_cast<std::size_t>(p * n));
    for (Index i = r0; i < r1; ++i) {
      for (Index d = 0; d < p; ++d) {
        eigenfunctions_1d(x(i, d), params.per_dim[static_cast<std::size_t>(d)], shapes[static_cast<std::size_t>(d)],
                          std::span<double>(table.data() + d * n, static_cast<std::size_t>(n)));
      }
      double* row = es.phi.row(i).data();
      for (Index j = 0; j < features; ++j) {
        const int* digits = flat.data() + j * p;
        double v = table[static_cast<std::size_t>(digits[0])];
        for (Index d = 1; d < p; ++d) v *= table[static_cast<std::size_t>(d * n + digits[d])];
        row[j] = v;
      }
    }
  };

  const Index rows = x.rows();
  if (backend.mode() == ExecMode::parallel && backend.workers() > 1 && rows > 1) {
    const int workers = backend.workers();
    const Index block = std::max<Index>(32, (rows + workers - 1) / workers);
    const Index blocks = (rows + block - 1) / block;
#pragma omp parallel for num_threads(workers) schedule(static)
    for (Index b = 0; b < blocks; ++b) assemble(b * block, std::min(rows, (b + 1) * block));
  } else {
    assemble(0, rows);
  }

  for (Index i = 0; i < es.phi.rows(); ++i) {
    for (Index j = 0; j < features; ++j) {
      if (!std::isfinite(es.phi(i, j))) {
        throw NumericalError("eigensystem: non-finite feature at sample " + std::to_string(i) + ", feature " +
                             std::to_string(j));
      }
    }
  }
  return es;
}

Matrix reconstruct_kernel(const EigenSystem& a, const EigenSystem& b, const Backend& backend) {
  if (!(a.params == b.params) || a.n_eigen != b.n_eigen || a.convention != b.convention) {
    throw UsageError("reconstruct_kernel: eigensystems were built with different parameters");
  }
  Matrix scaled = a.phi * a.lambda_exact.asDiagonal();
  return gemm(backend, scaled, Op::none, b.phi, Op::transpose);
}

}  // namespace fagp
