#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fagp/backend.hpp"
#include "fagp/budget.hpp"
#include "fagp/matrix.hpp"

namespace fagp {

// Univariate squared-exponential kernel exp(-eps^2 (x - x')^2) with the
// global scale factor rho of its Mercer expansion.
struct KernelParams1D {
  double epsilon = 1.0;
  double rho = 1.0;

  // Throws UsageError unless epsilon >= 0 and rho > 0 (both finite).
  void validate() const;
  bool operator==(const KernelParams1D&) const = default;
};

// One KernelParams1D per input dimension.
struct ArdKernelParams {
  std::vector<KernelParams1D> per_dim;

  static ArdKernelParams isotropic(int dims, double epsilon, double rho);

  std::size_t dims() const noexcept { return per_dim.size(); }
  void validate() const;
  bool operator==(const ArdKernelParams&) const = default;
};

// How delta^2 is derived from beta. `fasshauer` is (rho^2 / 2)(beta^2 - 1),
// which makes the expansion reproduce the kernel. `rho_linear` is
// (rho / 2)(beta^2 - 1); the two agree only at rho = 1.
enum class Delta2Convention { fasshauer, rho_linear };

struct ShapeParams {
  double beta = 1.0;
  double delta2 = 0.0;
  std::vector<double> gamma;  // gamma_1 .. gamma_n
};

double se_kernel(double x, double x2, const KernelParams1D& params);
double ard_kernel(std::span<const double> x, std::span<const double> x2, const ArdKernelParams& params);

// k(A_i, B_j) for every row pair.
Matrix gram_matrix(const Matrix& a, const Matrix& b, const ArdKernelParams& params);

ShapeParams shape_params(const KernelParams1D& params, int n,
                         Delta2Convention convention = Delta2Convention::fasshauer);

// lambda_1 .. lambda_n, geometric with ratio eps^2 / (rho^2 + delta^2 + eps^2).
std::vector<double> eigenvalues_1d(const KernelParams1D& params, int n,
                                   Delta2Convention convention = Delta2Convention::fasshauer);

// Normalized physicists' Hermite values h_k(z) = H_k(z) / sqrt(2^k k!) for
// k = 0 .. out.size() - 1, by the three-term recurrence on h.
void normalized_hermite(double z, std::span<double> out) noexcept;

// phi_i(x) for i >= 1.
double eigenfunction_1d(int i, double x, const KernelParams1D& params,
                        Delta2Convention convention = Delta2Convention::fasshauer);

// phi_1(x) .. phi_n(x) in one pass of the recurrence.
void eigenfunctions_1d(double x, const KernelParams1D& params, const ShapeParams& shape, std::span<double> out);

// 1-based per-dimension eigen indices.
struct MultiIndex {
  std::vector<int> indices;

  std::size_t size() const noexcept { return indices.size(); }
  int operator[](std::size_t d) const noexcept { return indices[d]; }
  bool operator==(const MultiIndex&) const = default;
};

// All n^p multi-indices in lexicographic order, first dimension slowest.
// Throws ResourceError when n^p does not fit the budget.
std::vector<MultiIndex> multi_indices(int n, int p, const SizeBudget& budget = {});

// Relative floor applied to product eigenvalues.
inline constexpr double kEigenvalueFloor = 1e-14;

struct MercerOptions {
  Delta2Convention convention = Delta2Convention::fasshauer;
  SizeBudget budget{};
};

// Tensor-product Mercer eigensystem of the ARD kernel evaluated on X.
struct EigenSystem {
  Vector lambda;         // product eigenvalues, floored at max * kEigenvalueFloor
  Vector lambda_exact;   // product eigenvalues before the floor
  Matrix phi;            // N x n^p, column j belongs to indices[j]
  std::vector<MultiIndex> indices;
  ArdKernelParams params;
  int n_eigen = 0;
  Delta2Convention convention = Delta2Convention::fasshauer;

  Eigen::Index features() const noexcept { return lambda.size(); }
  Eigen::Index samples() const noexcept { return phi.rows(); }
};

// Rows are assembled in parallel when the backend allows it; every entry
// is computed independently, so the result does not depend on the backend.
EigenSystem eigensystem(const Matrix& x, const ArdKernelParams& params, int n, const Backend& backend,
                        const MercerOptions& options = {});

// Phi_A Lambda Phi_B^T using the unfloored eigenvalues.
Matrix reconstruct_kernel(const EigenSystem& a, const EigenSystem& b, const Backend& backend);

}  // namespace fagp
