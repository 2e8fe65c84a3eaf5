#pragma once

#include <optional>

#include <Eigen/LU>

#include "fagp/backend.hpp"
#include "fagp/datagen.hpp"
#include "fagp/matrix.hpp"
#include "fagp/mercer.hpp"

namespace fagp {

// Constant prior mean m(x) = value; zero unless set.
struct PriorMean {
  double value = 0.0;

  Vector operator()(Eigen::Index rows) const { return Vector::Constant(rows, value); }
};

struct GpModel {
  ArdKernelParams kernel;
  double noise_var = 1e-2;
  PriorMean prior_mean{};
  int n_eigen = 10;

  void validate() const;
};

struct PosteriorResult {
  Vector mean;
  std::optional<Matrix> cov;
};

// Exact GP posterior through a Cholesky factorization of K + sigma^2 I.
// Quadratic memory and cubic time in the training size; used as the
// reference for the approximate posterior.
PosteriorResult exact_posterior(const Dataset& train, const Matrix& x_star, const GpModel& model,
                                bool want_cov = false);

// Which algebraic route evaluates the low-rank posterior.
enum class FagpForm {
  // Features scaled by sqrt(Lambda), system I + Psi^T Psi / sigma^2. Never
  // forms Lambda^{-1}.
  scaled_features,
  // Lambda_bar = Lambda^{-1} + Phi^T Phi / sigma^2, exactly as the Woodbury
  // identity reads.
  woodbury,
};

// Test hook for the verification command: flips the sign of the low-rank
// correction in the mean (the data term for scaled features, the Woodbury
// subtraction for the literal form).
enum class FaultInjection { none, flip_correction_sign };

struct FagpOptions {
  FagpForm form = FagpForm::scaled_features;
  bool want_cov = false;
  MercerOptions mercer{};
  FaultInjection fault = FaultInjection::none;
};

// Factorized n^p x n^p system of the low-rank posterior.
class LambdaBar {
 public:
  static LambdaBar build(const EigenSystem& es, double noise_var, const Backend& backend,
                         FagpForm form = FagpForm::scaled_features);

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

  // The assembled (unjittered) matrix.
  const Matrix& matrix() const noexcept { return matrix_; }
  FagpForm form() const noexcept { return form_; }
  // True when Cholesky failed even with jitter and LU was used instead.
  bool used_lu_fallback() const noexcept { return lu_.has_value(); }
  std::optional<SpdFactor> const& cholesky() const noexcept { return chol_; }

 private:
  LambdaBar(FagpForm form, Matrix matrix) : form_(form), matrix_(std::move(matrix)) {}

  FagpForm form_;
  Matrix matrix_;
  std::optional<SpdFactor> chol_;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

// Low-rank posterior from prebuilt eigensystems of the training and test
// inputs. Only the n^p x n^p system is factorized; no N x N or N* x N
// intermediate is formed.
PosteriorResult fagp_from_eigensystems(const EigenSystem& train, const EigenSystem& test, const Vector& y,
                                       const GpModel& model, const Backend& backend,
                                       const FagpOptions& options = {});

PosteriorResult fagp_posterior(const Dataset& train, const Matrix& x_star, const GpModel& model,
                               const Backend& backend, const FagpOptions& options = {});

}  // namespace fagp
