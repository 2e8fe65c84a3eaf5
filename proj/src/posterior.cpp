#include "fagp/posterior.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "fagp/errors.hpp"

namespace fagp {

namespace {

using Index = Eigen::Index;

void check_inputs(const Dataset& train, const Matrix& x_star, const GpModel& model) {
  model.validate();
  train.validate();
  const auto p = static_cast<Index>(model.kernel.dims());
  if (train.dims() != p || x_star.cols() != p) {
    throw DimensionError("posterior: training inputs have " + std::to_string(train.dims()) +
                         " columns, test inputs " + std::to_string(x_star.cols()) + ", kernel has " +
                         std::to_string(p) + " dimensions");
  }
  if (x_star.rows() < 1) throw UsageError("posterior: test set is empty");
}

}  // namespace

void GpModel::validate() const {
  kernel.validate();
  if (!std::isfinite(noise_var) || noise_var <= 0.0) {
    throw UsageError("noise variance must be finite and > 0, got " + std::to_string(noise_var));
  }
  if (!std::isfinite(prior_mean.value)) throw UsageError("prior mean must be finite");
  if (n_eigen < 1) throw UsageError("eigenvalue count must be >= 1");
}

// ---------------------------------------------------------------------------
// Exact posterior

PosteriorResult exact_posterior(const Dataset& train, const Matrix& x_star, const GpModel& model, bool want_cov) {
  check_inputs(train, x_star, model);
  const Index n = train.size();

  Eigen::MatrixXd k = gram_matrix(train.x, train.x, model.kernel);
  k.diagonal().array() += model.noise_var;

  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    const double base = SpdFactor::kJitterScale * k.trace() / static_cast<double>(n);
    double jitter = base;
    for (int attempt = 0; attempt <= SpdFactor::kJitterRetries; ++attempt, jitter *= 10.0) {
      Eigen::MatrixXd jittered = k;
      jittered.diagonal().array() += jitter;
      llt.compute(jittered);
      if (llt.info() == Eigen::Success) break;
    }
    if (llt.info() != Eigen::Success) {
      throw NumericalError("exact posterior: K + sigma^2 I is not positive definite after jitter escalation");
    }
  }

  const Vector residual = train.y - model.prior_mean(n);
  const Vector alpha = llt.solve(residual);
  const Eigen::MatrixXd k_star = gram_matrix(x_star, train.x, model.kernel);

  PosteriorResult result;
  result.mean = model.prior_mean(x_star.rows()) + k_star * alpha;
  if (want_cov) {
    const Eigen::MatrixXd v = llt.matrixL().solve(k_star.transpose());
    Eigen::MatrixXd cov = gram_matrix(x_star, x_star, model.kernel);
    cov.noalias() -= v.transpose() * v;
    result.cov = Matrix(0.5 * (cov + cov.transpose()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Lambda_bar

LambdaBar LambdaBar::build(const EigenSystem& es, double noise_var, const Backend& backend, FagpForm form) {
  if (!std::isfinite(noise_var) || noise_var <= 0.0) throw UsageError("noise variance must be > 0");
  const Index f = es.features();
  Matrix m = crossprod(backend, es.phi);
  if (form == FagpForm::scaled_features) {
    // sqrt(Lambda) Phi^T Phi sqrt(Lambda) / sigma^2 + I
    const Vector s = es.lambda.cwiseSqrt();
    for (Index i = 0; i < f; ++i) {
      for (Index j = 0; j < f; ++j) m(i, j) = (s[i] * s[j]) * m(i, j) / noise_var;
    }
    m.diagonal().array() += 1.0;
  } else {
    m /= noise_var;
    m.diagonal() += es.lambda.cwiseInverse();
  }
  mirror_lower(m);

  LambdaBar lb(form, std::move(m));
  try {
    lb.chol_ = SpdFactor::factor(backend, lb.matrix_);
  } catch (const NumericalError&) {
    Eigen::MatrixXd dense = lb.matrix_;
    lb.lu_.emplace(dense);
    if (!(lb.lu_->rcond() > std::numeric_limits<double>::epsilon())) {
      throw NumericalError("Lambda_bar is singular: Cholesky and LU both failed");
    }
  }
  return lb;
}

Vector LambdaBar::solve(const Vector& b) const {
  if (chol_) return chol_->solve(b);
  return lu_->solve(b);
}

Matrix LambdaBar::solve(const Matrix& b) const {
  if (chol_) return chol_->solve(b);
  return Matrix(lu_->solve(Eigen::MatrixXd(b)));
}

// ---------------------------------------------------------------------------
// Low-rank posterior

PosteriorResult fagp_from_eigensystems(const EigenSystem& train, const EigenSystem& test, const Vector& y,
                                       const GpModel& model, const Backend& backend, const FagpOptions& options) {
  model.validate();
  if (!(train.params == test.params) || train.n_eigen != test.n_eigen || train.convention != test.convention) {
    throw UsageError("fagp: training and test eigensystems were built with different parameters");
  }
  if (y.size() != train.samples()) {
    throw DimensionError("fagp: " + std::to_string(y.size()) + " targets for " + std::to_string(train.samples()) +
                         " training samples");
  }

  const double s2 = model.noise_var;
  const LambdaBar lambda_bar = LambdaBar::build(train, s2, backend, options.form);
  const double correction_sign = options.fault == FaultInjection::flip_correction_sign ? -1.0 : 1.0;

  // Right to left: every step is a matrix-vector product with a feature
  // matrix or a solve with Lambda_bar.
  const Vector t1 = (y - model.prior_mean(y.size())) / s2;
  PosteriorResult result;

  if (options.form == FagpForm::scaled_features) {
    // With Psi = Phi sqrt(Lambda) and M = I + Psi^T Psi / sigma^2 the
    // Woodbury weights collapse to Psi^T (Psi Psi^T + sigma^2 I)^{-1} r =
    // M^{-1} Psi^T r / sigma^2, so the mean needs one solve and no
    // subtraction of nearly equal N-vectors.
    const Vector s = train.lambda.cwiseSqrt();
    const Vector t2 = s.cwiseProduct(gemv(backend, train.phi, Op::transpose, t1));
    const Vector t3 = lambda_bar.solve(t2);
    result.mean = model.prior_mean(test.samples()) +
                  correction_sign * gemv(backend, test.phi, Op::none, s.cwiseProduct(t3));

    if (options.want_cov) {
      // Sigma* = Psi* M^{-1} Psi*^T with Psi* = Phi* sqrt(Lambda).
      Matrix psi_star_t = test.phi.transpose();
      for (Index i = 0; i < psi_star_t.rows(); ++i) psi_star_t.row(i) *= s[i];
      if (lambda_bar.cholesky()) {
        const Matrix v = lambda_bar.cholesky()->solve_lower(psi_star_t);
        result.cov = crossprod(backend, v);
      } else {
        Matrix cov = gemm(backend, psi_star_t, Op::transpose, lambda_bar.solve(psi_star_t), Op::none);
        result.cov = Matrix(0.5 * (cov + cov.transpose()));
      }
    }
    return result;
  }

  const Vector& lambda = train.lambda;
  const Vector t2 = gemv(backend, train.phi, Op::transpose, t1);
  const Vector t3 = lambda_bar.solve(t2);
  const Vector t4 = gemv(backend, train.phi, Op::none, t3);
  const Vector t5 = t1 - correction_sign * t4 / s2;
  const Vector u = gemv(backend, train.phi, Op::transpose, t5);
  result.mean = model.prior_mean(test.samples()) + gemv(backend, test.phi, Op::none, lambda.cwiseProduct(u));

  if (options.want_cov) {
    // Sigma* = Phi* [Lambda - Lambda (G - G Lambda_bar^{-1} G) Lambda] Phi*^T, G = Phi^T Phi / sigma^2.
    const Matrix g = crossprod(backend, train.phi) / s2;
    const Matrix g_solved = gemm(backend, g, Op::none, lambda_bar.solve(g), Op::none);
    Matrix inner = -(lambda.asDiagonal() * (g - g_solved) * lambda.asDiagonal());
    inner.diagonal() += lambda;
    const Matrix left = gemm(backend, test.phi, Op::none, inner, Op::none);
    Matrix cov = gemm(backend, left, Op::none, test.phi, Op::transpose);
    result.cov = Matrix(0.5 * (cov + cov.transpose()));
  }
  return result;
}

PosteriorResult fagp_posterior(const Dataset& train, const Matrix& x_star, const GpModel& model,
                               const Backend& backend, const FagpOptions& options) {
  check_inputs(train, x_star, model);
  const auto samples = static_cast<std::uint64_t>(train.size() + x_star.rows());
  options.mercer.budget.require(samples, static_cast<std::uint64_t>(model.n_eigen), model.kernel.dims());
  const EigenSystem train_es = eigensystem(train.x, model.kernel, model.n_eigen, backend, options.mercer);
  const EigenSystem test_es = eigensystem(x_star, model.kernel, model.n_eigen, backend, options.mercer);
  return fagp_from_eigensystems(train_es, test_es, train.y, model, backend, options);
}

}  // namespace fagp
