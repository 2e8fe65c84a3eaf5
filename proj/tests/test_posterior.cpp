#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "fagp/datagen.hpp"
#include "fagp/errors.hpp"
#include "fagp/posterior.hpp"

using namespace fagp;

namespace {

GpModel model_1d(double eps, int n, double noise_var = 1e-2) {
  GpModel m;
  m.kernel = ArdKernelParams::isotropic(1, eps, 1.0);
  m.n_eigen = n;
  m.noise_var = noise_var;
  return m;
}

Dataset single_point() {
  Dataset ds;
  ds.x = Matrix::Zero(1, 1);
  ds.y = Vector::Ones(1);
  ds.domain = {Interval{}};
  return ds;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  const CounterRng rng(seed, 5);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * rng.uniform(static_cast<std::uint64_t>(i)) - 1.0;
  return m;
}

// An eigensystem with arbitrary features, bypassing the Mercer construction.
EigenSystem synthetic(const Matrix& phi, const Vector& lambda) {
  EigenSystem es;
  es.phi = phi;
  es.lambda = lambda;
  es.lambda_exact = lambda;
  es.params = ArdKernelParams::isotropic(1, 1.0, 1.0);
  es.n_eigen = static_cast<int>(lambda.size());
  return es;
}

}  // namespace

TEST_CASE("exact posterior on one point") {
  const Dataset ds = single_point();
  const auto r = exact_posterior(ds, Matrix::Zero(1, 1), model_1d(1.0, 1, 1.0), true);
  CHECK(r.mean[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK((*r.cov)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero residual leaves the prior mean") {
  Dataset ds = generate(30, 1, 3, 0.05, Interval{});
  ds.y.setConstant(0.7);
  GpModel m = model_1d(1.0, 12);
  m.prior_mean.value = 0.7;
  const Matrix xs = uniform_points(20, ds.domain, 4);
  const auto exact = exact_posterior(ds, xs, m);
  const auto fagp = fagp_posterior(ds, xs, m, Backend::serial());
  CHECK((exact.mean.array() - 0.7).abs().maxCoeff() == 0.0);
  CHECK((fagp.mean.array() - 0.7).abs().maxCoeff() == 0.0);
}

TEST_CASE("far from the data the posterior returns to the prior") {
  const Dataset ds = generate(20, 1, 8, 0.05, Interval{});
  GpModel m = model_1d(1.0, 15);
  m.prior_mean.value = -0.25;
  Matrix far(1, 1);
  far(0, 0) = 50.0;
  const auto exact = exact_posterior(ds, far, m, true);
  CHECK(exact.mean[0] == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK((*exact.cov)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // Every eigenfunction has decayed to zero there, so the low-rank posterior agrees.
  const auto fagp = fagp_posterior(ds, far, m, Backend::serial());
  CHECK(fagp.mean[0] == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("fagp with eps = 0 and one eigenfunction") {
  const Dataset ds = single_point();
  for (FagpForm form : {FagpForm::scaled_features, FagpForm::woodbury}) {
    FagpOptions opt;
    opt.form = form;
    opt.want_cov = true;
    const auto r = fagp_posterior(ds, Matrix::Zero(1, 1), model_1d(0.0, 1, 1.0), Backend::serial(), opt);
    CHECK(r.mean[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK((*r.cov)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("fagp matches the exact posterior on 50 points") {
  const Dataset ds = generate(50, 1, 2024, 0.05, Interval{});
  const Matrix xs = uniform_points(40, ds.domain, 2024);
  const GpModel m = model_1d(1.0, 25, 0.0025);
  const auto exact = exact_posterior(ds, xs, m, true);
  for (FagpForm form : {FagpForm::scaled_features, FagpForm::woodbury}) {
    FagpOptions opt;
    opt.form = form;
    opt.want_cov = true;
    const auto r = fagp_posterior(ds, xs, m, Backend::serial(), opt);
    CHECK((r.mean - exact.mean).cwiseAbs().maxCoeff() < 1e-4 * ds.y.cwiseAbs().maxCoeff());
    CHECK((*r.cov - *exact.cov).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("fagp error does not grow with more eigenfunctions") {
  const Dataset ds = generate(200, 1, 2024, 0.05, Interval{});
  const Matrix xs = uniform_points(100, ds.domain, 2024);
  GpModel m = model_1d(1.0, 5, 0.0025);
  const auto exact = exact_posterior(ds, xs, m);
  double previous = INFINITY;
  for (int n = 5; n <= 25; n += 5) {
    m.n_eigen = n;
    const double err = (fagp_posterior(ds, xs, m, Backend::serial()).mean - exact.mean).cwiseAbs().maxCoeff();
    INFO("n=" << n << " err=" << err);
    CHECK(err <= previous);
    previous = err;
  }
  CHECK(previous < 1e-3 * ds.y.cwiseAbs().maxCoeff());
}

TEST_CASE("woodbury identity against a dense inverse") {
  const CounterRng rng(77, 9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng.bits(3 * trial) % 40);
    const Eigen::Index f = 1 + static_cast<Eigen::Index>(rng.bits(3 * trial + 1) % n);
    const double s2 = 0.01 + rng.uniform(3 * trial + 2);
    const Matrix phi = random_matrix(n, f, 1000 + trial);
    Vector lambda(f);
    for (Eigen::Index i = 0; i < f; ++i) lambda[i] = 0.05 + random_matrix(1, 1, 5000 + 50 * trial + i)(0, 0) + 1.0;

    const Eigen::MatrixXd dense = Eigen::MatrixXd(phi * lambda.asDiagonal() * phi.transpose()) +
                                  s2 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd direct = dense.inverse();

    const LambdaBar lb = LambdaBar::build(synthetic(phi, lambda), s2, Backend::serial(), FagpForm::woodbury);
    const Matrix low_rank = Matrix(Matrix::Identity(n, n) / s2) - phi * lb.solve(Matrix(phi.transpose())) / (s2 * s2);
    const double err = (Eigen::MatrixXd(low_rank) - direct).norm() / direct.norm();
    INFO("trial=" << trial << " n=" << n << " f=" << f);
    CHECK(err < 1e-8);
  }
}

TEST_CASE("lambda bar assembly") {
  Matrix phi(2, 1);
  phi << 1.0, 1.0;
  Vector lambda(1);
  lambda << 1.0;
  // 1/1 + (1 + 1) / 0.5 = 5
  const LambdaBar lb = LambdaBar::build(synthetic(phi, lambda), 0.5, Backend::serial(), FagpForm::woodbury);
  CHECK(lb.matrix()(0, 0) == 5.0);
  CHECK_FALSE(lb.used_lu_fallback());

  const Dataset ds = generate(300, 2, 6, 0.05, Interval{});
  const EigenSystem es = eigensystem(ds.x, ArdKernelParams::isotropic(2, 1.0, 1.0), 5, Backend::serial());
  for (FagpForm form : {FagpForm::scaled_features, FagpForm::woodbury}) {
    const LambdaBar m = LambdaBar::build(es, 0.01, Backend::parallel(4), form);
    CHECK(asymmetry(m.matrix()) == 0.0);
    const Matrix rhs = random_matrix(25, 3, 7);
    const Eigen::MatrixXd want = Eigen::MatrixXd(m.matrix()).inverse() * Eigen::MatrixXd(rhs);
    const Matrix got = m.solve(rhs);
    CHECK((Eigen::MatrixXd(got) - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(LambdaBar::build(es, 0.0, Backend::serial()), UsageError);
}

TEST_CASE("lambda bar falls back to LU on an indefinite system") {
  Matrix phi = random_matrix(8, 3, 31);
  Vector lambda(3);
  lambda << 1.0, -0.01, 0.5;
  const LambdaBar lb = LambdaBar::build(synthetic(phi, lambda), 0.1, Backend::serial(), FagpForm::woodbury);
  CHECK(lb.used_lu_fallback());
  const Vector b = Vector::Ones(3);
  CHECK((lb.matrix() * lb.solve(b) - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scaled and woodbury forms agree") {
  const Dataset ds = generate(500, 2, 12, 0.05, Interval{});
  const Matrix xs = uniform_points(60, ds.domain, 12);
  GpModel m;
  m.kernel = ArdKernelParams::isotropic(2, 1.0, 1.0);
  m.n_eigen = 6;
  m.noise_var = 0.0025;
  FagpOptions a;
  a.want_cov = true;
  FagpOptions b = a;
  b.form = FagpForm::woodbury;
  const auto ra = fagp_posterior(ds, xs, m, Backend::serial(), a);
  const auto rb = fagp_posterior(ds, xs, m, Backend::serial(), b);
  CHECK((ra.mean - rb.mean).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((*ra.cov - *rb.cov).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("posterior covariance is a valid shrinkage of the prior") {
  const Dataset ds = generate(400, 1, 21, 0.05, Interval{});
  const Matrix xs = uniform_points(80, ds.domain, 21);
  const GpModel m = model_1d(1.0, 20, 0.0025);
  FagpOptions opt;
  opt.want_cov = true;
  const Matrix cov = *fagp_posterior(ds, xs, m, Backend::serial(), opt).cov;
  CHECK(asymmetry(cov) == 0.0);
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    CHECK(cov(i, i) >= -1e-9);
    CHECK(cov(i, i) <= 1.0 + 1e-9);
  }
}

TEST_CASE("backend does not change the posterior") {
  const Dataset ds = generate(2000, 2, 33, 0.05, Interval{});
  const Matrix xs = uniform_points(100, ds.domain, 33);
  GpModel m;
  m.kernel = ArdKernelParams::isotropic(2, 1.0, 1.0);
  m.n_eigen = 8;
  m.noise_var = 0.0025;
  const auto s = fagp_posterior(ds, xs, m, Backend::serial());
  const auto p = fagp_posterior(ds, xs, m, Backend::parallel(8));
  const auto q = fagp_posterior(ds, xs, m, Backend::parallel(8, false));
  CHECK(s.mean == p.mean);
  CHECK((s.mean - q.mean).cwiseAbs().maxCoeff() / s.mean.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fault injection changes the mean") {
  const Dataset ds = generate(100, 1, 1, 0.05, Interval{});
  const Matrix xs = uniform_points(10, ds.domain, 1);
  const GpModel m = model_1d(1.0, 10, 0.0025);
  FagpOptions bad;
  bad.fault = FaultInjection::flip_correction_sign;
  const auto good = fagp_posterior(ds, xs, m, Backend::serial());
  const auto flipped = fagp_posterior(ds, xs, m, Backend::serial(), bad);
  CHECK((good.mean - flipped.mean).cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("posterior input validation") {
  const Dataset ds = generate(10, 2, 1, 0.05, Interval{});
  GpModel m = model_1d(1.0, 3);
  CHECK_THROWS_AS(fagp_posterior(ds, Matrix::Zero(2, 2), m, Backend::serial()), DimensionError);
  m.kernel = ArdKernelParams::isotropic(2, 1.0, 1.0);
  CHECK_THROWS_AS(fagp_posterior(ds, Matrix::Zero(2, 1), m, Backend::serial()), DimensionError);
  m.noise_var = 0.0;
  CHECK_THROWS_AS(fagp_posterior(ds, Matrix::Zero(2, 2), m, Backend::serial()), UsageError);
  m.noise_var = 0.01;
  m.n_eigen = 200;
  FagpOptions opt;
  opt.mercer.budget = SizeBudget{kMiB};
  CHECK_THROWS_AS(fagp_posterior(ds, Matrix::Zero(2, 2), m, Backend::serial(), opt), ResourceError);
}
