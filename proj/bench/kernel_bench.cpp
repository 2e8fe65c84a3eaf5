// Serial vs parallel timings of the dense kernels on FAGP-shaped problems.
//
//   kernel_bench [workers] [reps]
//
// Prints one line per kernel and shape with the best-of-reps time for the
// reference loop (small shapes only), the serial backend and the parallel
// backend, plus the parallel speedup.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>

#include "fagp/backend.hpp"
#include "fagp/datagen.hpp"
#include "fagp/mercer.hpp"

using namespace fagp;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  const CounterRng rng(seed, 0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(static_cast<std::uint64_t>(i)) - 0.5;
  return m;
}

void report(const std::string& name, double reference, double serial, double parallel) {
  if (reference > 0.0) {
    std::printf("%-34s ref %9.4f s  serial %9.4f s  parallel %9.4f s  speedup %5.2fx\n", name.c_str(), reference,
                serial, parallel, serial / parallel);
  } else {
    std::printf("%-34s ref       --    serial %9.4f s  parallel %9.4f s  speedup %5.2fx\n", name.c_str(), serial,
                parallel, serial / parallel);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const Backend serial = Backend::serial();
  const Backend parallel = Backend::parallel(workers);
  std::printf("serial vs %s, best of %d\n", parallel.describe().c_str(), reps);

  // Phi^T Phi for N = 10000 and growing feature counts.
  for (Eigen::Index features : {16, 81, 256, 625}) {
    const Matrix phi = random_matrix(10000, features, 1);
    const double ref = features <= 81 ? best_of(1, [&] { (void)gemm_reference(phi, Op::transpose, phi, Op::none); }) : 0.0;
    const double s = best_of(reps, [&] { (void)crossprod(serial, phi); });
    const double p = best_of(reps, [&] { (void)crossprod(parallel, phi); });
    report("crossprod N=10000 F=" + std::to_string(features), ref, s, p);
  }

  for (Eigen::Index size : {200, 500}) {
    const Matrix a = random_matrix(size, size, 2);
    const Matrix b = random_matrix(size, size, 3);
    const double ref = best_of(1, [&] { (void)gemm_reference(a, Op::none, b, Op::none); });
    const double s = best_of(reps, [&] { (void)gemm(serial, a, b); });
    const double p = best_of(reps, [&] { (void)gemm(parallel, a, b); });
    report("gemm " + std::to_string(size) + "^3", ref, s, p);
  }

  for (Eigen::Index size : {256, 625, 1296}) {
    const Matrix a = random_matrix(size, size, 4);
    Matrix spd = gemm(serial, a, Op::transpose, a, Op::none);
    spd.diagonal().array() += static_cast<double>(size);
    const double s = best_of(reps, [&] { (void)SpdFactor::factor(serial, spd); });
    const double p = best_of(reps, [&] { (void)SpdFactor::factor(parallel, spd); });
    report("cholesky " + std::to_string(size), 0.0, s, p);
  }

  for (auto [n, p] : {std::pair{64, 1}, {9, 2}, {5, 4}}) {
    const Dataset ds = generate(10000, p, 5, 0.05, Interval{});
    const auto params = ArdKernelParams::isotropic(p, 1.0, 1.0);
    const double s = best_of(reps, [&] { (void)eigensystem(ds.x, params, n, serial); });
    const double par = best_of(reps, [&] { (void)eigensystem(ds.x, params, n, parallel); });
    report("eigensystem N=10000 n=" + std::to_string(n) + " p=" + std::to_string(p), 0.0, s, par);
  }
  return 0;
}
