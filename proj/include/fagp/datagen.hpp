#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fagp/matrix.hpp"

namespace fagp {

// Closed sampling interval. lo == hi is allowed and pins the coordinate.
struct Interval {
  double lo = -1.0;
  double hi = 1.0;

  void validate() const;
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct Dataset {
  Matrix x;  // N x p
  Vector y;  // N
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::vector<Interval> domain;  // one per dimension

  Eigen::Index size() const noexcept { return x.rows(); }
  Eigen::Index dims() const noexcept { return x.cols(); }
  void validate() const;
};

// Counter-based generator: the k-th draw of a stream depends only on
// (seed, stream, k). Uses the SplitMix64 finalizer as the mixing function.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept;
  // Standard normal from counters 2k and 2k + 1 (Box-Muller, cosine branch).
  double normal(std::uint64_t k) const noexcept;

 private:
  std::uint64_t key_;
};

// Streams used by the generator; kept distinct so inputs, noise and test
// points never share draws.
enum class Stream : std::uint64_t { train_inputs = 1, noise = 2, test_inputs = 3 };

inline constexpr double kDefaultNoiseStd = 0.05;

// Benchmark function: y = sum_d cos(x_d) + noise.
double benchmark_function(std::span<const double> x) noexcept;

Dataset generate(std::int64_t samples, int dims, std::uint64_t seed, double noise_std,
                 const std::vector<Interval>& domain);
Dataset generate(std::int64_t samples, int dims, std::uint64_t seed, double noise_std = kDefaultNoiseStd,
                 Interval domain = {});

// Uniform points on the domain, e.g. a test set.
Matrix uniform_points(std::int64_t samples, const std::vector<Interval>& domain, std::uint64_t seed,
                      Stream stream = Stream::test_inputs);

// "x1,...,xp,y" CSV with 17 significant digits.
void write_csv(const Dataset& ds, std::ostream& out);
void save_csv(const Dataset& ds, const std::filesystem::path& path);

// Parses the CSV written by write_csv. Throws ParseError with the offending
// line number (0 for an empty input).
Dataset read_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);

// Input-only CSV "x1,...,xp" (a trailing y column is accepted and ignored).
Matrix load_points_csv(const std::filesystem::path& path);

// train_N{N}_p{p}_seed{S}.csv
std::string dataset_file_name(std::int64_t samples, int dims, std::uint64_t seed);

// 17 significant digits; parses back to the same double.
std::string format_double(double v);

}  // namespace fagp
