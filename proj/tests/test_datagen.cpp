#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fagp/datagen.hpp"
#include "fagp/errors.hpp"

using namespace fagp;

namespace {

std::string to_csv(const Dataset& ds) {
  std::ostringstream out;
  write_csv(ds, out);
  return out.str();
}

int parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    (void)read_csv(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("benchmark function examples") {
  const double origin[] = {0.0, 0.0, 0.0};
  CHECK(benchmark_function(origin) == 3.0);
  const double half_turn[] = {std::numbers::pi, 0.0};
  CHECK(std::abs(benchmark_function(half_turn)) < 1e-15);
}

TEST_CASE("noise-free generation is the benchmark function") {
  const Dataset ds = generate(50, 2, 4, 0.0, Interval{});
  for (Eigen::Index i = 0; i < 50; ++i) {
    CHECK(ds.y[i] == std::cos(ds.x(i, 0)) + std::cos(ds.x(i, 1)));
  }
}

TEST_CASE("generation is deterministic and byte-identical") {
  const Dataset a = generate(10, 3, 42);
  const Dataset b = generate(10, 3, 42);
  const Dataset c = generate(10, 3, 43);
  CHECK(to_csv(a) == to_csv(b));
  CHECK(to_csv(a) != to_csv(c));
  CHECK(a.x.rows() == 10);
  CHECK(to_csv(a).rfind("x1,x2,x3,y\n", 0) == 0);
  // Prefix stability: the first rows do not depend on N.
  const Dataset longer = generate(20, 3, 42);
  CHECK(longer.x.topRows(10) == a.x);
  CHECK(longer.y.head(10) == a.y);
}

TEST_CASE("csv round trip is bit exact") {
  const Dataset ds = generate(200, 4, 7, 0.3, Interval{-2.5, 3.0});
  std::istringstream in(to_csv(ds));
  const Dataset back = read_csv(in);
  CHECK(back.x == ds.x);
  CHECK(back.y == ds.y);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("csv parse errors carry line numbers") {
  CHECK(parse_error_line("") == 0);
  CHECK(parse_error_line("x1,y\n") == 1);
  CHECK(parse_error_line("a,b\n1,2\n") == 1);
  CHECK(parse_error_line("x1,y\n1,2\n3\n") == 3);
  CHECK(parse_error_line("x1,y\n1,2\n3,4\n5,abc\n") == 4);
  CHECK(parse_error_line("x1,x2,y\n1,2,3,4\n") == 2);
  CHECK(parse_error_line("x1,y\n1,2\n") == -1);
  std::istringstream in("x1,y\n1,2\n\n");
  CHECK(read_csv(in).size() == 1);
}

TEST_CASE("noise statistics") {
  const double sigma = 0.1;
  const Dataset noisy = generate(100000, 1, 99, sigma, Interval{});
  const Dataset clean = generate(100000, 1, 99, 0.0, Interval{});
  CHECK(noisy.x == clean.x);
  const Vector e = noisy.y - clean.y;
  const double mean = e.mean();
  const double sd = std::sqrt((e.array() - mean).square().sum() / (e.size() - 1));
  CHECK(std::abs(mean) < 0.002);
  CHECK(std::abs(sd - sigma) < 0.005);
}

TEST_CASE("inputs stay inside the domain") {
  const std::vector<Interval> domain{{-1.0, 1.0}, {2.0, 5.0}, {0.5, 0.5}};
  const Dataset ds = generate(5000, 3, 17, 0.05, domain);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (int d = 0; d < 3; ++d) REQUIRE(domain[d].contains(ds.x(i, d)));
  }
  CHECK(ds.x.col(2).isConstant(0.5));
  const Matrix pts = uniform_points(1000, domain, 17);
  CHECK(pts.rows() == 1000);
  CHECK(pts.col(1).minCoeff() >= 2.0);
  CHECK(pts != ds.x.topRows(1000));
}

TEST_CASE("generation rejects bad arguments") {
  CHECK_THROWS_AS(generate(10, 1, 1, 0.05, Interval{1.0, -1.0}), UsageError);
  CHECK_THROWS_AS(generate(10, 0, 1), UsageError);
  CHECK_THROWS_AS(generate(0, 1, 1), UsageError);
  CHECK_THROWS_AS(generate(10, 1, 1, -0.1), UsageError);
  CHECK_THROWS_AS(generate(10, 2, 1, 0.05, std::vector<Interval>{{-1, 1}}), DimensionError);
}

TEST_CASE("rng streams") {
  const CounterRng a(5, 1);
  const CounterRng b(5, 2);
  CHECK(a.bits(0) != b.bits(0));
  CHECK(a.bits(17) == CounterRng(5, 1).bits(17));
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double u = a.uniform(k);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(std::isfinite(a.normal(k)));
  }
}

TEST_CASE("dataset file naming") {
  CHECK(dataset_file_name(10000, 2, 3) == "train_N10000_p2_seed3.csv");
}
