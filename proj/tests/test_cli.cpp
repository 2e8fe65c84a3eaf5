#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fagp_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run fagp(const std::string& args) {
  const fs::path dir = scratch("io");
  const std::string cmd = std::string(FAGP_CLI) + " " + args + " >" + (dir / "out").string() + " 2>" +
                          (dir / "err").string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "out");
  r.err = slurp(dir / "err");
  return r;
}

int count_lines(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("generate writes deterministic files") {
  const fs::path a = scratch("gen_a");
  const fs::path b = scratch("gen_b");
  REQUIRE(fagp("generate --n-samples 10 --dim 1,2 --seed 3 --out-dir " + a.string()).code == 0);
  REQUIRE(fagp("generate --n-samples 10 --dim 1,2 --seed 3 --out-dir " + b.string()).code == 0);
  for (const char* name : {"train_N10_p1_seed3.csv", "train_N10_p2_seed3.csv"}) {
    const std::string text = slurp(a / name);
    CHECK(count_lines(text) == 11);
    CHECK(text == slurp(b / name));
  }
  CHECK(slurp(a / "train_N10_p2_seed3.csv").rfind("x1,x2,y\n", 0) == 0);
}

TEST_CASE("usage errors exit 1") {
  CHECK(fagp("generate --n-samples 10 --dim 0 --out-dir " + scratch("bad").string()).code == 1);
  CHECK(fagp("generate --domain 1,-1 --out-dir " + scratch("bad2").string()).code == 1);
  CHECK(fagp("no-such-command").code == 1);
  CHECK(fagp("--help").code == 0);
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "bad.cfg") << "bogus = 1\n";
  CHECK(fagp("bench --config " + (dir / "bad.cfg").string() + " --out " + (dir / "r.csv").string()).code == 1);
}

TEST_CASE("io errors exit 3") {
  const Run r = fagp("predict --train /nonexistent/train.csv --test /nonexistent/test.csv");
  CHECK(r.code == 3);
  const fs::path dir = scratch("ragged");
  std::ofstream(dir / "t.csv") << "x1,y\n1,2\n3\n";
  const Run p = fagp("predict --train " + (dir / "t.csv").string() + " --test " + (dir / "t.csv").string());
  CHECK(p.code == 3);
  CHECK(p.err.find("line 3") != std::string::npos);
}

TEST_CASE("bench then plotdata") {
  const fs::path dir = scratch("bench");
  const std::string results = (dir / "results.csv").string();
  const Run r = fagp("bench --quiet --n-samples 300 --n-test 50 --dims 1,2 --eigen-counts '1:4,8;2:3' --reps 2 "
                     "--backends serial,parallel --workers 2 --out " + results);
  REQUIRE(r.code == 0);
  // 2 backends x 3 (p, n) pairs x 2 reps x 4 phases
  CHECK(count_lines(slurp(results)) == 1 + 48);
  REQUIRE(fagp("plotdata " + results + " --out-dir " + dir.string()).code == 0);
  CHECK(count_lines(slurp(dir / "plot_p1.csv")) == 1 + 4);
  CHECK(count_lines(slurp(dir / "plot_p2.csv")) == 1 + 2);
}

TEST_CASE("predict matches the exact posterior") {
  const fs::path dir = scratch("predict");
  REQUIRE(fagp("generate --n-samples 100 --dim 1 --seed 5 --out-dir " + dir.string()).code == 0);
  const std::string train = (dir / "train_N100_p1_seed5.csv").string();
  const std::string low = (dir / "low.csv").string();
  const std::string exact = (dir / "exact.csv").string();
  REQUIRE(fagp("predict --train " + train + " --test " + train + " --n-eigen 25 --noise-var 0.0025 --cov --out " +
               low).code == 0);
  REQUIRE(fagp("predict --exact --train " + train + " --test " + train + " --noise-var 0.0025 --cov --out " + exact)
              .code == 0);
  std::istringstream a(slurp(low));
  std::istringstream b(slurp(exact));
  std::string la, lb;
  std::getline(a, la);
  std::getline(b, lb);
  CHECK(la == "x1,mean,var");
  CHECK(la == lb);
  int rows = 0;
  while (std::getline(a, la) && std::getline(b, lb)) {
    double xa, ma, va, xb, mb, vb;
    REQUIRE(std::sscanf(la.c_str(), "%lf,%lf,%lf", &xa, &ma, &va) == 3);
    REQUIRE(std::sscanf(lb.c_str(), "%lf,%lf,%lf", &xb, &mb, &vb) == 3);
    CHECK(xa == xb);
    CHECK(std::abs(ma - mb) < 1e-4);
    CHECK(std::abs(va - vb) < 1e-3);
    ++rows;
  }
  CHECK(rows == 100);
}

TEST_CASE("resource errors exit 4") {
  const fs::path dir = scratch("cap");
  REQUIRE(fagp("generate --n-samples 100 --dim 4 --seed 1 --out-dir " + dir.string()).code == 0);
  const std::string train = (dir / "train_N100_p4_seed1.csv").string();
  const Run r = fagp("predict --train " + train + " --test " + train + " --n-eigen 10 --memory-cap 1MiB --out " +
                     (dir / "o.csv").string());
  CHECK(r.code == 4);
  CHECK(r.err.find("10000") != std::string::npos);
}

TEST_CASE("verify exit codes") {
  const Run ok = fagp("verify --level fast");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  const Run bad = fagp("verify --level fast --inject-fault sign");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("oracle-equivalence") != std::string::npos);
}
