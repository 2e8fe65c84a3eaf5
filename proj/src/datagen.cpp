#include "fagp/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string_view>

#include "fagp/errors.hpp"

namespace fagp {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = strip(field);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError("non-numeric field '" + std::string(field) + "'", line);
  }
  return value;
}

// Parsed header: number of input columns and whether a y column follows.
struct Header {
  int dims = 0;
  bool has_target = false;
};

Header parse_header(std::string_view line, std::size_t line_no, bool target_required) {
  const auto fields = split_fields(line);
  Header h;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string_view f = strip(fields[i]);
    if (f == "x" + std::to_string(i + 1)) {
      if (h.has_target) break;
      ++h.dims;
      continue;
    }
    if (f == "y" && i + 1 == fields.size()) {
      h.has_target = true;
      continue;
    }
    throw ParseError("malformed header: unexpected column '" + std::string(f) + "'", line_no);
  }
  if (h.dims == 0) throw ParseError("malformed header: no x1 column", line_no);
  if (target_required && !h.has_target) throw ParseError("malformed header: missing y column", line_no);
  return h;
}

struct Table {
  Header header;
  std::vector<double> values;
  std::size_t rows = 0;
};

Table read_table(std::istream& in, bool target_required) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = strip(line);
    if (view.empty()) continue;
    if (!have_header) {
      t.header = parse_header(view, line_no, target_required);
      have_header = true;
      continue;
    }
    const auto fields = split_fields(view);
    const std::size_t expected = static_cast<std::size_t>(t.header.dims) + (t.header.has_target ? 1 : 0);
    if (fields.size() != expected) {
      throw ParseError("ragged row: expected " + std::to_string(expected) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (const auto f : fields) t.values.push_back(parse_number(f, line_no));
    ++t.rows;
  }
  if (!have_header) throw ParseError("empty input", 0);
  if (t.rows == 0) throw ParseError("no samples after header (N must be >= 1)", line_no);
  return t;
}

}  // namespace

void Interval::validate() const {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw UsageError("invalid domain [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
}

void Dataset::validate() const {
  if (x.rows() < 1) throw UsageError("dataset must hold at least one sample");
  if (y.size() != x.rows()) throw DimensionError("dataset targets do not match the number of samples");
  if (!y.allFinite()) throw UsageError("dataset targets must be finite");
  if (!domain.empty() && static_cast<Eigen::Index>(domain.size()) != x.cols()) {
    throw DimensionError("dataset domain does not match input dimension");
  }
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(mix64(seed ^ mix64(stream * kGolden + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  return mix64(key_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t k) const noexcept {
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = static_cast<double>((bits(2 * k) >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform(2 * k + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double benchmark_function(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) s += std::cos(v);
  return s;
}

Matrix uniform_points(std::int64_t samples, const std::vector<Interval>& domain, std::uint64_t seed,
                      Stream stream) {
  if (samples < 1) throw UsageError("sample count must be >= 1");
  if (domain.empty()) throw UsageError("domain needs at least one dimension");
  for (const auto& iv : domain) iv.validate();
  const auto p = static_cast<Eigen::Index>(domain.size());
  const CounterRng rng(seed, static_cast<std::uint64_t>(stream));
  Matrix x(samples, p);
  for (Eigen::Index i = 0; i < samples; ++i) {
    for (Eigen::Index d = 0; d < p; ++d) {
      const Interval& iv = domain[static_cast<std::size_t>(d)];
      const double u = rng.uniform(static_cast<std::uint64_t>(i * p + d));
      x(i, d) = iv.lo == iv.hi ? iv.lo : std::min(iv.hi, iv.lo + (iv.hi - iv.lo) * u);
    }
  }
  return x;
}

Dataset generate(std::int64_t samples, int dims, std::uint64_t seed, double noise_std,
                 const std::vector<Interval>& domain) {
  if (dims < 1) throw UsageError("dimension must be >= 1");
  if (static_cast<std::size_t>(dims) != domain.size()) {
    throw DimensionError("domain has " + std::to_string(domain.size()) + " intervals for " + std::to_string(dims) +
                         " dimensions");
  }
  if (!std::isfinite(noise_std) || noise_std < 0.0) throw UsageError("noise std must be finite and >= 0");

  Dataset ds;
  ds.x = uniform_points(samples, domain, seed, Stream::train_inputs);
  ds.noise_std = noise_std;
  ds.seed = seed;
  ds.domain = domain;
  ds.y.resize(samples);
  const CounterRng noise(seed, static_cast<std::uint64_t>(Stream::noise));
  for (Eigen::Index i = 0; i < samples; ++i) {
    const double f = benchmark_function(std::span<const double>(ds.x.row(i).data(), static_cast<std::size_t>(dims)));
    ds.y[i] = noise_std == 0.0 ? f : f + noise_std * noise.normal(static_cast<std::uint64_t>(i));
  }
  return ds;
}

Dataset generate(std::int64_t samples, int dims, std::uint64_t seed, double noise_std, Interval domain) {
  if (dims < 1) throw UsageError("dimension must be >= 1");
  return generate(samples, dims, seed, noise_std, std::vector<Interval>(static_cast<std::size_t>(dims), domain));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, std::ostream& out) {
  for (Eigen::Index d = 0; d < ds.dims(); ++d) out << 'x' << (d + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index d = 0; d < ds.dims(); ++d) out << format_double(ds.x(i, d)) << ',';
    out << format_double(ds.y[i]) << '\n';
  }
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(ds, out);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset read_csv(std::istream& in) {
  Table t = read_table(in, true);
  const int p = t.header.dims;
  const auto n = static_cast<Eigen::Index>(t.rows);
  Dataset ds;
  ds.x.resize(n, p);
  ds.y.resize(n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < p; ++d) ds.x(i, d) = t.values[k++];
    ds.y[i] = t.values[k++];
  }
  for (int d = 0; d < p; ++d) ds.domain.push_back({ds.x.col(d).minCoeff(), ds.x.col(d).maxCoeff()});
  if (!ds.y.allFinite()) throw ParseError("non-finite target value", 0);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_csv(in);
}

Matrix load_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Table t = read_table(in, false);
  const int p = t.header.dims;
  const int stride = p + (t.header.has_target ? 1 : 0);
  Matrix x(static_cast<Eigen::Index>(t.rows), p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int d = 0; d < p; ++d) x(i, d) = t.values[static_cast<std::size_t>(i * stride + d)];
  }
  return x;
}

std::string dataset_file_name(std::int64_t samples, int dims, std::uint64_t seed) {
  return "train_N" + std::to_string(samples) + "_p" + std::to_string(dims) + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace fagp
