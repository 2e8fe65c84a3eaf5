#include "fagp/budget.hpp"

#include <limits>
#include <string>

#include "fagp/errors.hpp"

namespace fagp {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) noexcept {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) noexcept {
  return (b > kSaturated - a) ? kSaturated : a + b;
}

}  // namespace

std::optional<std::uint64_t> checked_pow(std::uint64_t n, std::uint64_t p) noexcept {
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < p; ++i) {
    if (n != 0 && result > kSaturated / n) return std::nullopt;
    result *= n;
  }
  return result;
}

std::uint64_t SizeBudget::estimate_bytes(std::uint64_t samples, std::uint64_t n, std::uint64_t p) noexcept {
  const auto features = checked_pow(n, p);
  if (!features) return kSaturated;
  const std::uint64_t f = *features;
  std::uint64_t doubles = sat_mul(samples, f);
  doubles = sat_add(doubles, sat_mul(f, f));
  doubles = sat_add(doubles, sat_mul(2, f));
  return sat_mul(8, doubles);
}

void SizeBudget::require(std::uint64_t samples, std::uint64_t n, std::uint64_t p) const {
  const std::uint64_t bytes = estimate_bytes(samples, n, p);
  if (bytes <= cap_bytes) return;
  const auto features = checked_pow(n, p);
  const std::uint64_t f = features.value_or(kSaturated);
  std::string count = features ? std::to_string(f) : std::string("> 2^64");
  throw ResourceError("size budget exceeded: n^p = " + std::to_string(n) + "^" + std::to_string(p) + " = " +
                          count + " features with N = " + std::to_string(samples) + " needs ~" +
                          std::to_string(bytes) + " bytes, cap is " + std::to_string(cap_bytes) + " bytes",
                      f, bytes);
}

}  // namespace fagp
