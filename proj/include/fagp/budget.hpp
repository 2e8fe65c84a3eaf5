#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace fagp {

inline constexpr std::uint64_t kGiB = std::uint64_t{1} << 30;
inline constexpr std::uint64_t kMiB = std::uint64_t{1} << 20;

// n^p, or nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> checked_pow(std::uint64_t n, std::uint64_t p) noexcept;

// Memory cap for the tensor-product feature space. The estimate counts the
// N x n^p feature matrix, the n^p x n^p system and two length-n^p vectors,
// all as doubles.
struct SizeBudget {
  std::uint64_t cap_bytes = 8 * kGiB;

  // 8 * (N * n^p + n^(2p) + 2 * n^p), saturating at UINT64_MAX.
  static std::uint64_t estimate_bytes(std::uint64_t samples, std::uint64_t n, std::uint64_t p) noexcept;

  bool admits(std::uint64_t samples, std::uint64_t n, std::uint64_t p) const noexcept {
    return estimate_bytes(samples, n, p) <= cap_bytes;
  }

  // Throws ResourceError naming n^p and the estimate when over the cap.
  void require(std::uint64_t samples, std::uint64_t n, std::uint64_t p) const;
};

}  // namespace fagp
