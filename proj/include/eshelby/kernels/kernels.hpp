#pragma once

// Data-parallel grid kernels with a scalar reference and vector variants
// chosen at runtime. Reductions accumulate in four interleaved lanes
// combined as (l0 + l1) + (l2 + l3), followed by the tail in order, so every
// variant returns bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace eshelby::kernels {

struct MaskedMoments {
  std::size_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

struct KernelTable {
  std::string_view name;

  /// ym[i] = sigma_abs / |axial[i]|, pr[i] = nu_sign * lateral[i] / axial[i].
  void (*uniaxial_map)(std::span<const double> axial, std::span<const double> lateral,
                       double sigma_abs, double nu_sign, std::span<double> ym,
                       std::span<double> pr);

  /// Count, sum and sum of squares of values where mask != 0.
  MaskedMoments (*masked_moments)(std::span<const double> values,
                                  std::span<const std::uint8_t> mask);

  /// Sum of (a - b)^2 over mask != 0.
  double (*masked_sq_diff)(std::span<const double> a, std::span<const double> b,
                           std::span<const std::uint8_t> mask);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when not compiled in or not supported by the running CPU.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

/// Best supported table. ESHELBY_KERNELS=scalar forces the reference path.
const KernelTable& active() noexcept;

}  // namespace eshelby::kernels
