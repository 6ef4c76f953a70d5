#include "eshelby/kernels/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace eshelby::kernels {

namespace {

// Lanes 0-1 live in `lo`, lanes 2-3 in `hi`, matching the four-lane layout.
inline float64x2_t pair_mask(const std::uint8_t* m) {
  const uint64x2_t bits = {m[0] ? ~0ULL : 0ULL, m[1] ? ~0ULL : 0ULL};
  return vreinterpretq_f64_u64(bits);
}

inline float64x2_t masked(float64x2_t v, float64x2_t m) {
  return vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(v), vreinterpretq_u64_f64(m)));
}

void uniaxial_map(std::span<const double> axial, std::span<const double> lateral,
                  double sigma_abs, double nu_sign, std::span<double> ym, std::span<double> pr) {
  const std::size_t n = axial.size();
  const std::size_t body = n - n % 2;
  const float64x2_t sigma = vdupq_n_f64(sigma_abs);
  const float64x2_t sign = vdupq_n_f64(nu_sign);
  for (std::size_t i = 0; i < body; i += 2) {
    const float64x2_t ax = vld1q_f64(axial.data() + i);
    const float64x2_t lat = vld1q_f64(lateral.data() + i);
    vst1q_f64(ym.data() + i, vdivq_f64(sigma, vabsq_f64(ax)));
    vst1q_f64(pr.data() + i, vdivq_f64(vmulq_f64(sign, lat), ax));
  }
  for (std::size_t i = body; i < n; ++i) {
    ym[i] = sigma_abs / std::abs(axial[i]);
    pr[i] = nu_sign * lateral[i] / axial[i];
  }
}

MaskedMoments masked_moments(std::span<const double> values, std::span<const std::uint8_t> mask) {
  const std::size_t n = values.size();
  const std::size_t body = n - n % 4;
  float64x2_t sum_lo = vdupq_n_f64(0.0), sum_hi = vdupq_n_f64(0.0);
  float64x2_t sq_lo = vdupq_n_f64(0.0), sq_hi = vdupq_n_f64(0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < body; i += 4) {
    const float64x2_t lo = masked(vld1q_f64(values.data() + i), pair_mask(mask.data() + i));
    const float64x2_t hi = masked(vld1q_f64(values.data() + i + 2), pair_mask(mask.data() + i + 2));
    sum_lo = vaddq_f64(sum_lo, lo);
    sum_hi = vaddq_f64(sum_hi, hi);
    sq_lo = vaddq_f64(sq_lo, vmulq_f64(lo, lo));
    sq_hi = vaddq_f64(sq_hi, vmulq_f64(hi, hi));
    for (std::size_t l = 0; l < 4; ++l) count += mask[i + l] != 0;
  }
  MaskedMoments out;
  out.sum = (vgetq_lane_f64(sum_lo, 0) + vgetq_lane_f64(sum_lo, 1)) +
            (vgetq_lane_f64(sum_hi, 0) + vgetq_lane_f64(sum_hi, 1));
  out.sum_sq = (vgetq_lane_f64(sq_lo, 0) + vgetq_lane_f64(sq_lo, 1)) +
               (vgetq_lane_f64(sq_hi, 0) + vgetq_lane_f64(sq_hi, 1));
  for (std::size_t i = body; i < n; ++i) {
    if (!mask[i]) continue;
    out.sum += values[i];
    out.sum_sq += values[i] * values[i];
    ++count;
  }
  out.count = count;
  return out;
}

double masked_sq_diff(std::span<const double> a, std::span<const double> b,
                      std::span<const std::uint8_t> mask) {
  const std::size_t n = a.size();
  const std::size_t body = n - n % 4;
  float64x2_t acc_lo = vdupq_n_f64(0.0), acc_hi = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < body; i += 4) {
    const float64x2_t dlo = vsubq_f64(vld1q_f64(a.data() + i), vld1q_f64(b.data() + i));
    const float64x2_t dhi = vsubq_f64(vld1q_f64(a.data() + i + 2), vld1q_f64(b.data() + i + 2));
    acc_lo = vaddq_f64(acc_lo, masked(vmulq_f64(dlo, dlo), pair_mask(mask.data() + i)));
    acc_hi = vaddq_f64(acc_hi, masked(vmulq_f64(dhi, dhi), pair_mask(mask.data() + i + 2)));
  }
  double total = (vgetq_lane_f64(acc_lo, 0) + vgetq_lane_f64(acc_lo, 1)) +
                 (vgetq_lane_f64(acc_hi, 0) + vgetq_lane_f64(acc_hi, 1));
  for (std::size_t i = body; i < n; ++i) {
    if (!mask[i]) continue;
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace

const KernelTable* neon_table() noexcept {
  static const KernelTable table{"neon", &uniaxial_map, &masked_moments, &masked_sq_diff};
  return &table;
}

}  // namespace eshelby::kernels

#else

namespace eshelby::kernels {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace eshelby::kernels

#endif
