// Built with -mavx2 and without FMA contraction so results match the scalar
// reference bit for bit.

#include "eshelby/kernels/kernels.hpp"

#if defined(ESHELBY_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace eshelby::kernels {

namespace {

// Four mask bytes widened to an all-ones / all-zeros 64-bit lane mask.
inline __m256d lane_mask(const std::uint8_t* m) {
  std::int32_t packed;
  std::memcpy(&packed, m, sizeof(packed));
  const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(packed));
  const __m256i set = _mm256_cmpgt_epi64(wide, _mm256_setzero_si256());
  return _mm256_castsi256_pd(set);
}

inline double combine(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void uniaxial_map(std::span<const double> axial, std::span<const double> lateral,
                  double sigma_abs, double nu_sign, std::span<double> ym, std::span<double> pr) {
  const std::size_t n = axial.size();
  const std::size_t body = n - n % 4;
  const __m256d sigma = _mm256_set1_pd(sigma_abs);
  const __m256d sign = _mm256_set1_pd(nu_sign);
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d ax = _mm256_loadu_pd(axial.data() + i);
    const __m256d lat = _mm256_loadu_pd(lateral.data() + i);
    _mm256_storeu_pd(ym.data() + i, _mm256_div_pd(sigma, _mm256_and_pd(ax, abs_mask)));
    _mm256_storeu_pd(pr.data() + i, _mm256_div_pd(_mm256_mul_pd(sign, lat), ax));
  }
  for (std::size_t i = body; i < n; ++i) {
    ym[i] = sigma_abs / std::abs(axial[i]);
    pr[i] = nu_sign * lateral[i] / axial[i];
  }
}

MaskedMoments masked_moments(std::span<const double> values, std::span<const std::uint8_t> mask) {
  const std::size_t n = values.size();
  const std::size_t body = n - n % 4;
  __m256d sum = _mm256_setzero_pd();
  __m256d sq = _mm256_setzero_pd();
  std::size_t count = 0;
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d m = lane_mask(mask.data() + i);
    const __m256d v = _mm256_and_pd(_mm256_loadu_pd(values.data() + i), m);
    sum = _mm256_add_pd(sum, v);
    sq = _mm256_add_pd(sq, _mm256_mul_pd(v, v));
    count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(m)));
  }
  MaskedMoments out;
  out.sum = combine(sum);
  out.sum_sq = combine(sq);
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
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d m = lane_mask(mask.data() + i);
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_mul_pd(d, d), m));
  }
  double total = combine(acc);
  for (std::size_t i = body; i < n; ++i) {
    if (!mask[i]) continue;
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace

const KernelTable* avx2_table() noexcept {
  static const KernelTable table{"avx2", &uniaxial_map, &masked_moments, &masked_sq_diff};
  return __builtin_cpu_supports("avx2") ? &table : nullptr;
}

}  // namespace eshelby::kernels

#else

namespace eshelby::kernels {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace eshelby::kernels

#endif
