#include <cmath>

#include "eshelby/kernels/kernels.hpp"

namespace eshelby::kernels {

namespace {

void uniaxial_map(std::span<const double> axial, std::span<const double> lateral,
                  double sigma_abs, double nu_sign, std::span<double> ym, std::span<double> pr) {
  for (std::size_t i = 0; i < axial.size(); ++i) {
    ym[i] = sigma_abs / std::abs(axial[i]);
    pr[i] = nu_sign * lateral[i] / axial[i];
  }
}

MaskedMoments masked_moments(std::span<const double> values, std::span<const std::uint8_t> mask) {
  double sum[4] = {0.0, 0.0, 0.0, 0.0};
  double sq[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t count = 0;
  const std::size_t n = values.size();
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double v = mask[i + l] ? values[i + l] : 0.0;
      sum[l] += v;
      sq[l] += v * v;
      count += mask[i + l] != 0;
    }
  }
  MaskedMoments m;
  m.sum = (sum[0] + sum[1]) + (sum[2] + sum[3]);
  m.sum_sq = (sq[0] + sq[1]) + (sq[2] + sq[3]);
  for (std::size_t i = body; i < n; ++i) {
    if (!mask[i]) continue;
    m.sum += values[i];
    m.sum_sq += values[i] * values[i];
    ++count;
  }
  m.count = count;
  return m;
}

double masked_sq_diff(std::span<const double> a, std::span<const double> b,
                      std::span<const std::uint8_t> mask) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = a.size();
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    for (std::size_t l = 0; l < 4; ++l) {
      const double d = a[i + l] - b[i + l];
      acc[l] += mask[i + l] ? d * d : 0.0;
    }
  }
  double total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (std::size_t i = body; i < n; ++i) {
    if (!mask[i]) continue;
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar", &uniaxial_map, &masked_moments, &masked_sq_diff};
  return table;
}

}  // namespace eshelby::kernels
