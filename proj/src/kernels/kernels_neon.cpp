#include <arm_neon.h>

#include <algorithm>

#include "kernels_impl.hpp"

namespace adaptsplit::kernels {

namespace {

void div_scalar_by(double numerator, const double* den, double* out, std::size_t n) {
  const float64x2_t num = vdupq_n_f64(numerator);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vdivq_f64(num, vld1q_f64(den + i)));
  for (; i < n; ++i) out[i] = numerator / den[i];
}

void link_times(double bits, const double* bw, const double* lat, double* out, std::size_t n) {
  const float64x2_t vbits = vdupq_n_f64(bits);
  const float64x2_t mega = vdupq_n_f64(1e6);
  const float64x2_t thousand = vdupq_n_f64(1000.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t ser = vdivq_f64(vbits, vmulq_f64(vld1q_f64(bw + i), mega));
    const float64x2_t prop = vdivq_f64(vld1q_f64(lat + i), thousand);
    vst1q_f64(out + i, vaddq_f64(ser, prop));
  }
  for (; i < n; ++i) out[i] = bits / (bw[i] * 1e6) + lat[i] / 1000.0;
}

void projected_util(const double* bg, const double* load, const double* eff, double rate, double* out,
                    std::size_t n) {
  const float64x2_t vrate = vdupq_n_f64(rate);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t fg = vdivq_f64(vmulq_f64(vld1q_f64(load + i), vrate), vld1q_f64(eff + i));
    const float64x2_t u = vaddq_f64(vld1q_f64(bg + i), fg);
    // Select u only where u < 1, so NaN maps to 1 like std::min(1.0, u).
    vst1q_f64(out + i, vbslq_f64(vcltq_f64(u, one), u, one));
  }
  for (; i < n; ++i) out[i] = std::min(1.0, bg[i] + (load[i] * rate) / eff[i]);
}

std::size_t count_at_most(const double* samples, std::size_t n, double threshold) {
  const float64x2_t t = vdupq_n_f64(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t le = vcleq_f64(vld1q_f64(samples + i), t);
    count += static_cast<std::size_t>((vgetq_lane_u64(le, 0) & 1) + (vgetq_lane_u64(le, 1) & 1));
  }
  for (; i < n; ++i) count += samples[i] <= threshold ? 1 : 0;
  return count;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{"neon", div_scalar_by, link_times, projected_util, count_at_most};
  return table;
}

}  // namespace adaptsplit::kernels
