#include <immintrin.h>

#include <algorithm>

#include "kernels_impl.hpp"

namespace adaptsplit::kernels {

namespace {

// Tails fall through to the same expressions as the scalar reference.

void div_scalar_by(double numerator, const double* den, double* out, std::size_t n) {
  const __m256d num = _mm256_set1_pd(numerator);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_div_pd(num, _mm256_loadu_pd(den + i)));
  for (; i < n; ++i) out[i] = numerator / den[i];
}

void link_times(double bits, const double* bw, const double* lat, double* out, std::size_t n) {
  const __m256d vbits = _mm256_set1_pd(bits);
  const __m256d mega = _mm256_set1_pd(1e6);
  const __m256d thousand = _mm256_set1_pd(1000.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ser = _mm256_div_pd(vbits, _mm256_mul_pd(_mm256_loadu_pd(bw + i), mega));
    const __m256d prop = _mm256_div_pd(_mm256_loadu_pd(lat + i), thousand);
    _mm256_storeu_pd(out + i, _mm256_add_pd(ser, prop));
  }
  for (; i < n; ++i) out[i] = bits / (bw[i] * 1e6) + lat[i] / 1000.0;
}

void projected_util(const double* bg, const double* load, const double* eff, double rate, double* out,
                    std::size_t n) {
  const __m256d vrate = _mm256_set1_pd(rate);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d fg = _mm256_div_pd(_mm256_mul_pd(_mm256_loadu_pd(load + i), vrate), _mm256_loadu_pd(eff + i));
    const __m256d u = _mm256_add_pd(_mm256_loadu_pd(bg + i), fg);
    // min_pd(u, one) returns `one` when u is NaN, matching std::min(1.0, u).
    _mm256_storeu_pd(out + i, _mm256_min_pd(u, one));
  }
  for (; i < n; ++i) out[i] = std::min(1.0, bg[i] + (load[i] * rate) / eff[i]);
}

std::size_t count_at_most(const double* samples, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d le = _mm256_cmp_pd(_mm256_loadu_pd(samples + i), t, _CMP_LE_OQ);
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(le))));
  }
  for (; i < n; ++i) count += samples[i] <= threshold ? 1 : 0;
  return count;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", div_scalar_by, link_times, projected_util, count_at_most};
  return table;
}

}  // namespace adaptsplit::kernels
