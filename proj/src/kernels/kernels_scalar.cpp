#include <algorithm>

#include "adaptsplit/kernels.hpp"
#include "kernels_impl.hpp"

namespace adaptsplit::kernels {

namespace scalar_impl {

void div_scalar_by(double numerator, const double* den, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = numerator / den[i];
}

void link_times(double bits, const double* bw, const double* lat, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = bits / (bw[i] * 1e6) + lat[i] / 1000.0;
}

void projected_util(const double* bg, const double* load, const double* eff, double rate, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(1.0, bg[i] + (load[i] * rate) / eff[i]);
}

std::size_t count_at_most(const double* samples, std::size_t n, double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += samples[i] <= threshold ? 1 : 0;
  return count;
}

}  // namespace scalar_impl

const KernelTable& scalar() {
  static const KernelTable table{"scalar", scalar_impl::div_scalar_by, scalar_impl::link_times,
                                 scalar_impl::projected_util, scalar_impl::count_at_most};
  return table;
}

}  // namespace adaptsplit::kernels
