#include <cassert>
#include <cstdlib>
#include <string_view>

#include "adaptsplit/kernels.hpp"
#include "kernels_impl.hpp"

namespace adaptsplit::kernels {

const KernelTable* avx2() {
#if defined(ADAPTSPLIT_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon() {
#if defined(ADAPTSPLIT_HAVE_NEON)
  return &neon_table();  // mandatory on aarch64
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() {
  const char* forced = std::getenv("ADAPTSPLIT_KERNELS");
  const std::string_view want = forced ? forced : "auto";
  if (want == "scalar") return scalar();
  if (want == "avx2") return avx2() ? *avx2() : scalar();
  if (want == "neon") return neon() ? *neon() : scalar();
  if (const auto* t = avx2()) return *t;
  if (const auto* t = neon()) return *t;
  return scalar();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

void div_scalar_by(double numerator, std::span<const double> denominators, std::span<double> out) {
  assert(out.size() >= denominators.size());
  active().div_scalar_by(numerator, denominators.data(), out.data(), denominators.size());
}

void link_times(double bits, std::span<const double> bandwidth_mbps, std::span<const double> latency_ms,
                std::span<double> out) {
  assert(latency_ms.size() == bandwidth_mbps.size() && out.size() >= bandwidth_mbps.size());
  active().link_times(bits, bandwidth_mbps.data(), latency_ms.data(), out.data(), bandwidth_mbps.size());
}

void projected_util(std::span<const double> bg, std::span<const double> load, std::span<const double> eff_speed,
                    double rate, std::span<double> out) {
  assert(load.size() == bg.size() && eff_speed.size() == bg.size() && out.size() >= bg.size());
  active().projected_util(bg.data(), load.data(), eff_speed.data(), rate, out.data(), bg.size());
}

std::size_t count_at_most(std::span<const double> samples, double threshold) {
  return active().count_at_most(samples.data(), samples.size(), threshold);
}

}  // namespace adaptsplit::kernels
