#pragma once

// Data-parallel inner loops of the cost tables and metrics. Each kernel has a
// scalar reference implementation; SIMD variants must return bit-identical
// results and are selected once at startup from the running CPU.
//
// ADAPTSPLIT_KERNELS=scalar|avx2|neon forces a variant (falls back to scalar
// when the requested one is unavailable).

#include <cstddef>
#include <span>
#include <string_view>

namespace adaptsplit::kernels {

struct KernelTable {
  std::string_view name;

  /// out[i] = numerator / denominators[i]
  void (*div_scalar_by)(double numerator, const double* denominators, double* out, std::size_t n);

  /// out[i] = bits / (bandwidth_mbps[i] * 1e6) + latency_ms[i] / 1000
  void (*link_times)(double bits, const double* bandwidth_mbps, const double* latency_ms, double* out,
                     std::size_t n);

  /// out[i] = min(1, bg[i] + (load[i] * rate) / eff_speed[i])
  void (*projected_util)(const double* bg, const double* load, const double* eff_speed, double rate, double* out,
                         std::size_t n);

  /// Number of samples <= threshold.
  std::size_t (*count_at_most)(const double* samples, std::size_t n, double threshold);
};

const KernelTable& scalar();
/// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2();
const KernelTable* neon();

/// The variant chosen for this process.
const KernelTable& active();

// Convenience wrappers over active().
void div_scalar_by(double numerator, std::span<const double> denominators, std::span<double> out);
void link_times(double bits, std::span<const double> bandwidth_mbps, std::span<const double> latency_ms,
                std::span<double> out);
void projected_util(std::span<const double> bg, std::span<const double> load, std::span<const double> eff_speed,
                    double rate, std::span<double> out);
std::size_t count_at_most(std::span<const double> samples, double threshold);

}  // namespace adaptsplit::kernels
