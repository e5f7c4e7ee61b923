#pragma once

#include "adaptsplit/kernels.hpp"

namespace adaptsplit::kernels {

// Defined in the per-ISA translation units; the table is only handed out
// after the CPU check in dispatch.cpp.
const KernelTable& avx2_table();
const KernelTable& neon_table();

}  // namespace adaptsplit::kernels
