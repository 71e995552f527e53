#pragma once

#include "cirptc/simd.hpp"

namespace cirptc::simd::detail {

#if defined(CIRPTC_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table();
#endif

}  // namespace cirptc::simd::detail
