#include <atomic>

#include "cirptc/simd.hpp"
#include "kernels_internal.hpp"

namespace cirptc::simd {
namespace {

bool cpu_has_avx2_fma() {
#if defined(CIRPTC_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Level level) {
  if (level == Level::avx2) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{table_for(detected_level())};
  return slot;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(CIRPTC_HAVE_AVX2_KERNELS)
  static const bool supported = cpu_has_avx2_fma();
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

Level detected_level() { return avx2_kernels() != nullptr ? Level::avx2 : Level::scalar; }

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

Level set_level(Level level) {
  const KernelTable* t = table_for(level);
  if (t == nullptr) t = &scalar_kernels();
  active_slot().store(t, std::memory_order_release);
  return t->level;
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::scalar:
      return "scalar";
    case Level::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace cirptc::simd
