#include <atomic>
#include <cstdlib>
#include <string_view>

#include "nufocus/kernels/kernels.hpp"

namespace nufocus::kernels {

#ifndef NUFOCUS_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "scalar";
}

bool cpu_has_avx2() {
#if defined(NUFOCUS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

const KernelTable* initial_choice() {
  const char* env = std::getenv("NUFOCUS_SIMD");
  const std::string_view want = env ? env : "auto";
  if (want == "scalar") return &scalar_kernels();
  if (avx2_kernels() && cpu_has_avx2()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_choice()};
  return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) {
  if (isa == Isa::scalar) {
    current().store(&scalar_kernels(), std::memory_order_release);
    return true;
  }
  if (!avx2_kernels() || !cpu_has_avx2()) return false;
  current().store(avx2_kernels(), std::memory_order_release);
  return true;
}

}  // namespace nufocus::kernels
