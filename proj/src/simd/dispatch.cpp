#include <cstdlib>
#include <cstring>

#include "dicr/simd/kernels.hpp"

namespace dicr::simd {

#if defined(DICR_HAVE_AVX2)
const KernelTable* avx2_compiled_kernels();
#endif

const KernelTable* avx2_kernels() {
#if defined(DICR_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? avx2_compiled_kernels() : nullptr;
#else
  return nullptr;
#endif
}

bool isa_available(Isa isa) {
  return isa == Isa::kScalar || avx2_kernels() != nullptr;
}

const KernelTable& kernels_for(Isa isa) {
  if (isa == Isa::kAvx2) {
    if (const auto* t = avx2_kernels()) return *t;
  }
  return scalar_kernels();
}

namespace {

const KernelTable& select() {
  const char* forced = std::getenv("DICR_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return scalar_kernels();
  return kernels_for(Isa::kAvx2);
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

}  // namespace dicr::simd
