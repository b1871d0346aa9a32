#include "wharm/simd.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace wharm::simd {

bool cpu_has_avx2() {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Isa select_isa() {
  const char* env = std::getenv("WHARM_SIMD");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& kernels_for(Isa isa) {
  if (isa == Isa::Scalar) return detail::scalar_table;
  if (!cpu_has_avx2()) throw std::runtime_error("AVX2/FMA not supported on this CPU");
  return detail::avx2_table;
}

const KernelTable& kernels() {
  static const KernelTable& table = kernels_for(active_isa());
  return table;
}

}  // namespace wharm::simd
