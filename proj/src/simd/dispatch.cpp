#include <cstdlib>
#include <string_view>

#include "plidar/simd/kernels.hpp"

namespace plidar::simd {

#if defined(PLIDAR_HAVE_AVX2)
namespace avx2 {
extern const KernelTable table;
}
#endif
#if defined(PLIDAR_HAVE_NEON)
namespace neon {
extern const KernelTable table;
}
#endif

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return &scalar::table;
    case Isa::Avx2:
#if defined(PLIDAR_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2")) return &avx2::table;
#endif
      return nullptr;
    case Isa::Neon:
#if defined(PLIDAR_HAVE_NEON)
      return &neon::table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (table_for(isa)) out.push_back(isa);
  }
  return out;
}

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("PLIDAR_SIMD")) {
    const std::string_view want(env);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
      if (want == to_string(isa)) {
        const KernelTable* t = table_for(isa);
        return t ? *t : scalar::table;
      }
    }
  }
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (const KernelTable* t = table_for(isa)) return *t;
  }
  return scalar::table;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace plidar::simd
