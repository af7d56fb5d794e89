#include <cstdlib>
#include <string_view>

#include "rflabel/kernels.hpp"

namespace rflabel::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool has = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
  }();
  return has;
#else
  return false;
#endif
}

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", &scalar::sum, &scalar::sum_sq_dev, &scalar::fold_scale,
                                 &scalar::iou_one_to_many};
  return table;
}

#if defined(RFLABEL_HAVE_AVX2)
const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", &avx2::sum, &avx2::sum_sq_dev, &avx2::fold_scale,
                                 &avx2::iou_one_to_many};
  return table;
}
#else
const KernelTable& avx2_table() { return scalar_table(); }
#endif

const KernelTable& active() {
  static const KernelTable& chosen = []() -> const KernelTable& {
    const char* env = std::getenv("RFLABEL_SIMD");
    const bool force_scalar = env != nullptr && std::string_view(env) == "scalar";
#if defined(RFLABEL_HAVE_AVX2)
    if (!force_scalar && cpu_has_avx2()) return avx2_table();
#else
    (void)force_scalar;
#endif
    return scalar_table();
  }();
  return chosen;
}

}  // namespace rflabel::kernels
