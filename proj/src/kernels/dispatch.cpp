#include <cstdlib>
#include <string_view>

#include "eshelby/kernels/kernels.hpp"

namespace eshelby::kernels {

const KernelTable& active() noexcept {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("ESHELBY_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
    if (const KernelTable* t = avx2_table()) return t;
    if (const KernelTable* t = neon_table()) return t;
    return &scalar_table();
  }();
  return *chosen;
}

}  // namespace eshelby::kernels
