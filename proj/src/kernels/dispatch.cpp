#include <cstdlib>
#include <cstring>

#include "cdxstats/kernels.hpp"

namespace cdxstats::kernels {

const Ops* avx2_ops_impl();
const Ops* neon_ops_impl();

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return avx2_ops_impl();
#else
  return nullptr;
#endif
}

const Ops* neon_ops() { return neon_ops_impl(); }

namespace {

const Ops& select_ops() {
  const char* force = std::getenv("CDXSTATS_KERNELS");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return scalar_ops();
    if (std::strcmp(force, "avx2") == 0 && avx2_ops() != nullptr)
      return *avx2_ops();
    if (std::strcmp(force, "neon") == 0 && neon_ops() != nullptr)
      return *neon_ops();
  }
  if (const Ops* ops = avx2_ops()) return *ops;
  if (const Ops* ops = neon_ops()) return *ops;
  return scalar_ops();
}

}  // namespace

const Ops& active_ops() {
  static const Ops& ops = select_ops();
  return ops;
}

}  // namespace cdxstats::kernels
