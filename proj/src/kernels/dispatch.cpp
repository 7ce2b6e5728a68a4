#include <atomic>
#include <cstdlib>
#include <string_view>

#include "qos/kernels.hpp"

namespace qos::kernels {

#ifndef QOS_HAVE_AVX2
const Table* avx2_table() { return nullptr; }
#endif
#ifndef QOS_HAVE_NEON
const Table* neon_table() { return nullptr; }
#endif

namespace {

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &scalar_table();
    case Isa::avx2: return avx2_table();
    case Isa::neon: return neon_table();
  }
  return nullptr;
}

const Table* pick_default() {
  if (const char* env = std::getenv("QOS_SIMD")) {
    const std::string_view want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == name(isa) && table_for(isa) && cpu_supports(isa)) return table_for(isa);
    }
  }
  if (avx2_table() && cpu_supports(Isa::avx2)) return avx2_table();
  if (neon_table() && cpu_supports(Isa::neon)) return neon_table();
  return &scalar_table();
}

std::atomic<const Table*> g_active{nullptr};

}  // namespace

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table& active() {
  const Table* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    const Table* chosen = pick_default();
    const Table* expected = nullptr;
    g_active.compare_exchange_strong(expected, chosen, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

bool force(Isa isa) {
  const Table* t = table_for(isa);
  if (!t || !cpu_supports(isa)) return false;
  g_active.store(t, std::memory_order_release);
  return true;
}

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

}  // namespace qos::kernels
