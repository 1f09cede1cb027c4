#include <atomic>
#include <cstdlib>
#include <string>

#include "asrk/errors.hpp"
#include "asrk/tensor/kernels.hpp"

namespace asrk::tensor::kernels {

#ifndef ASRK_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* detect() {
  const char* env = std::getenv("ASRK_KERNELS");
  const std::string choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_table();
  if (choice == "avx2") {
    if (!cpu_supports(Backend::avx2)) {
      throw Error(ErrorKind::config, "ASRK_KERNELS=avx2 but the CPU or build lacks AVX2");
    }
    return avx2_table();
  }
  if (choice != "auto") {
    throw Error(ErrorKind::config, "ASRK_KERNELS must be scalar, avx2 or auto, got '" + choice + "'");
  }
  return cpu_supports(Backend::avx2) ? avx2_table() : &scalar_table();
}

}  // namespace

bool cpu_supports(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(ASRK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& active() {
  const KernelTable* table = g_active.load(std::memory_order_acquire);
  if (table == nullptr) {
    const KernelTable* detected = detect();
    const KernelTable* expected = nullptr;
    g_active.compare_exchange_strong(expected, detected, std::memory_order_acq_rel);
    table = g_active.load(std::memory_order_acquire);
  }
  return *table;
}

void select(Backend backend) {
  if (!cpu_supports(backend)) {
    throw Error(ErrorKind::config, std::string("kernel backend unavailable: ") +
                                       std::string(to_string(backend)));
  }
  g_active.store(backend == Backend::avx2 ? avx2_table() : &scalar_table(),
                 std::memory_order_release);
}

std::string_view to_string(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace asrk::tensor::kernels
