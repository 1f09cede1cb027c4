#pragma once

// Dense double-precision inner loops used by the tensor ops.
//
// Every backend must produce bit-identical results to the scalar reference:
// each output element is accumulated in the same order (ascending reduction
// index) with separate multiply and add, so vector lanes only parallelise
// across independent output elements. The build disables FP contraction so
// no backend fuses a*b+c.

#include <cstddef>
#include <string_view>

namespace asrk::tensor::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;
  // c[m×n] += a[m×k] · b[k×n]
  void (*gemm)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n);
  // c[k×n] += a[m×k]ᵀ · b[m×n]
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // y += alpha · x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  // out = a + b
  void (*add)(std::size_t n, const double* a, const double* b, double* out);
  // out = a ⊙ b
  void (*mul)(std::size_t n, const double* a, const double* b, double* out);
  // out += a ⊙ b
  void (*mul_acc)(std::size_t n, const double* a, const double* b, double* out);
  // out = max(out, x), elementwise; NaN in x never replaces out
  void (*max_update)(std::size_t n, const double* x, double* out);
};

const KernelTable& scalar_table();
// Null when the build has no AVX2 translation unit.
const KernelTable* avx2_table();

bool cpu_supports(Backend backend);

// Kernels used by all tensor ops. Chosen on first use: the ASRK_KERNELS
// environment variable ("scalar", "avx2", "auto") overrides detection.
const KernelTable& active();

// Force a backend; throws asrk::Error(config) if the CPU or build lacks it.
void select(Backend backend);

std::string_view to_string(Backend backend);

}  // namespace asrk::tensor::kernels
