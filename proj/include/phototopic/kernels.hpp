#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

// Inner loops of EM training and folding-in, all of them over a topic vector
// of length K. Each variant (scalar reference, AVX2, NEON) produces
// bit-identical results: sums are taken in one canonical order (four
// interleaved partial sums combined as (s0+s1)+(s2+s3), then the K mod 4 tail
// added in order) and the build disables FMA contraction.
namespace phototopic::kernels {

struct KernelTable {
  const char* name;

  // Canonical-order sum of v[0..n).
  double (*sum)(const double* v, std::size_t n);

  // Canonical-order sum of a[k]*b[k].
  double (*dot)(const double* a, const double* b, std::size_t n);

  // E-step for one nonzero X(w,d)=count. With p = dot(mix, word_col):
  // if p > 0, adds count*mix[k]*word_col[k]/p (computed as
  // (mix[k]*word_col[k]) * (count/p)) to doc_acc[k] and, when non-null, to
  // word_acc[k]. Returns p = P(w|d).
  double (*posterior_accumulate)(const double* mix, const double* word_col,
                                 double count, double* word_acc,
                                 double* doc_acc, std::size_t n);

  // dst[k] += src[k]
  void (*add)(double* dst, const double* src, std::size_t n);

  // dst[k] *= factor
  void (*scale)(double* dst, double factor, std::size_t n);

  // dst[k] = (src[k] + offset) / denom[k]
  void (*offset_divide)(double* dst, const double* src, double offset,
                        const double* denom, std::size_t n);
};

const KernelTable& scalar();

// Null when the variant was not compiled for this target.
const KernelTable* avx2();
const KernelTable* neon();

// Variants compiled in AND supported by the running CPU, scalar first.
std::vector<const KernelTable*> available();

// The table used by the library. Chosen once: the best supported variant,
// unless PHOTOTOPIC_KERNELS names another ("scalar", "avx2", "neon").
const KernelTable& active();

// Overrides the active table; returns false if `name` is unavailable.
bool select(std::string_view name);

}  // namespace phototopic::kernels
