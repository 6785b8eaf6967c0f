// Compiled with -mavx2 (and without -mfma); only reached after a runtime
// CPU check in dispatch.cpp.
#include "phototopic/kernels.hpp"

#if defined(PHOTOTOPIC_HAVE_AVX2)

#include <immintrin.h>

namespace phototopic::kernels {
namespace {

inline double combine_lanes(__m256d acc) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_avx2(const double* v, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(v + k));
  double s = combine_lanes(acc);
  for (; k < n; ++k) s += v[k];
  return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k)));
  }
  double s = combine_lanes(acc);
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

double posterior_accumulate_avx2(const double* mix, const double* word_col,
                                 double count, double* word_acc,
                                 double* doc_acc, std::size_t n) {
  const double p = dot_avx2(mix, word_col, n);
  if (!(p > 0.0)) return p;
  const double f = count / p;
  const __m256d vf = _mm256_set1_pd(f);
  std::size_t k = 0;
  if (word_acc != nullptr) {
    for (; k + 4 <= n; k += 4) {
      const __m256d r = _mm256_mul_pd(
          _mm256_mul_pd(_mm256_loadu_pd(mix + k), _mm256_loadu_pd(word_col + k)),
          vf);
      _mm256_storeu_pd(word_acc + k, _mm256_add_pd(_mm256_loadu_pd(word_acc + k), r));
      _mm256_storeu_pd(doc_acc + k, _mm256_add_pd(_mm256_loadu_pd(doc_acc + k), r));
    }
    for (; k < n; ++k) {
      const double r = (mix[k] * word_col[k]) * f;
      word_acc[k] += r;
      doc_acc[k] += r;
    }
  } else {
    for (; k + 4 <= n; k += 4) {
      const __m256d r = _mm256_mul_pd(
          _mm256_mul_pd(_mm256_loadu_pd(mix + k), _mm256_loadu_pd(word_col + k)),
          vf);
      _mm256_storeu_pd(doc_acc + k, _mm256_add_pd(_mm256_loadu_pd(doc_acc + k), r));
    }
    for (; k < n; ++k) doc_acc[k] += (mix[k] * word_col[k]) * f;
  }
  return p;
}

void add_avx2(double* dst, const double* src, std::size_t n) {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(dst + k,
                     _mm256_add_pd(_mm256_loadu_pd(dst + k), _mm256_loadu_pd(src + k)));
  }
  for (; k < n; ++k) dst[k] += src[k];
}

void scale_avx2(double* dst, double factor, std::size_t n) {
  const __m256d vf = _mm256_set1_pd(factor);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(dst + k, _mm256_mul_pd(_mm256_loadu_pd(dst + k), vf));
  }
  for (; k < n; ++k) dst[k] *= factor;
}

void offset_divide_avx2(double* dst, const double* src, double offset,
                        const double* denom, std::size_t n) {
  const __m256d vo = _mm256_set1_pd(offset);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(dst + k,
                     _mm256_div_pd(_mm256_add_pd(_mm256_loadu_pd(src + k), vo),
                                   _mm256_loadu_pd(denom + k)));
  }
  for (; k < n; ++k) dst[k] = (src[k] + offset) / denom[k];
}

}  // namespace

const KernelTable* avx2() {
  static const KernelTable table{"avx2",           sum_avx2,
                                 dot_avx2,         posterior_accumulate_avx2,
                                 add_avx2,         scale_avx2,
                                 offset_divide_avx2};
  return &table;
}

}  // namespace phototopic::kernels

#else

namespace phototopic::kernels {
const KernelTable* avx2() { return nullptr; }
}  // namespace phototopic::kernels

#endif
