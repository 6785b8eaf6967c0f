#include "phototopic/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace phototopic::kernels {
namespace {

// Two float64x2 registers stand in for the four canonical lanes:
// lo = (lane0, lane1), hi = (lane2, lane3).
inline double combine_lanes(float64x2_t lo, float64x2_t hi) {
  return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
         (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

double sum_neon(const double* v, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    lo = vaddq_f64(lo, vld1q_f64(v + k));
    hi = vaddq_f64(hi, vld1q_f64(v + k + 2));
  }
  double s = combine_lanes(lo, hi);
  for (; k < n; ++k) s += v[k];
  return s;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    // vmulq + vaddq, never vfmaq: the fused form rounds differently.
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + k + 2), vld1q_f64(b + k + 2)));
  }
  double s = combine_lanes(lo, hi);
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

double posterior_accumulate_neon(const double* mix, const double* word_col,
                                 double count, double* word_acc,
                                 double* doc_acc, std::size_t n) {
  const double p = dot_neon(mix, word_col, n);
  if (!(p > 0.0)) return p;
  const double f = count / p;
  const float64x2_t vf = vdupq_n_f64(f);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t r =
        vmulq_f64(vmulq_f64(vld1q_f64(mix + k), vld1q_f64(word_col + k)), vf);
    if (word_acc != nullptr) vst1q_f64(word_acc + k, vaddq_f64(vld1q_f64(word_acc + k), r));
    vst1q_f64(doc_acc + k, vaddq_f64(vld1q_f64(doc_acc + k), r));
  }
  for (; k < n; ++k) {
    const double r = (mix[k] * word_col[k]) * f;
    if (word_acc != nullptr) word_acc[k] += r;
    doc_acc[k] += r;
  }
  return p;
}

void add_neon(double* dst, const double* src, std::size_t n) {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    vst1q_f64(dst + k, vaddq_f64(vld1q_f64(dst + k), vld1q_f64(src + k)));
  }
  for (; k < n; ++k) dst[k] += src[k];
}

void scale_neon(double* dst, double factor, std::size_t n) {
  const float64x2_t vf = vdupq_n_f64(factor);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) vst1q_f64(dst + k, vmulq_f64(vld1q_f64(dst + k), vf));
  for (; k < n; ++k) dst[k] *= factor;
}

void offset_divide_neon(double* dst, const double* src, double offset,
                        const double* denom, std::size_t n) {
  const float64x2_t vo = vdupq_n_f64(offset);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    vst1q_f64(dst + k,
              vdivq_f64(vaddq_f64(vld1q_f64(src + k), vo), vld1q_f64(denom + k)));
  }
  for (; k < n; ++k) dst[k] = (src[k] + offset) / denom[k];
}

}  // namespace

const KernelTable* neon() {
  static const KernelTable table{"neon",           sum_neon,
                                 dot_neon,         posterior_accumulate_neon,
                                 add_neon,         scale_neon,
                                 offset_divide_neon};
  return &table;
}

}  // namespace phototopic::kernels

#else

namespace phototopic::kernels {
const KernelTable* neon() { return nullptr; }
}  // namespace phototopic::kernels

#endif
