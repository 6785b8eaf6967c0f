#include "phototopic/kernels.hpp"

namespace phototopic::kernels {
namespace {

// Lane j of the canonical order holds elements k with k % 4 == j over the
// full blocks; see the header for how lanes and tail are combined.
double sum_scalar(const double* v, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    lane[0] += v[k];
    lane[1] += v[k + 1];
    lane[2] += v[k + 2];
    lane[3] += v[k + 3];
  }
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; k < n; ++k) s += v[k];
  return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    lane[0] += a[k] * b[k];
    lane[1] += a[k + 1] * b[k + 1];
    lane[2] += a[k + 2] * b[k + 2];
    lane[3] += a[k + 3] * b[k + 3];
  }
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; k < n; ++k) s += a[k] * b[k];
  return s;
}

double posterior_accumulate_scalar(const double* mix, const double* word_col,
                                   double count, double* word_acc,
                                   double* doc_acc, std::size_t n) {
  const double p = dot_scalar(mix, word_col, n);
  if (!(p > 0.0)) return p;
  const double f = count / p;
  if (word_acc != nullptr) {
    for (std::size_t k = 0; k < n; ++k) {
      const double r = (mix[k] * word_col[k]) * f;
      word_acc[k] += r;
      doc_acc[k] += r;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) doc_acc[k] += (mix[k] * word_col[k]) * f;
  }
  return p;
}

void add_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) dst[k] += src[k];
}

void scale_scalar(double* dst, double factor, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) dst[k] *= factor;
}

void offset_divide_scalar(double* dst, const double* src, double offset,
                          const double* denom, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) dst[k] = (src[k] + offset) / denom[k];
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar",           sum_scalar,
                                 dot_scalar,         posterior_accumulate_scalar,
                                 add_scalar,         scale_scalar,
                                 offset_divide_scalar};
  return table;
}

}  // namespace phototopic::kernels
