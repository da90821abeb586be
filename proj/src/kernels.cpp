#include "qcapgeo/kernels.hpp"

#include <immintrin.h>

#include <cstdlib>
#include <cstring>

namespace qcapgeo::kernels {

namespace scalar {

cd dotc(const cd* x, const cd* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    re += x[k].real() * y[k].real() + x[k].imag() * y[k].imag();
    im += x[k].real() * y[k].imag() - x[k].imag() * y[k].real();
  }
  return {re, im};
}

void axpy(cd a, const cd* x, cd* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
}

void rank1(cd a, const cd* x, std::size_t rows, const cd* y, std::size_t cols, cd* w,
           std::size_t ld) {
  for (std::size_t c = 0; c < cols; ++c) axpy(a * y[c], x, w + c * ld, rows);
}

}  // namespace scalar

namespace avx2 {

__attribute__((target("avx2,fma"))) cd dotc(const cd* x, const cd* y, std::size_t n) {
  const double* xp = reinterpret_cast<const double*>(x);
  const double* yp = reinterpret_cast<const double*>(y);
  __m256d acc_re = _mm256_setzero_pd();
  __m256d acc_im = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    __m256d xv = _mm256_loadu_pd(xp + 2 * k);
    __m256d yv = _mm256_loadu_pd(yp + 2 * k);
    acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
    acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), acc_im);
  }
  alignas(32) double r[4], i[4];
  _mm256_store_pd(r, acc_re);
  _mm256_store_pd(i, acc_im);
  cd out(r[0] + r[1] + r[2] + r[3], (i[0] - i[1]) + (i[2] - i[3]));
  if (k < n) out += scalar::dotc(x + k, y + k, n - k);
  return out;
}

__attribute__((target("avx2,fma"))) static inline void axpy_impl(__m256d ar, __m256d ai,
                                                                 const double* xp, double* yp,
                                                                 std::size_t pairs) {
  for (std::size_t k = 0; k < pairs; ++k) {
    __m256d xv = _mm256_loadu_pd(xp + 4 * k);
    __m256d yv = _mm256_loadu_pd(yp + 4 * k);
    __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, _mm256_permute_pd(xv, 0x5)));
    _mm256_storeu_pd(yp + 4 * k, _mm256_add_pd(yv, prod));
  }
}

__attribute__((target("avx2,fma"))) void axpy(cd a, const cd* x, cd* y, std::size_t n) {
  __m256d ar = _mm256_set1_pd(a.real());
  __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t pairs = n / 2;
  axpy_impl(ar, ai, reinterpret_cast<const double*>(x), reinterpret_cast<double*>(y), pairs);
  if (n % 2) y[n - 1] += a * x[n - 1];
}

__attribute__((target("avx2,fma"))) void rank1(cd a, const cd* x, std::size_t rows,
                                               const cd* y, std::size_t cols, cd* w,
                                               std::size_t ld) {
  for (std::size_t c = 0; c < cols; ++c) axpy(a * y[c], x, w + c * ld, rows);
}

}  // namespace avx2

bool avx2_available() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("QCAPGEO_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return avx2_available() ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

cd dotc(const cd* x, const cd* y, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::dotc(x, y, n) : scalar::dotc(x, y, n);
}

void axpy(cd a, const cd* x, cd* y, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::axpy(a, x, y, n);
  else
    scalar::axpy(a, x, y, n);
}

void rank1(cd a, const cd* x, std::size_t rows, const cd* y, std::size_t cols, cd* w,
           std::size_t ld) {
  if (active_isa() == Isa::avx2)
    avx2::rank1(a, x, rows, y, cols, w, ld);
  else
    scalar::rank1(a, x, rows, y, cols, w, ld);
}

}  // namespace qcapgeo::kernels
