#pragma once

// Complex BLAS-1/2 style inner loops with a scalar reference and an AVX2
// variant picked once at runtime. Set QCAPGEO_SIMD=scalar to force the
// reference path.

#include <complex>
#include <cstddef>

namespace qcapgeo::kernels {

using cd = std::complex<double>;

enum class Isa { scalar, avx2 };

Isa active_isa();
bool avx2_available();
const char* isa_name(Isa isa);

// Σ conj(x_k) y_k
cd dotc(const cd* x, const cd* y, std::size_t n);
// y += a x
void axpy(cd a, const cd* x, cd* y, std::size_t n);
// W += a x yᵀ, W column-major rows×cols with leading dimension ld
void rank1(cd a, const cd* x, std::size_t rows, const cd* y, std::size_t cols, cd* w,
           std::size_t ld);

namespace scalar {
cd dotc(const cd* x, const cd* y, std::size_t n);
void axpy(cd a, const cd* x, cd* y, std::size_t n);
void rank1(cd a, const cd* x, std::size_t rows, const cd* y, std::size_t cols, cd* w,
           std::size_t ld);
}  // namespace scalar

namespace avx2 {
cd dotc(const cd* x, const cd* y, std::size_t n);
void axpy(cd a, const cd* x, cd* y, std::size_t n);
void rank1(cd a, const cd* x, std::size_t rows, const cd* y, std::size_t cols, cd* w,
           std::size_t ld);
}  // namespace avx2

}  // namespace qcapgeo::kernels
