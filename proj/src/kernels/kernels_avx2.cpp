#include "qls/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace qls::kernels {

namespace {

// Layout: a __m256d holds two complex<double> as [re0 im0 re1 im1].

inline __m256d cmul(__m256d a_re, __m256d a_im, __m256d x) {
    const __m256d x_swap = _mm256_permute_pd(x, 0b0101);  // [im0 re0 im1 re1]
    return _mm256_fmaddsub_pd(a_re, x, _mm256_mul_pd(a_im, x_swap));
}

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Sum of even lanes minus sum of odd lanes / vice versa, for re/im recombination.
inline double hsum_even_minus_odd(__m256d v) {
    const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
    return hsum(_mm256_mul_pd(v, sign));
}

void axpy_avx2(std::size_t n, cplx a, const cplx* x, cplx* y) {
    const __m256d a_re = _mm256_set1_pd(a.real());
    const __m256d a_im = _mm256_set1_pd(a.imag());
    const double* xp = reinterpret_cast<const double*>(x);
    double* yp = reinterpret_cast<double*>(y);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
        _mm256_storeu_pd(yp + 2 * i, _mm256_add_pd(yv, cmul(a_re, a_im, xv)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

cplx dotc_avx2(std::size_t n, const cplx* x, const cplx* y) {
    const double* xp = reinterpret_cast<const double*>(x);
    const double* yp = reinterpret_cast<const double*>(y);
    __m256d acc_direct = _mm256_setzero_pd();  // lanes: xr*yr, xi*yi  -> re = full sum
    __m256d acc_cross = _mm256_setzero_pd();   // lanes: xi*yr, xr*yi  -> im = odd - even
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
        const __m256d xs = _mm256_permute_pd(xv, 0b0101);
        acc_direct = _mm256_fmadd_pd(xv, yv, acc_direct);
        acc_cross = _mm256_fmadd_pd(xs, yv, acc_cross);
    }
    double re = hsum(acc_direct);
    double im = -hsum_even_minus_odd(acc_cross);
    for (; i < n; ++i) {
        const cplx t = std::conj(x[i]) * y[i];
        re += t.real();
        im += t.imag();
    }
    return {re, im};
}

cplx dotu_avx2(std::size_t n, const cplx* x, const cplx* y) {
    const double* xp = reinterpret_cast<const double*>(x);
    const double* yp = reinterpret_cast<const double*>(y);
    __m256d acc_direct = _mm256_setzero_pd();  // xr*yr, xi*yi -> re = even - odd
    __m256d acc_cross = _mm256_setzero_pd();   // xi*yr, xr*yi -> im = full sum
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yp + 2 * i);
        const __m256d xs = _mm256_permute_pd(xv, 0b0101);
        acc_direct = _mm256_fmadd_pd(xv, yv, acc_direct);
        acc_cross = _mm256_fmadd_pd(xs, yv, acc_cross);
    }
    double re = hsum_even_minus_odd(acc_direct);
    double im = hsum(acc_cross);
    for (; i < n; ++i) {
        const cplx t = x[i] * y[i];
        re += t.real();
        im += t.imag();
    }
    return {re, im};
}

double nrm2sq_avx2(std::size_t n, const cplx* x) {
    const double* xp = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void scal_avx2(std::size_t n, cplx a, cplx* x) {
    const __m256d a_re = _mm256_set1_pd(a.real());
    const __m256d a_im = _mm256_set1_pd(a.imag());
    double* xp = reinterpret_cast<double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xp + 2 * i);
        _mm256_storeu_pd(xp + 2 * i, cmul(a_re, a_im, xv));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable avx2_table = {axpy_avx2, dotc_avx2, dotu_avx2, nrm2sq_avx2,
                                scal_avx2, "avx2"};

}  // namespace qls::kernels

#else

namespace qls::kernels {
const KernelTable avx2_table = scalar_table;
}

#endif
