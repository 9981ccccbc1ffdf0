#include "qls/numerics.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qls {

CMat HermitianSpectrum::reconstruct() const {
    return hermitian_function(*this, [](double x) { return x; });
}

namespace {

double quasinorm_impl(const double* mags, std::size_t n, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("quasinorm requires p > 0");
    if (p == p_infinity) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, mags[i]);
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(mags[i], p);
    return std::pow(s, 1.0 / p);
}

}  // namespace

double quasinorm(std::span<const double> v, double p) {
    std::vector<double> mags(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
    return quasinorm_impl(mags.data(), mags.size(), p);
}

double quasinorm(std::span<const cplx> v, double p) {
    std::vector<double> mags(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mags[i] = std::abs(v[i]);
    return quasinorm_impl(mags.data(), mags.size(), p);
}

bool multiplicative_approx(double u, double v, double c) {
    if (!(u > 0.0) || !(v > 0.0)) throw std::invalid_argument("multiplicative_approx requires positive values");
    if (!(c >= 1.0)) throw std::invalid_argument("multiplicative_approx requires c >= 1");
    const double r = u / v;
    return r >= 1.0 / c && r <= c;
}

CMat hermitian_dilation(const CMat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_dilation requires a square matrix");
    const std::size_t d = a.rows();
    CMat m(2 * d, 2 * d);
    m.set_block(0, d, a);
    m.set_block(d, 0, a.adjoint());
    return m;
}

HermitianSpectrum spectral_decompose(const CMat& h, double tol) {
    if (h.rows() != h.cols()) throw std::invalid_argument("spectral_decompose requires a square matrix");
    if (!h.is_hermitian(tol)) throw std::invalid_argument("spectral_decompose requires a Hermitian matrix");
    const std::size_t n = h.rows();
    std::vector<cplx> a(h.data(), h.data() + n * n);
    std::vector<double> w(n);
    const int info = LAPACKE_zheev(LAPACK_ROW_MAJOR, 'V', 'U', static_cast<lapack_int>(n),
                                   reinterpret_cast<lapack_complex_double*>(a.data()),
                                   static_cast<lapack_int>(n), w.data());
    if (info != 0) throw std::runtime_error("zheev failed, info=" + std::to_string(info));

    // zheev returns ascending eigenvalues with eigenvectors in the columns.
    HermitianSpectrum s;
    s.eigenvalues.resize(n);
    s.eigenvectors.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t src = n - 1 - u;  // descending order
        s.eigenvalues[u] = w[src];
        CVec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i * n + src];
        // Sign convention: first component with nontrivial magnitude made real positive.
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v[i]) > 1e-12) {
                const cplx phase = std::conj(v[i]) / std::abs(v[i]);
                kernels::scal(n, phase, v.data());
                break;
            }
        }
        s.eigenvectors[u] = std::move(v);
    }
    return s;
}

double spectral_norm(const CMat& a) {
    if (a.rows() == a.cols() && a.is_hermitian(1e-12)) {
        auto s = spectral_decompose(a, 1e-10);
        double m = 0.0;
        for (double w : s.eigenvalues) m = std::max(m, std::abs(w));
        return m;
    }
    // Largest singular value of A = largest eigenvalue of the dilation.
    auto s = spectral_decompose(hermitian_dilation(a), 1e-10);
    return s.eigenvalues.empty() ? 0.0 : std::max(std::abs(s.eigenvalues.front()),
                                                  std::abs(s.eigenvalues.back()));
}

CVec solve_linear(const CMat& a, const CVec& b) {
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw std::invalid_argument("solve_linear shape mismatch");
    const std::size_t n = a.rows();
    std::vector<cplx> lu(a.data(), a.data() + n * n);
    CVec x = b;
    std::vector<lapack_int> piv(n);
    const int info = LAPACKE_zgesv(LAPACK_ROW_MAJOR, static_cast<lapack_int>(n), 1,
                                   reinterpret_cast<lapack_complex_double*>(lu.data()),
                                   static_cast<lapack_int>(n), piv.data(),
                                   reinterpret_cast<lapack_complex_double*>(x.data()), 1);
    if (info != 0) throw std::runtime_error("zgesv failed, info=" + std::to_string(info));
    return x;
}

CMat inverse(const CMat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("inverse requires a square matrix");
    const std::size_t n = a.rows();
    CMat inv = a;
    std::vector<lapack_int> piv(n);
    int info = LAPACKE_zgetrf(LAPACK_ROW_MAJOR, static_cast<lapack_int>(n),
                              static_cast<lapack_int>(n),
                              reinterpret_cast<lapack_complex_double*>(inv.data()),
                              static_cast<lapack_int>(n), piv.data());
    if (info != 0) throw std::runtime_error("zgetrf failed, info=" + std::to_string(info));
    info = LAPACKE_zgetri(LAPACK_ROW_MAJOR, static_cast<lapack_int>(n),
                          reinterpret_cast<lapack_complex_double*>(inv.data()),
                          static_cast<lapack_int>(n), piv.data());
    if (info != 0) throw std::runtime_error("zgetri failed, info=" + std::to_string(info));
    return inv;
}

bool projection_leq(const CMat& p1, const CMat& p2, double tol) {
    return (p2 * p1 - p1).max_abs() <= tol;
}

bool fixes_image(const CMat& u, const CMat& pi, double tol) {
    return (u * pi - pi).max_abs() <= tol;
}

}  // namespace qls
