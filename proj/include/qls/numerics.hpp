#pragma once
#include <limits>
#include <span>
#include <vector>

#include "qls/complex_matrix.hpp"

namespace qls {

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
/// eigenvectors orthonormal with the first nonzero component made real
/// positive so repeated runs are deterministic.
struct HermitianSpectrum {
    std::vector<double> eigenvalues;
    std::vector<CVec> eigenvectors;

    CMat reconstruct() const;
    std::size_t dim() const { return eigenvalues.size(); }
};

inline constexpr double p_infinity = std::numeric_limits<double>::infinity();

/// (sum_j |v_j|^p)^(1/p); the max norm for p = infinity. Valid for all p > 0,
/// a quasinorm rather than a norm when p < 1.
double quasinorm(std::span<const double> v, double p);
double quasinorm(std::span<const cplx> v, double p);

/// True iff 1/c <= u/v <= c.
bool multiplicative_approx(double u, double v, double c);

/// |0><1| (x) A + |1><0| (x) A^dagger.
CMat hermitian_dilation(const CMat& a);

HermitianSpectrum spectral_decompose(const CMat& h, double tol = tau_unit);

/// Largest singular value. Uses the Hermitian eigensolver on the dilation.
double spectral_norm(const CMat& a);

/// Dense LU solve / inverse (LAPACK zgesv/zgetri).
CVec solve_linear(const CMat& a, const CVec& b);
CMat inverse(const CMat& a);

/// f(H) for Hermitian H via spectral decomposition: sum_u f(eig_u) |v_u><v_u|.
template <typename F>
CMat hermitian_function(const HermitianSpectrum& s, F&& f) {
    const std::size_t n = s.dim();
    CMat m(n, n);
    for (std::size_t u = 0; u < n; ++u) {
        const double fu = f(s.eigenvalues[u]);
        if (fu == 0.0) continue;
        const CVec& v = s.eigenvectors[u];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) += fu * v[i] * std::conj(v[j]);
    }
    return m;
}

/// Projection partial order Pi1 <= Pi2, tested as Pi2 Pi1 = Pi1.
bool projection_leq(const CMat& p1, const CMat& p2, double tol = tau_unit);

/// U fixes Im(Pi) pointwise: U Pi = Pi.
bool fixes_image(const CMat& u, const CMat& pi, double tol = tau_unit);

}  // namespace qls
