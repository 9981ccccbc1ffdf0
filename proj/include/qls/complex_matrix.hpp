#pragma once
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qls/kernels.hpp"

namespace qls {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double tau_unit = 1e-10;
inline constexpr double tau_spec = 1e-9;

/// Dense row-major complex matrix. All hot loops route through the kernel
/// layer, so matrix products and applications pick up the SIMD variants.
class CMat {
  public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static CMat identity(std::size_t n) {
        CMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static CMat zero(std::size_t rows, std::size_t cols) { return CMat(rows, cols); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    cplx* data() { return a_.data(); }
    const cplx* data() const { return a_.data(); }
    cplx* row(std::size_t i) { return a_.data() + i * cols_; }
    const cplx* row(std::size_t i) const { return a_.data() + i * cols_; }

    CMat adjoint() const;
    CMat transpose() const;

    CMat& operator+=(const CMat& o);
    CMat& operator-=(const CMat& o);
    CMat& operator*=(cplx s);

    friend CMat operator+(CMat a, const CMat& b) { return a += b; }
    friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
    friend CMat operator*(CMat a, cplx s) { return a *= s; }
    friend CMat operator*(cplx s, CMat a) { return a *= s; }

    /// Row-major product via the axpy kernel (C[i,:] += A(i,k) * B[k,:]).
    friend CMat operator*(const CMat& a, const CMat& b);

    CVec apply(const CVec& x) const;          // A x
    CVec apply_adjoint(const CVec& x) const;  // A^dagger x

    double frobenius_norm() const;
    double max_abs() const;

    bool is_hermitian(double tol = tau_unit) const;
    bool is_unitary(double tol = tau_unit) const;
    bool is_projection(double tol = tau_unit) const;

    /// Copies `block` into this matrix with top-left corner (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const CMat& block);
    CMat get_block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const;

    friend CMat kron(const CMat& a, const CMat& b);

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

CMat kron(const CMat& a, const CMat& b);
CMat outer(const CVec& u, const CVec& v);  // |u><v|

// Vector helpers.
double norm(const CVec& v);
CVec& operator+=(CVec& a, const CVec& b);
CVec& operator-=(CVec& a, const CVec& b);
CVec operator*(cplx s, CVec v);
cplx inner(const CVec& u, const CVec& v);  // <u|v>
void normalize(CVec& v);
CVec kron(const CVec& u, const CVec& v);
double dist(const CVec& u, const CVec& v);

}  // namespace qls
