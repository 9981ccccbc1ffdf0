#include "qls/complex_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace qls {

CMat CMat::adjoint() const {
    CMat r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMat CMat::transpose() const {
    CMat r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMat& CMat::operator+=(const CMat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    kernels::axpy(a_.size(), 1.0, o.a_.data(), a_.data());
    return *this;
}

CMat& CMat::operator-=(const CMat& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
    kernels::axpy(a_.size(), -1.0, o.a_.data(), a_.data());
    return *this;
}

CMat& CMat::operator*=(cplx s) {
    kernels::scal(a_.size(), s, a_.data());
    return *this;
}

CMat operator*(const CMat& a, const CMat& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix shape mismatch in product");
    CMat c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        cplx* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            kernels::axpy(b.cols_, aik, b.row(k), crow);
        }
    }
    return c;
}

CVec CMat::apply(const CVec& x) const {
    if (cols_ != x.size()) throw std::invalid_argument("matrix/vector shape mismatch");
    CVec y(rows_);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = kernels::dotu(cols_, row(i), x.data());
    return y;
}

CVec CMat::apply_adjoint(const CVec& x) const {
    if (rows_ != x.size()) throw std::invalid_argument("matrix/vector shape mismatch");
    CVec y(cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        kernels::axpy(cols_, std::conj(x[i]), row(i), y.data());
    for (auto& v : y) v = std::conj(v);  // y_j = sum_i conj(A_ij) x_i
    return y;
}

double CMat::frobenius_norm() const { return std::sqrt(kernels::nrm2sq(a_.size(), a_.data())); }

double CMat::max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

bool CMat::is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    return (*this - adjoint()).max_abs() <= tol;
}

bool CMat::is_unitary(double tol) const {
    if (rows_ != cols_) return false;
    return (adjoint() * (*this) - identity(rows_)).max_abs() <= tol;
}

bool CMat::is_projection(double tol) const {
    if (rows_ != cols_) return false;
    return ((*this) * (*this) - *this).max_abs() <= tol && (*this - adjoint()).max_abs() <= tol;
}

void CMat::set_block(std::size_t r0, std::size_t c0, const CMat& block) {
    if (r0 + block.rows_ > rows_ || c0 + block.cols_ > cols_)
        throw std::invalid_argument("block out of range");
    for (std::size_t i = 0; i < block.rows_; ++i)
        std::copy(block.row(i), block.row(i) + block.cols_, row(r0 + i) + c0);
}

CMat CMat::get_block(std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) const {
    if (r0 + rows > rows_ || c0 + cols > cols_) throw std::invalid_argument("block out of range");
    CMat b(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        std::copy(row(r0 + i) + c0, row(r0 + i) + c0 + cols, b.row(i));
    return b;
}

CMat kron(const CMat& a, const CMat& b) {
    CMat c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                kernels::axpy(b.cols(), aij, b.row(k), c.row(i * b.rows() + k) + j * b.cols());
        }
    return c;
}

CMat outer(const CVec& u, const CVec& v) {
    CMat m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
}

double norm(const CVec& v) { return std::sqrt(kernels::nrm2sq(v.size(), v.data())); }

CVec& operator+=(CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
    kernels::axpy(a.size(), 1.0, b.data(), a.data());
    return a;
}

CVec& operator-=(CVec& a, const CVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector size mismatch");
    kernels::axpy(a.size(), -1.0, b.data(), a.data());
    return a;
}

CVec operator*(cplx s, CVec v) {
    kernels::scal(v.size(), s, v.data());
    return v;
}

cplx inner(const CVec& u, const CVec& v) {
    if (u.size() != v.size()) throw std::invalid_argument("vector size mismatch");
    return kernels::dotc(u.size(), u.data(), v.data());
}

void normalize(CVec& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::domain_error("cannot normalize zero vector");
    kernels::scal(v.size(), 1.0 / n, v.data());
}

CVec kron(const CVec& u, const CVec& v) {
    CVec w(u.size() * v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] != cplx{}) kernels::axpy(v.size(), u[i], v.data(), w.data() + i * v.size());
    return w;
}

double dist(const CVec& u, const CVec& v) {
    CVec d = u;
    d -= v;
    return norm(d);
}

}  // namespace qls
