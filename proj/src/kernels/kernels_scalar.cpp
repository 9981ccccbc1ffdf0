#include "qls/kernels.hpp"

namespace qls::kernels {

namespace {

void axpy_scalar(std::size_t n, cplx a, const cplx* x, cplx* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

cplx dotc_scalar(std::size_t n, const cplx* x, const cplx* y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx t = std::conj(x[i]) * y[i];
        re += t.real();
        im += t.imag();
    }
    return {re, im};
}

cplx dotu_scalar(std::size_t n, const cplx* x, const cplx* y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx t = x[i] * y[i];
        re += t.real();
        im += t.imag();
    }
    return {re, im};
}

double nrm2sq_scalar(std::size_t n, const cplx* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void scal_scalar(std::size_t n, cplx a, cplx* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

}  // namespace

const KernelTable scalar_table = {axpy_scalar, dotc_scalar, dotu_scalar,
                                  nrm2sq_scalar, scal_scalar, "scalar"};

}  // namespace qls::kernels
