#pragma once
#include <complex>
#include <cstddef>
#include <string>

namespace qls::kernels {

using cplx = std::complex<double>;

// Complex vector kernels used by the dense linear algebra layer. Each has a
// scalar reference implementation and an AVX2+FMA variant; the active set is
// chosen at runtime from CPU features (override with set_backend / the
// QLS_KERNEL environment variable, values "scalar" or "avx2").
struct KernelTable {
    // y += a*x
    void (*axpy)(std::size_t n, cplx a, const cplx* x, cplx* y);
    // sum_i conj(x_i) * y_i
    cplx (*dotc)(std::size_t n, const cplx* x, const cplx* y);
    // sum_i x_i * y_i
    cplx (*dotu)(std::size_t n, const cplx* x, const cplx* y);
    // sum_i |x_i|^2
    double (*nrm2sq)(std::size_t n, const cplx* x);
    // x *= a
    void (*scal)(std::size_t n, cplx a, cplx* x);
    const char* name;
};

extern const KernelTable scalar_table;
extern const KernelTable avx2_table;

const KernelTable& active();
bool avx2_available();
void set_backend(const std::string& name);  // "scalar", "avx2", "auto"

inline void axpy(std::size_t n, cplx a, const cplx* x, cplx* y) { active().axpy(n, a, x, y); }
inline cplx dotc(std::size_t n, const cplx* x, const cplx* y) { return active().dotc(n, x, y); }
inline cplx dotu(std::size_t n, const cplx* x, const cplx* y) { return active().dotu(n, x, y); }
inline double nrm2sq(std::size_t n, const cplx* x) { return active().nrm2sq(n, x); }
inline void scal(std::size_t n, cplx a, cplx* x) { active().scal(n, a, x); }

}  // namespace qls::kernels
