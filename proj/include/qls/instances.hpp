#pragma once
#include <cstdint>
#include <optional>
#include <string>

#include "qls/complex_matrix.hpp"

namespace qls {

/// Deterministic splitmix64 stream. Distributions are implemented by hand so
/// generated instances are byte-identical across platforms and runs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double gauss();
    cplx cgauss() { return {gauss(), gauss()}; }

    CVec random_state(std::size_t n);
    CMat random_unitary(std::size_t n);  // Gram-Schmidt on a Gaussian matrix
    CMat random_hermitian(std::size_t n, double norm_target = 1.0);

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// A linear system fixture: Hermitian coefficient matrix (callers dilate
/// non-Hermitian inputs first), initial state, norm bounds, and the directly
/// computed solution for oracle comparisons.
struct LinearSystemInstance {
    CMat a;
    CVec b;
    double alpha_a = 1.0;
    double alpha_ainv = 0.0;
    std::optional<CVec> solution;      // A^{-1} b / ||A^{-1} b||
    std::optional<double> sol_norm;    // ||A^{-1} b||
    std::string law;                   // generation law tag
    std::uint64_t seed = 0;

    void compute_solution();
};

enum class SpectrumLaw { LogUniform, BandOccupancy, Grover };

struct InstanceConfig {
    std::size_t dim = 8;
    SpectrumLaw law = SpectrumLaw::LogUniform;
    double alpha_a = 0.0;      // 0: derived from the law
    double alpha_ainv = 0.0;   // 0: derived
    double kappa_target = 27.0;
    int bands = 3;             // BandOccupancy: eigenvalues per clock band live here
    int per_band = 1;
    std::size_t grover_marked = 0;
    std::uint64_t seed = 1;
};

LinearSystemInstance generate_instance(const InstanceConfig& cfg);

/// Diagonalizable non-normal fixture A = S Lambda S^{-1} with controlled
/// basis-transformation condition number.
struct NonnormalInstance {
    CMat a;
    CMat s, s_inv;
    std::vector<double> eigenvalues;
    double kappa_s = 1.0;
};

NonnormalInstance generate_nonnormal(std::size_t dim, double kappa_s_target,
                                     const std::vector<double>& eigenvalues, Rng& rng);

}  // namespace qls
