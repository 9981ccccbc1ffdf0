#include "qls/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qls/numerics.hpp"

namespace qls {

double Rng::gauss() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
}

CVec Rng::random_state(std::size_t n) {
    CVec v(n);
    for (auto& x : v) x = cgauss();
    normalize(v);
    return v;
}

CMat Rng::random_unitary(std::size_t n) {
    std::vector<CVec> cols(n);
    for (std::size_t j = 0; j < n; ++j) {
        CVec v(n);
        for (auto& x : v) x = cgauss();
        for (std::size_t k = 0; k < j; ++k) {
            const cplx c = inner(cols[k], v);
            kernels::axpy(n, -c, cols[k].data(), v.data());
        }
        normalize(v);
        cols[j] = std::move(v);
    }
    CMat u(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) u(i, j) = cols[j][i];
    return u;
}

CMat Rng::random_hermitian(std::size_t n, double norm_target) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = gauss();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx v = 0.5 * cgauss();
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }
    const double nrm = spectral_norm(m);
    if (nrm > 0.0) m *= norm_target / nrm;
    return m;
}

void LinearSystemInstance::compute_solution() {
    CVec x = solve_linear(a, b);
    sol_norm = norm(x);
    normalize(x);
    solution = x;
}

namespace {

LinearSystemInstance grover_like(std::size_t d, std::size_t w);

}  // namespace

LinearSystemInstance generate_instance(const InstanceConfig& cfg) {
    if (cfg.law == SpectrumLaw::Grover) return grover_like(cfg.dim, cfg.grover_marked);

    Rng rng(cfg.seed);
    const std::size_t d = cfg.dim;
    const double alpha_a = cfg.alpha_a > 0.0 ? cfg.alpha_a : 1.0;
    const double alpha_ainv = cfg.alpha_ainv > 0.0 ? cfg.alpha_ainv : cfg.kappa_target / alpha_a;
    if (alpha_a * alpha_ainv < 1.0) throw std::invalid_argument("infeasible spectrum constraints");

    std::vector<double> eigs(d);
    if (cfg.law == SpectrumLaw::LogUniform) {
        // |lambda| log-uniform in [1/alpha_ainv, alpha_a/2], random signs. The
        // upper endpoint keeps 2||A|| <= alpha_a so the rescale step preserves
        // alpha_a.
        const double lo = std::log(1.0 / alpha_ainv), hi = std::log(alpha_a / 2.0);
        if (lo > hi) throw std::invalid_argument("infeasible spectrum constraints");
        for (auto& e : eigs) {
            const double mag = std::exp(rng.uniform(lo, hi));
            e = rng.uniform() < 0.5 ? -mag : mag;
        }
        // Pin the extremes so kappa is realized rather than merely bounded.
        eigs[0] = alpha_a / 2.0;
        if (d > 1) eigs[d - 1] = 1.0 / alpha_ainv;
    } else {  // BandOccupancy: per_band eigenvalues in each of `bands` clock bands
        const int m = cfg.bands;
        std::size_t idx = 0;
        for (int k = 0; k < m && idx < d; ++k) {
            for (int r = 0; r < cfg.per_band && idx < d; ++r, ++idx) {
                // |lambda/alpha_a| in [3^-(k+1), 3^-k), clipped to <= 1/2.
                const double hi = std::min(std::pow(3.0, -k), 0.5);
                const double lo = std::pow(3.0, -(k + 1));
                const double mag = rng.uniform(lo * 1.02, hi * 0.98) * alpha_a;
                eigs[idx] = rng.uniform() < 0.5 ? -mag : mag;
            }
        }
        for (; idx < d; ++idx) {
            const double mag = rng.uniform(std::pow(3.0, -cfg.bands) * 1.02,
                                           0.49) * alpha_a;
            eigs[idx] = rng.uniform() < 0.5 ? -mag : mag;
        }
    }

    const CMat v = rng.random_unitary(d);
    CMat a(d, d);
    for (std::size_t u = 0; u < d; ++u) {
        CVec col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = v(i, u);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) a(i, j) += eigs[u] * col[i] * std::conj(col[j]);
    }

    LinearSystemInstance inst;
    inst.a = std::move(a);
    inst.b = rng.random_state(d);
    inst.alpha_a = alpha_a;
    inst.alpha_ainv = alpha_ainv;
    inst.law = cfg.law == SpectrumLaw::LogUniform ? "log-uniform" : "band-occupancy";
    inst.seed = cfg.seed;
    inst.compute_solution();
    return inst;
}

namespace {

LinearSystemInstance grover_like(std::size_t d, std::size_t w) {
    if (d < 15) throw std::invalid_argument("grover fixture requires d >= 15");
    if (w >= d) throw std::invalid_argument("grover fixture: marked index out of range");
    const double sd = std::sqrt(static_cast<double>(d));
    CVec plus(d, cplx(1.0 / sd, 0.0));
    CMat a = outer(plus, plus);
    CMat rest = CMat::identity(d) - a;
    rest *= 1.0 / sd;
    a += rest;  // (1/sqrt(d)) (I - |+><+|) + |+><+|

    CVec b(d, cplx(1.0 / sd, 0.0));
    b[w] = -1.0 / sd;

    LinearSystemInstance inst;
    inst.a = std::move(a);
    inst.b = std::move(b);
    inst.alpha_a = 1.0;
    inst.alpha_ainv = sd;
    inst.law = "grover";
    inst.seed = 0;
    inst.compute_solution();
    return inst;
}

}  // namespace

NonnormalInstance generate_nonnormal(std::size_t dim, double kappa_s_target,
                                     const std::vector<double>& eigenvalues, Rng& rng) {
    if (eigenvalues.size() != dim) throw std::invalid_argument("eigenvalue count mismatch");
    NonnormalInstance out;
    out.eigenvalues = eigenvalues;

    // S = U (I + t R) V for unitaries U, V: singular values 1 + t*sing(R);
    // bisect t until cond(S) hits the target.
    const CMat u = rng.random_unitary(dim);
    const CMat v = rng.random_unitary(dim);
    CMat r(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) r(i, j) = rng.cgauss();

    auto build = [&](double t) {
        CMat core = CMat::identity(dim);
        CMat tr = r;
        tr *= t;
        core += tr;
        return u * (core * v);
    };
    auto cond_of = [&](const CMat& s) {
        auto spec = spectral_decompose(hermitian_dilation(s), 1e-8);
        double smax = 0.0, smin = 1e300;
        for (double w : spec.eigenvalues)
            if (w > 1e-14) {
                smax = std::max(smax, w);
                smin = std::min(smin, w);
            }
        return smax / smin;
    };

    double lo = 0.0, hi = 1.0;
    while (cond_of(build(hi)) < kappa_s_target && hi < 1e6) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cond_of(build(mid)) < kappa_s_target) lo = mid; else hi = mid;
    }
    out.s = build(hi);
    out.kappa_s = cond_of(out.s);
    out.s_inv = inverse(out.s);

    CMat lam(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) lam(i, i) = eigenvalues[i];
    out.a = out.s * (lam * out.s_inv);
    return out;
}

}  // namespace qls
