#include "qls/encodings.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qls {

namespace {
constexpr double pi = std::numbers::pi;
}

CMat BlockEncoding::matrix() const {
    CMat b = encoded();
    b *= alpha_a;
    return b;
}

BlockEncoding build_block_encoding(const CMat& a, double alpha_a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("block encoding requires a square matrix");
    if (!a.is_hermitian(tau_unit)) throw std::invalid_argument("block encoding requires a Hermitian matrix");
    const double nrm = spectral_norm(a);
    if (alpha_a < nrm * (1.0 - 1e-12))
        throw std::invalid_argument("normalization error: alpha_a < ||A||");
    const std::size_t d = a.rows();

    CMat b = a;
    b *= 1.0 / alpha_a;
    auto spec = spectral_decompose(b);
    CMat s = hermitian_function(spec, [](double x) {
        return std::sqrt(std::max(0.0, 1.0 - x * x));
    });

    BlockEncoding be;
    be.alpha_a = alpha_a;
    be.u = CMat(2 * d, 2 * d);
    be.u.set_block(0, 0, b);
    be.u.set_block(0, d, s);
    be.u.set_block(d, 0, s);
    CMat nb = b;
    nb *= -1.0;
    be.u.set_block(d, d, nb);
    be.g = CMat(2 * d, d);
    for (std::size_t i = 0; i < d; ++i) be.g(i, i) = 1.0;
    return be;
}

namespace {

double next_power_of_3(double x) {
    // Smallest 3^k (integer k, either sign) with 3^k >= x.
    double p = 1.0;
    while (p < x * (1.0 - 1e-12)) p *= 3.0;
    while (p / 3.0 >= x * (1.0 - 1e-12)) p /= 3.0;
    return p;
}

}  // namespace

BlockEncoding rescale_for_solver(const BlockEncoding& be, double alpha_ainv) {
    if (!(alpha_ainv > 0.0)) throw std::domain_error("rescale_for_solver requires a positive inverse-norm bound");
    CMat a = be.matrix();
    const double nrm = spectral_norm(a);
    if (nrm == 0.0) throw std::domain_error("rescale_for_solver: singular matrix");

    double new_alpha = next_power_of_3(2.0 * nrm);
    // Keep the caller's normalization when it already satisfies the contract.
    if (be.alpha_a >= 2.0 * nrm && be.alpha_a >= new_alpha) {
        const double lg = std::log(be.alpha_a) / std::log(3.0);
        if (std::abs(lg - std::round(lg)) < 1e-9) new_alpha = be.alpha_a;
    }
    double new_ainv = next_power_of_3(alpha_ainv);
    int m = static_cast<int>(std::llround(std::log(new_alpha * new_ainv) / std::log(3.0)));
    if (m < 1) {
        new_ainv *= 3.0;
        m = 1;
    }

    BlockEncoding out = build_block_encoding(a, new_alpha);
    out.alpha_ainv = new_ainv;
    out.rescaled = true;
    out.m = m;
    return out;
}

CMat walk_operator(const BlockEncoding& be) {
    CMat refl = be.g * be.g.adjoint();
    refl *= 2.0;
    refl -= CMat::identity(be.u.rows());
    if (!be.u.is_unitary(1e-8)) throw std::invalid_argument("walk_operator: encoding is not unitary");
    CMat enc = be.encoded();
    if (!enc.is_hermitian(1e-8)) throw std::invalid_argument("walk_operator: encoded block is not Hermitian");
    return refl * be.u;
}

std::vector<QubitizedSubspace> qubitize(const BlockEncoding& be) {
    const CMat enc = be.encoded();
    auto spec = spectral_decompose(enc, 1e-8);
    std::vector<QubitizedSubspace> out;
    out.reserve(spec.dim());
    for (std::size_t u = 0; u < spec.dim(); ++u) {
        QubitizedSubspace sub;
        sub.ratio = std::clamp(spec.eigenvalues[u], -1.0, 1.0);
        sub.lambda = sub.ratio * be.alpha_a;
        sub.theta = std::acos(sub.ratio);
        sub.phi0 = be.g.apply(spec.eigenvectors[u]);
        const CVec ug = be.u.apply(sub.phi0);
        if (std::abs(sub.ratio) >= 1.0 - 1e-12) {
            sub.dimension = 1;
        } else {
            sub.dimension = 2;
            CVec phi1 = ug;
            CVec tmp = sub.phi0;
            kernels::axpy(tmp.size(), -sub.ratio, sub.phi0.data(), phi1.data());
            kernels::scal(phi1.size(), 1.0 / std::sqrt(1.0 - sub.ratio * sub.ratio), phi1.data());
            sub.phi1 = phi1;
            const cplx inv_sqrt2 = 1.0 / std::sqrt(2.0);
            sub.phi_plus = sub.phi0;
            kernels::axpy(sub.phi_plus.size(), cplx(0.0, 1.0), sub.phi1.data(), sub.phi_plus.data());
            kernels::scal(sub.phi_plus.size(), inv_sqrt2, sub.phi_plus.data());
            sub.phi_minus = sub.phi0;
            kernels::axpy(sub.phi_minus.size(), cplx(0.0, -1.0), sub.phi1.data(), sub.phi_minus.data());
            kernels::scal(sub.phi_minus.size(), inv_sqrt2, sub.phi_minus.data());
        }
        out.push_back(std::move(sub));
    }
    return out;
}

double ChebSignApprox::eval(double x) const {
    // Clenshaw recurrence over all stored coefficients.
    double b1 = 0.0, b2 = 0.0;
    for (int j = degree; j >= 1; --j) {
        const double b0 = beta[static_cast<std::size_t>(j)] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return beta[0] + x * b1 - b2;
}

namespace {

double erfc_inv_upper(double target) {
    // Smallest t with erfc(t) <= target, by bisection.
    double lo = 0.0, hi = 1.0;
    while (std::erfc(hi) > target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid) > target) lo = mid; else hi = mid;
    }
    return hi;
}

std::vector<double> chebyshev_interpolate_odd(double k, int degree) {
    // Coefficients of erf(k x) at Chebyshev points of the first kind.
    const int np = degree + 1;
    std::vector<double> fx(np);
    for (int j = 0; j < np; ++j) {
        const double x = std::cos(pi * (j + 0.5) / np);
        fx[j] = std::erf(k * x);
    }
    std::vector<double> c(np, 0.0);
    for (int l = 1; l < np; l += 2) {  // odd function: odd coefficients only
        double s = 0.0;
        for (int j = 0; j < np; ++j) s += fx[j] * std::cos(l * pi * (j + 0.5) / np);
        c[l] = 2.0 * s / np;
    }
    return c;
}

}  // namespace

ChebSignApprox cheb_sign_approx(double nu, double eps) {
    if (!(nu > 0.0 && nu < 1.0) || !(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("cheb_sign_approx requires nu, eps in (0,1)");

    // erf(k x) lands within eps/2 of sign(x) outside [-nu, nu]; the remaining
    // eps/2 budget absorbs the Chebyshev truncation.
    const double k = erfc_inv_upper(eps / 2.0) / nu;

    const int grid_n = 10000;
    int degree = static_cast<int>(std::ceil(k * std::sqrt(std::log(4.0 / eps) + 1.0))) + 16;
    if (degree % 2 == 0) ++degree;

    for (int attempt = 0; attempt < 8; ++attempt) {
        ChebSignApprox g;
        g.beta = chebyshev_interpolate_odd(k, degree);
        g.degree = degree;
        g.nu = nu;
        g.eps = eps;

        // |g| <= 1 on [-1,1]: measure and rescale if interpolation overshoots.
        double maxabs = 0.0;
        for (int i = 0; i <= grid_n; ++i) {
            const double x = -1.0 + 2.0 * i / grid_n;
            maxabs = std::max(maxabs, std::abs(g.eval(x)));
        }
        if (maxabs > 1.0) {
            const double scale = 1.0 / maxabs;
            for (auto& b : g.beta) b *= scale;
        }

        double worst = 0.0;
        for (int i = 0; i <= grid_n; ++i) {
            const double x = nu + (1.0 - nu) * i / grid_n;
            const double v = g.eval(x);
            worst = std::max(worst, std::max(1.0 - eps - v, v - 1.0));
            const double vm = g.eval(-x);
            worst = std::max(worst, std::max(vm - (-1.0 + eps), -1.0 - vm));
        }
        g.achieved_error = worst;
        if (worst <= 0.0) return g;
        degree = 2 * degree + 1;
    }
    throw std::runtime_error("cheb_sign_approx: band check failed after degree escalation");
}

double ThresholdQuartet::fa1(double theta) const {
    return 0.5 * (-g.eval(std::sin(theta - theta0)) - g.eval(std::sin(-theta - theta0)));
}

double ThresholdQuartet::fc(double theta) const {
    return 0.5 * (g.eval(std::sin(theta - theta0)) - g.eval(std::sin(-theta - theta0)));
}

double ThresholdQuartet::fb1(double theta) const {
    const double a = fa1(theta), c = fc(theta);
    return std::sqrt(std::max(0.0, 1.0 - a * a - c * c));
}

double ThresholdQuartet::fa(double theta) const {
    return fa1(theta) * fa1_at0 + fb1(theta) * fb1_at0;
}

double ThresholdQuartet::fb(double theta) const {
    const double a = fa(theta), c = fc(theta);
    return std::sqrt(std::max(0.0, 1.0 - a * a - c * c));
}

CMat ThresholdQuartet::f_op(double theta) const {
    const double a = fa(theta), b = fb(theta), c = fc(theta);
    CMat m(2, 2);
    m(0, 0) = cplx(a, b);
    m(0, 1) = cplx(0.0, c);
    m(1, 0) = cplx(0.0, c);
    m(1, 1) = cplx(a, -b);
    return m;
}

ThresholdQuartet threshold_quartet(double theta0, double phi, double eps) {
    if (!(phi > 0.0 && phi <= theta0 && theta0 <= pi / 2.0))
        throw std::invalid_argument("threshold_quartet requires 0 < phi <= theta0 <= pi/2");
    ThresholdQuartet q;
    q.theta0 = theta0;
    q.phi = phi;
    q.eps = eps;
    q.g = cheb_sign_approx(std::sin(phi), eps);
    q.fa1_at0 = q.fa1(0.0);
    q.fb1_at0 = q.fb1(0.0);
    return q;
}

double dirichlet_ratio(int rho, double theta) {
    if (rho < 3 || rho % 2 == 0) throw std::invalid_argument("dirichlet_ratio requires odd rho >= 3");
    if (theta < 0.0 || rho * theta > pi / 2.0 + 1e-12)
        throw std::invalid_argument("dirichlet_ratio requires 0 <= rho*theta <= pi/2");
    if (theta == 0.0) return 1.0;
    return std::sin(rho * theta) / (rho * std::sin(theta));
}

DirichletBounds dirichlet_sandwich(int rho, double theta) {
    const double s2 = std::sin(theta) * std::sin(theta);
    DirichletBounds b;
    b.lower = 1.0 - rho * rho * s2 / 6.0;
    b.upper = 1.0 - (4.0 * pi - 8.0) / (pi * pi * pi) * rho * rho * s2;
    return b;
}

}  // namespace qls
