#include "qls/dinv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qls {

namespace {

constexpr double pi = std::numbers::pi;
const double sqrt5 = std::sqrt(5.0);

double pow3(int k) { return std::pow(3.0, k); }

double log3(double x) { return std::log(x) / std::log(3.0); }

int band_of(double ratio, int m) {
    const double r = std::abs(ratio);
    if (r <= 0.0) throw std::domain_error("zero eigenvalue ratio");
    int k = static_cast<int>(std::ceil(-log3(r) - 1e-12)) - 1;
    return std::clamp(k, 0, m - 1);
}

}  // namespace

std::vector<double> gpe_error_schedule(int m, int l, double eps_gpe) {
    std::vector<double> sched(std::max(0, m - 1));
    const int leff = std::max(1, l);
    for (int j = 1; j <= m - 1; ++j) {
        if (j >= m - l + 2) {
            sched[j - 1] = eps_gpe / leff;
        } else {
            sched[j - 1] = eps_gpe / (leff * std::pow(2.0, m - l + 1 - j));
        }
    }
    return sched;
}

CMat BranchMarking::action(double theta) const {
    if (exact) {
        if (theta >= pi / 3.0 - 1e-12 && theta <= 2.0 * pi / 3.0 + 1e-12) {
            CMat f(2, 2);
            f(0, 1) = cplx(0.0, 1.0);
            f(1, 0) = cplx(0.0, 1.0);
            return f;  // iX
        }
        if (theta <= -pi / 3.0 + 1e-12 && theta >= -2.0 * pi / 3.0 - 1e-12) {
            CMat f(2, 2);
            f(0, 1) = cplx(0.0, -1.0);
            f(1, 0) = cplx(0.0, -1.0);
            return f;  // -iX
        }
    }
    return quartet.f_op(theta);
}

BranchMarking branch_marking(const BlockEncoding& be, double eps_bm, bool exact) {
    if (!be.rescaled) throw std::invalid_argument("branch_marking requires a rescaled encoding");
    BranchMarking bm;
    bm.eps = eps_bm;
    bm.exact = exact;
    bm.quartet = threshold_quartet(pi / 6.0, pi / 6.0, eps_bm * eps_bm / 2.0);
    bm.query_cost = 2LL * bm.quartet.degree();
    return bm;
}

CMat Gpe::action(double theta) const {
    if (exact) {
        const double a_pos = std::acos(std::min(1.0, gamma));         // passband edge
        const double a_mid = std::acos(std::min(1.0, gamma / 3.0));   // stopband edge
        const double t = std::abs(theta);
        CMat f(2, 2);
        if (t <= a_pos + 1e-12) {
            f(0, 0) = 1.0;
            f(1, 1) = 1.0;
            return f;  // I
        }
        if (t >= pi - a_pos - 1e-12) {
            f(0, 0) = -1.0;
            f(1, 1) = -1.0;
            return f;  // -I
        }
        if (t >= a_mid - 1e-12 && t <= pi - a_mid + 1e-12) {
            const cplx v(0.0, theta >= 0.0 ? 1.0 : -1.0);
            f(0, 1) = v;
            f(1, 0) = v;
            return f;  // sign(theta) iX
        }
    }
    return quartet.f_op(theta);
}

cplx Gpe::xi0(double ratio) const {
    const CMat f = action(std::acos(std::clamp(ratio, -1.0, 1.0)));
    return f(0, 0);
}

cplx Gpe::xi1(double ratio) const {
    const CMat f = action(std::acos(std::clamp(ratio, -1.0, 1.0)));
    return f(1, 0);
}

Gpe gpe(const BlockEncoding& be, double gamma, int rho, double eps, bool exact) {
    if (rho != 3) throw std::invalid_argument("gpe: only rho = 3 is supported");
    if (!(gamma > 0.0 && gamma <= 0.5))
        throw std::invalid_argument("gpe: gamma out of range (0, 1/2]");
    (void)be;
    Gpe g;
    g.gamma = gamma;
    g.eps = eps;
    g.exact = exact;
    const double theta0 = 0.5 * (std::acos(gamma) + std::acos(gamma / 3.0));
    const double phi = 0.5 * (std::acos(gamma / 3.0) - std::acos(gamma));
    g.quartet = threshold_quartet(theta0, phi, eps * eps / 8.0);
    g.query_cost = 2LL * g.quartet.degree();
    return g;
}

std::size_t DinvVta::dim() const { return static_cast<std::size_t>(m_) * 4 * 2 * 2 * nwalk_; }

std::size_t DinvVta::idx(int clock, int flag, int br, int aux, std::size_t v) const {
    return ((((static_cast<std::size_t>(clock) * 4 + flag) * 2 + br) * 2 + aux)) * nwalk_ + v;
}

CVec DinvVta::initial_state() const {
    CVec s(dim());
    const double quarter = 1.0 / (2.0 * std::sqrt(2.0));  // 1/sqrt2 per register pair
    for (int br = 0; br < 2; ++br)
        for (int aux = 0; aux < 2; ++aux)
            for (std::size_t u = 0; u < gamma_.size(); ++u)
                for (int sgn = 0; sgn < 2; ++sgn)
                    s[idx(0, 1, br, aux, 2 * u + sgn)] = gamma_[u] * quarter;
    return s;
}

void DinvVta::apply_flip(std::size_t j, CVec& state) const {
    // X on the flag b-qubit, controlled on clock j-1: swaps flags 0<->1, 2<->3.
    const int c = static_cast<int>(j) - 1;
    for (int a = 0; a < 4; a += 2)
        for (int br = 0; br < 2; ++br)
            for (int aux = 0; aux < 2; ++aux)
                for (std::size_t v = 0; v < nwalk_; ++v)
                    std::swap(state[idx(c, a, br, aux, v)], state[idx(c, a + 1, br, aux, v)]);
}

void DinvVta::apply_gpe(std::size_t j, CVec& state, bool adjoint) const {
    const int c = static_cast<int>(j) - 1;
    const Gpe& g = gpes_[j - 1];
    for (std::size_t u = 0; u < thetas_.size(); ++u) {
        for (int sgn = 0; sgn < 2; ++sgn) {
            const std::size_t v = 2 * u + sgn;
            const double theta_v = sgn == 0 ? thetas_[u] : -thetas_[u];
            const CMat fp = g.action(theta_v);   // V_+ branch
            const CMat fm = g.action(-theta_v);  // V_- branch
            // |+><+| (x) F(theta_v) + |-><-| (x) F(-theta_v), branch in Z basis:
            // blocks [(F_p+F_m)/2, (F_p-F_m)/2; (F_p-F_m)/2, (F_p+F_m)/2].
            CMat sum = fp, dif = fp;
            sum += fm;
            dif -= fm;
            sum *= 0.5;
            dif *= 0.5;
            CMat op(4, 4);  // basis (br, b-qubit)
            op.set_block(0, 0, sum);
            op.set_block(0, 2, dif);
            op.set_block(2, 0, dif);
            op.set_block(2, 2, sum);
            if (adjoint) op = op.adjoint();
            for (int a = 0; a < 2; ++a)  // flag a-qubit spectator
                for (int aux = 0; aux < 2; ++aux) {
                    cplx amp[4];
                    for (int br = 0; br < 2; ++br)
                        for (int bq = 0; bq < 2; ++bq)
                            amp[br * 2 + bq] = state[idx(c, 2 * a + bq, br, aux, v)];
                    for (int r = 0; r < 4; ++r) {
                        cplx acc = 0.0;
                        for (int q = 0; q < 4; ++q) acc += op(r, q) * amp[q];
                        state[idx(c, 2 * a + (r & 1), r >> 1, aux, v)] = acc;
                    }
                }
        }
    }
}

void DinvVta::apply_rot(std::size_t j, CVec& state, bool adjoint) const {
    // Y rotation on the flag a-qubit, controlled on clock j-1 and b-qubit 0:
    // good -> cos good + sin bad with cos = 3^j / 3^m.
    const int c = static_cast<int>(j) - 1;
    const double cth = pow3(static_cast<int>(j)) / pow3(m_);
    const double sth = std::sqrt(std::max(0.0, 1.0 - cth * cth));
    const double s = adjoint ? -sth : sth;
    for (int br = 0; br < 2; ++br)
        for (int aux = 0; aux < 2; ++aux)
            for (std::size_t v = 0; v < nwalk_; ++v) {
                cplx& g = state[idx(c, 0, br, aux, v)];
                cplx& b = state[idx(c, 2, br, aux, v)];
                const cplx g0 = g, b0 = b;
                g = cth * g0 - s * b0;
                b = s * g0 + cth * b0;
            }
}

void DinvVta::apply_inc(CVec& state, bool adjoint) const {
    // Cyclic clock increment controlled on flag = cont'd.
    CVec tmp(state.size());
    for (int c = 0; c < m_; ++c) {
        const int dst = adjoint ? (c + m_ - 1) % m_ : (c + 1) % m_;
        for (int br = 0; br < 2; ++br)
            for (int aux = 0; aux < 2; ++aux)
                for (std::size_t v = 0; v < nwalk_; ++v)
                    tmp[idx(dst, 1, br, aux, v)] = state[idx(c, 1, br, aux, v)];
    }
    for (int c = 0; c < m_; ++c)
        for (int br = 0; br < 2; ++br)
            for (int aux = 0; aux < 2; ++aux)
                for (std::size_t v = 0; v < nwalk_; ++v)
                    state[idx(c, 1, br, aux, v)] = tmp[idx(c, 1, br, aux, v)];
}

void DinvVta::apply_fin(CVec& state) const {
    // good <-> cont'd on clock m-1 (self inverse).
    const int c = m_ - 1;
    for (int br = 0; br < 2; ++br)
        for (int aux = 0; aux < 2; ++aux)
            for (std::size_t v = 0; v < nwalk_; ++v)
                std::swap(state[idx(c, 0, br, aux, v)], state[idx(c, 1, br, aux, v)]);
}

void DinvVta::apply_bm(CVec& state, bool adjoint) const {
    // |0><0|_br (x) I + |1><1|_br (x) (-i V), V acting on (aux (x) walk).
    for (std::size_t u = 0; u < thetas_.size(); ++u)
        for (int sgn = 0; sgn < 2; ++sgn) {
            const std::size_t v = 2 * u + sgn;
            CMat f = bm_.action(sgn == 0 ? thetas_[u] : -thetas_[u]);
            f *= cplx(0.0, -1.0);
            if (adjoint) f = f.adjoint();
            for (int c = 0; c < m_; ++c)
                for (int fl = 0; fl < 4; ++fl) {
                    const cplx a0 = state[idx(c, fl, 1, 0, v)];
                    const cplx a1 = state[idx(c, fl, 1, 1, v)];
                    state[idx(c, fl, 1, 0, v)] = f(0, 0) * a0 + f(0, 1) * a1;
                    state[idx(c, fl, 1, 1, v)] = f(1, 0) * a0 + f(1, 1) * a1;
                }
        }
}

void DinvVta::apply_unmark(CVec& state, bool adjoint) const { apply_bm(state, !adjoint); }

void DinvVta::apply_label_inverse(CVec& state) const {
    // Adjoint of L = Fin . prod_j (Inc Gpe_j Flip_j) . BM.
    apply_fin(state);
    for (int j = m_ - 1; j >= 1; --j) {
        apply_inc(state, true);
        apply_gpe(j, state, true);
        apply_flip(j, state);
    }
    apply_bm(state, true);
}

void DinvVta::apply_input(std::size_t j, CVec& state, bool adjoint) const {
    if (j < 1 || j > stages()) throw std::out_of_range("stage index");
    const bool has_gpe = j <= static_cast<std::size_t>(m_ - 1);
    if (!adjoint) {
        if (j == 1) apply_bm(state, false);
        if (has_gpe) {
            apply_flip(j, state);
            apply_gpe(j, state, false);
            apply_rot(j, state, false);
            apply_inc(state, false);
        }
        if (j == static_cast<std::size_t>(m_)) apply_fin(state);
    } else {
        if (j == static_cast<std::size_t>(m_)) apply_fin(state);
        if (has_gpe) {
            apply_inc(state, true);
            apply_rot(j, state, true);
            apply_gpe(j, state, true);
            apply_flip(j, state);
        }
        if (j == 1) apply_bm(state, true);
    }
}

CVec DinvVta::project_stopped_bad(std::size_t j, const CVec& v) const {
    CVec out(v.size());
    if (j == 0) return out;
    const int cmax = j >= static_cast<std::size_t>(m_) ? m_ - 1 : static_cast<int>(j) - 1;
    for (int c = 0; c <= cmax; ++c)
        for (int br = 0; br < 2; ++br)
            for (int aux = 0; aux < 2; ++aux)
                for (std::size_t w = 0; w < nwalk_; ++w) {
                    const std::size_t i = idx(c, 2, br, aux, w);  // flag = bad
                    out[i] = v[i];
                }
    return out;
}

cplx DinvVta::xi0(std::size_t j, std::size_t u) const {
    if (j == static_cast<std::size_t>(m_)) return 1.0;
    return gpes_.at(j - 1).xi0(ratios_[u]);
}

cplx DinvVta::xi1(std::size_t j, std::size_t u) const {
    if (j == static_cast<std::size_t>(m_)) return 0.0;
    return gpes_.at(j - 1).xi1(ratios_[u]);
}

cplx DinvVta::zeta(std::size_t j, std::size_t u) const {
    cplx z = xi0(j, u);
    for (std::size_t h = 1; h < j; ++h) z *= xi1(h, u);
    return z;
}

DinvVta build_inverter_vta(const BlockEncoding& be, const CVec& b, const DinvSpec& spec,
                           int l_for_schedule) {
    if (!be.rescaled) throw std::invalid_argument("build_inverter_vta requires a rescaled encoding");
    if (b.size() != be.dim()) throw std::invalid_argument("initial state dimension mismatch");

    DinvVta vta;
    vta.m_ = be.m;
    vta.alpha_a_ = be.alpha_a;
    vta.alpha_ainv_ = be.alpha_ainv;

    const auto spec_a = spectral_decompose(be.encoded(), 1e-8);
    const std::size_t d = spec_a.dim();
    vta.ratios_.resize(d);
    vta.eigs_.resize(d);
    vta.thetas_.resize(d);
    vta.bands_.resize(d);
    vta.gamma_.resize(d);
    vta.eigvecs_.resize(d);
    for (std::size_t u = 0; u < d; ++u) {
        vta.ratios_[u] = spec_a.eigenvalues[u];
        vta.eigs_[u] = vta.ratios_[u] * be.alpha_a;
        vta.thetas_[u] = std::acos(std::clamp(vta.ratios_[u], -1.0, 1.0));
        vta.bands_[u] = band_of(vta.ratios_[u], vta.m_);
        vta.gamma_[u] = inner(spec_a.eigenvectors[u], b);
        vta.eigvecs_[u] = spec_a.eigenvectors[u];
    }
    vta.nwalk_ = 2 * d;

    vta.bm_ = branch_marking(be, spec.eps_bm, spec.exact_bm);
    const auto sched = gpe_error_schedule(vta.m_, l_for_schedule, spec.eps_gpe);
    for (int j = 1; j <= vta.m_ - 1; ++j)
        vta.gpes_.push_back(gpe(be, pow3(-j), 3, sched[j - 1], spec.exact_gpe));

    vta.costs_.assign(vta.m_, 0);
    if (vta.m_ == 1) {
        vta.costs_[0] = 2 * vta.bm_.query_cost;
    } else {
        vta.costs_[0] = vta.bm_.query_cost + vta.gpes_[0].query_cost;
        for (int j = 2; j <= vta.m_ - 1; ++j) vta.costs_[j - 1] = vta.gpes_[j - 1].query_cost;
        vta.costs_[vta.m_ - 1] = vta.bm_.query_cost;  // unmarking charged at stage m
    }
    return vta;
}

DeterministicPlan deterministic_plan(const DinvVta& vta, const DinvSpec& spec,
                                     double sqrt_p_estimate) {
    if (!(sqrt_p_estimate > 0.0))
        throw std::invalid_argument("deterministic_plan requires a positive amplitude estimate");
    const int m = vta.clock_size();
    DeterministicPlan plan;
    plan.sqrt_p_estimate = sqrt_p_estimate;
    const double raw = log3(2.0 / (sqrt5 * spec.c * sqrt_p_estimate));
    plan.l = std::clamp(static_cast<int>(std::floor(raw + 1e-12)), 0, m);

    const auto b = unamplified_amplitude_profile(vta);
    plan.thresholds.alpha.assign(m, 0.0);
    plan.schedule.r.assign(m, 0);
    for (int j = m - plan.l + 1; j <= m; ++j) {
        plan.thresholds.alpha[j - 1] =
            spec.c * spec.c * std::pow(9.0, j - m + plan.l) * b[j] * b[j];
        plan.schedule.r[j - 1] = 1;
    }
    plan.sum_alpha = plan.thresholds.sum();
    return plan;
}

namespace {

struct Formulas {
    double p1 = 0.0, pd = 0.0, pdm = 0.0;
};

Formulas zeta_formulas(const DinvVta& vta) {
    Formulas f;
    const int m = vta.clock_size();
    const auto& gam = vta.eigen_amplitudes();
    for (std::size_t u = 0; u < gam.size(); ++u) {
        const double g2 = std::norm(gam[u]);
        const int k = vta.band(u);
        f.p1 += g2 * std::pow(9.0, k + 1 - m);
        for (int j = 1; j <= m; ++j) {
            const double z2 = std::norm(vta.zeta(j, u));
            const double w = z2 * std::pow(9.0, j - m);
            f.pdm += g2 * w;
            if (j == k || j == k + 1) f.pd += g2 * w;
        }
    }
    return f;
}

double sigma_sum(const DinvVta& vta, int l) {
    const auto b = unamplified_amplitude_profile(vta);
    const int m = vta.clock_size();
    double s = 0.0;
    for (int j = m - l + 1; j <= m; ++j) s += b[j] * b[j] * std::pow(9.0, j - m + l);
    return s;
}

}  // namespace

ProbabilityFamily probability_family(const BlockEncoding& be, const CVec& b, const DinvSpec& spec,
                                     int l) {
    ProbabilityFamily f;
    f.l = l;

    DinvSpec exact_spec = spec;
    exact_spec.exact_gpe = true;
    exact_spec.exact_bm = true;
    DinvSpec gpe_spec = spec;
    gpe_spec.exact_gpe = false;
    gpe_spec.exact_bm = true;
    DinvSpec full_spec = spec;
    full_spec.exact_gpe = false;
    full_spec.exact_bm = false;

    const DinvVta vta_a = build_inverter_vta(be, b, exact_spec, l);
    const DinvVta vta_b = build_inverter_vta(be, b, gpe_spec, l);
    const DinvVta vta_c = build_inverter_vta(be, b, full_spec, l);

    const auto& gam = vta_c.eigen_amplitudes();
    for (std::size_t u = 0; u < gam.size(); ++u)
        f.p_succ += std::norm(gam[u]) / (vta_c.eigenvalues()[u] * vta_c.eigenvalues()[u]);
    f.p_succ /= be.alpha_ainv * be.alpha_ainv;

    const Formulas quartet = zeta_formulas(vta_c);
    f.p_dinv_1 = quartet.p1;
    f.p_dinv = quartet.pd;
    f.p_dinv_m = quartet.pdm;
    const auto prof_c = unamplified_amplitude_profile(vta_c);
    f.p_dinv_bm = prof_c.back() * prof_c.back();

    f.sigma_exact = sigma_sum(vta_a, l);
    f.sigma_gpe = sigma_sum(vta_b, l);
    f.sigma_bm = sigma_sum(vta_c, l);
    return f;
}

std::vector<BoundCheck> check_multiplicative_bounds(const ProbabilityFamily& f,
                                                    const DinvSpec& spec) {
    std::vector<BoundCheck> out;
    const double slack = 1e-12;
    auto chain = [&](const std::string& name, double lo, double mid, double hi) {
        out.push_back({name, lo <= mid + slack && mid <= hi + slack, lo, mid, hi});
    };
    // Effective total GPE budget: the per-stage schedule sums to at most
    // (1 + 1/l) eps_gpe; use the declared budget times that envelope.
    const double eps_t = spec.eps_gpe * 2.0;
    chain("p_dinv_1/9 <= p_succ <= p_dinv_1", f.p_dinv_1 / 9.0, f.p_succ, f.p_dinv_1);
    chain("(p_dinv_1/9)(1-eps^2) <= p_dinv <= p_dinv_1",
          f.p_dinv_1 / 9.0 * (1.0 - eps_t * eps_t), f.p_dinv, f.p_dinv_1);
    chain("p_dinv <= p_dinv_m <= p_dinv (1+9^3 eps'^2)", f.p_dinv, f.p_dinv_m,
          f.p_dinv * (1.0 + 729.0 * std::pow(eps_t / (1.0 - eps_t), 2.0)));
    out.push_back({"|p_dinv_m - p_dinv_bm| <= 4 eps_bm",
                   std::abs(f.p_dinv_m - f.p_dinv_bm) <= 4.0 * spec.eps_bm + slack,
                   std::abs(f.p_dinv_m - f.p_dinv_bm), 0.0, 4.0 * spec.eps_bm});
    const double nine_l = std::pow(9.0, f.l);
    chain("p_dinv 9^l <= Sigma_A <= (5/4) p_dinv 9^l", f.p_dinv * nine_l, f.sigma_exact,
          1.25 * f.p_dinv * nine_l);
    chain("p_dinv_m 9^l <= Sigma_B <= (5/4) p_dinv_m 9^l", f.p_dinv_m * nine_l, f.sigma_gpe,
          1.25 * f.p_dinv_m * nine_l);
    out.push_back({"|Sigma_B - Sigma_C| <= (9/8) 4 eps_bm 9^l",
                   std::abs(f.sigma_gpe - f.sigma_bm) <= 4.5 * spec.eps_bm * nine_l + slack,
                   std::abs(f.sigma_gpe - f.sigma_bm), 0.0, 4.5 * spec.eps_bm * nine_l});
    return out;
}

namespace {

BlockEncoding rescaled_encoding(const LinearSystemInstance& inst) {
    BlockEncoding be = build_block_encoding(inst.a, std::max(inst.alpha_a, spectral_norm(inst.a)));
    const double ainv = inst.alpha_ainv > 0.0 ? inst.alpha_ainv : 1.0 / 1e-12;
    return rescale_for_solver(be, ainv);
}

/// Good-component amplitudes over (clock, u) after projecting the register
/// model (branch |+>, aux |+>, symmetric walk combination phi_{u,0}).
struct Extraction {
    std::vector<cplx> amps;  // clock-major: amps[c * d + u]
    double residual_sq = 0.0;
    int m = 0;
    std::size_t d = 0;
};

Extraction extract_good(const DinvVta& vta, const CVec& state_in, bool unmark) {
    CVec state = state_in;
    if (unmark) vta.apply_unmark(state);
    Extraction ex;
    ex.m = vta.clock_size();
    ex.d = vta.eigen_amplitudes().size();
    ex.amps.assign(ex.m * ex.d, 0.0);
    const double w = 1.0 / (2.0 * std::sqrt(2.0));
    for (int c = 0; c < ex.m; ++c)
        for (std::size_t u = 0; u < ex.d; ++u) {
            cplx acc = 0.0;
            double total_sq = 0.0;
            for (int br = 0; br < 2; ++br)
                for (int aux = 0; aux < 2; ++aux)
                    for (int sgn = 0; sgn < 2; ++sgn) {
                        const cplx a = state[vta.idx(c, 0, br, aux, 2 * u + sgn)];
                        acc += w * a;
                        total_sq += std::norm(a);
                    }
            ex.amps[c * ex.d + u] = acc;
            ex.residual_sq += total_sq - std::norm(acc);
        }
    return ex;
}

/// The two-slot discretized inverse state in (clock, u) coordinates.
std::vector<cplx> ideal_dinv_amplitudes(const DinvVta& vta) {
    const int m = vta.clock_size();
    const std::size_t d = vta.eigen_amplitudes().size();
    std::vector<cplx> amps(m * d, 0.0);
    for (std::size_t u = 0; u < d; ++u) {
        const int k = vta.band(u);
        const cplx g = vta.eigen_amplitudes()[u];
        amps[k * d + u] += vta.zeta(k + 1, u) * pow3(k + 1 - m) * g;
        if (k >= 1) amps[(k - 1) * d + u] += vta.zeta(k, u) * pow3(k - m) * g;
    }
    return amps;
}

}  // namespace

DinvResult prepare_dinv(const LinearSystemInstance& inst, const DinvSpec& spec) {
    const BlockEncoding be = rescaled_encoding(inst);
    DinvResult res;

    // Fixed point of l -> (error schedule) -> p_dinv_bm -> l.
    int l_sched = spec.forced_l >= 0 ? spec.forced_l : 1;
    std::shared_ptr<DinvVta> vta;
    double sqrt_pd = 0.0;
    for (int pass = 0; pass < 5; ++pass) {
        vta = std::make_shared<DinvVta>(build_inverter_vta(be, inst.b, spec, l_sched));
        sqrt_pd = unamplified_amplitude_profile(*vta).back();
        if (spec.forced_l >= 0) break;
        const int l_new = std::clamp(
            static_cast<int>(std::floor(log3(2.0 / (sqrt5 * spec.c * sqrt_pd)) + 1e-12)), 0,
            vta->clock_size());
        if (l_new == l_sched) break;
        l_sched = l_new;
    }

    res.vta = vta;
    res.sqrt_p_dinv = sqrt_pd;
    res.plan = deterministic_plan(*vta, spec, sqrt_pd);
    if (spec.forced_l >= 0) {
        // Pin the schedule shape to the forced pre-merge count.
        res.plan.l = spec.forced_l;
        res.plan.thresholds.alpha.assign(vta->stages(), 0.0);
        res.plan.schedule.r.assign(vta->stages(), 0);
        const auto b = unamplified_amplitude_profile(*vta);
        const int m = vta->clock_size();
        for (int j = m - res.plan.l + 1; j <= m; ++j) {
            res.plan.thresholds.alpha[j - 1] =
                spec.c * spec.c * std::pow(9.0, j - m + res.plan.l) * b[j] * b[j];
            res.plan.schedule.r[j - 1] = 1;
        }
        res.plan.sum_alpha = res.plan.thresholds.sum();
    }

    RunOptions opts;
    opts.backend = Backend::Matrix;
    opts.dim_cap = spec.dim_cap;
    res.run = run_tunable(*vta, res.plan.thresholds, opts);

    res.schedule_matches_plan = res.run.schedule.r == res.plan.schedule.r;
    res.min_final_amplitude = sqrt5 / (9.0 * spec.c);

    // Projected-error comparison on the plain (unamplified) composition.
    CVec plain = vta->initial_state();
    for (std::size_t j = 1; j <= vta->stages(); ++j) vta->apply_input(j, plain, false);
    const Extraction meas = extract_good(*vta, plain, true);
    const auto ideal = ideal_dinv_amplitudes(*vta);
    double p_meas = 0.0, p_ideal = 0.0;
    for (const auto& a : meas.amps) p_meas += std::norm(a);
    p_meas += meas.residual_sq;
    for (const auto& a : ideal) p_ideal += std::norm(a);
    double diff_sq = meas.residual_sq / p_meas;
    for (std::size_t i = 0; i < ideal.size(); ++i)
        diff_sq += std::norm(meas.amps[i] / std::sqrt(p_meas) - ideal[i] / std::sqrt(p_ideal));
    res.state_error = std::sqrt(std::max(0.0, diff_sq));
    res.probs = probability_family(be, inst.b, spec, res.plan.l);
    res.state_error_bound =
        10.0 * spec.eps_gpe + 10.0 * spec.eps_bm / std::sqrt(res.probs.p_succ);
    return res;
}

NormEstimate estimate_solution_norm(const LinearSystemInstance& inst, double alpha_p,
                                    EstimateMode mode, const DinvSpec& spec,
                                    double estimation_accuracy, std::uint64_t seed) {
    if (!(alpha_p > 0.0)) throw std::invalid_argument("estimate_solution_norm: alpha_p must be positive");
    const BlockEncoding be = rescaled_encoding(inst);
    const double c = spec.c;
    const int alpha_lstar = std::max(
        1, static_cast<int>(std::floor(log3(2.0 / (sqrt5 * c * std::sqrt(alpha_p))) + 1e-12)));
    const double gate_hi = 4.0 * sqrt5 / (45.0 * c);

    Rng rng(seed);
    NormEstimate est;
    const int m = be.m;
    const int l_cap = std::min(alpha_lstar + 1, m);
    for (int l = 1; l <= l_cap; ++l) {
        const DinvVta vta = build_inverter_vta(be, inst.b, spec, l);
        AmplificationSchedule sched;
        sched.r.assign(m, 0);
        for (int j = m - l + 1; j <= m; ++j) sched.r[j - 1] = 1;
        RunOptions opts;
        opts.dim_cap = spec.dim_cap;
        const RunResult run = run_nested(vta, sched, opts);
        est.ob_queries += run.ledger.initial_uses;
        for (std::size_t j = 1; j <= vta.stages(); ++j)
            est.oa_queries += static_cast<long long>(vta.stage_cost(j)) *
                              run.ledger.stage_uses[j - 1];

        double measured = run.trace.final_success_amplitude;
        if (mode == EstimateMode::Stochastic) {
            const double delta_l = 1.0 / std::pow(alpha_lstar - l + 3.0, 2.0);
            if (rng.uniform() < delta_l) {
                // Adversarial estimation failure: cross the wrong side of the gap.
                measured = measured > gate_hi ? 0.5 * sqrt5 / (15.0 * c) : gate_hi + 0.05;
            } else {
                measured += rng.uniform(-estimation_accuracy, estimation_accuracy);
            }
        }
        if (measured > gate_hi) {
            est.stopped_l = l;
            est.sqrt_p_dinv_estimate = 2.0 / (sqrt5 * pow3(l + 1) * c);
            est.norm_estimate = est.sqrt_p_dinv_estimate * be.alpha_ainv;
            return est;
        }
    }
    est.failed = true;
    est.stopped_l = l_cap;
    est.sqrt_p_dinv_estimate = 2.0 / (sqrt5 * pow3(l_cap + 1) * c);
    est.norm_estimate = est.sqrt_p_dinv_estimate * be.alpha_ainv;
    return est;
}

SolveResult solve_qls(const LinearSystemInstance& inst, double eps, double norm_estimate,
                      const DinvSpec& spec_in) {
    if (!(norm_estimate > 0.0)) throw std::invalid_argument("solve_qls requires a positive norm estimate");
    const BlockEncoding probe = rescaled_encoding(inst);
    const double sqrt_p_est = norm_estimate / probe.alpha_ainv;

    DinvSpec spec = spec_in;
    spec.eps_gpe = std::min(spec.eps_gpe, eps / 20.0);
    spec.eps_bm = std::min(spec.eps_bm, sqrt_p_est * eps / 20.0);
    spec.eps_blk = std::min(spec.eps_blk, eps / 20.0);

    SolveResult res;
    res.prep = prepare_dinv(inst, spec);
    const DinvVta& vta = *res.prep.vta;
    const int m = vta.clock_size();
    const std::size_t d = vta.eigen_amplitudes().size();

    res.ledger.prep_ob = res.prep.run.ledger.initial_uses;
    for (std::size_t j = 1; j <= vta.stages(); ++j)
        res.ledger.prep_oa += static_cast<long long>(vta.stage_cost(j)) *
                              res.prep.run.ledger.stage_uses[j - 1];

    // Clock-controlled block-encoded inversion on the good flag. It acts
    // diagonally in the eigenvalue index, so the branch marking can stay in
    // place until the clock uncompute removes it.
    const CVec& state = res.prep.run.final_state;
    CVec inverted(state.size());
    for (int c = 0; c < m; ++c) {
        const double window = pow3(-(c + 2));
        for (std::size_t u = 0; u < d; ++u) {
            if (std::abs(vta.ratios()[u]) < window) continue;
            const cplx mult = vta.alpha_a() / (2.0 * pow3(c + 2) * vta.eigenvalues()[u]);
            for (int br = 0; br < 2; ++br)
                for (int aux = 0; aux < 2; ++aux)
                    for (int sgn = 0; sgn < 2; ++sgn) {
                        const std::size_t i = vta.idx(c, 0, br, aux, 2 * u + sgn);
                        inverted[i] = mult * state[i];
                    }
        }
    }
    const double a_blk = norm(inverted);
    if (!(a_blk > 0.0)) throw std::domain_error("solve_qls: degenerate instance, nothing to amplify");
    res.p_blk = a_blk * a_blk;
    kernels::scal(inverted.size(), 1.0 / a_blk, inverted.data());

    const double kappa = vta.alpha_a() * vta.alpha_ainv();
    res.ledger.inversion_oa =
        static_cast<long long>(std::ceil(kappa * std::log2(1.0 / spec.eps_blk)));
    const long long r_fin = tunable_step_count(1.0, a_blk);
    res.ledger.final_rounds = 2 * r_fin + 1;

    // Uncompute the clock by running the labeling cascade backwards
    // (rotation-free GPE stages), which also removes the branch marking.
    vta.apply_label_inverse(inverted);
    for (int j = 1; j <= m - 1; ++j) res.ledger.uncompute_oa += vta.stage_gpe(j).query_cost;
    res.ledger.uncompute_oa += vta.bm_cost();

    res.ledger.total_ob = res.ledger.final_rounds * res.ledger.prep_ob;
    res.ledger.total_oa =
        res.ledger.final_rounds * (res.ledger.prep_oa + res.ledger.inversion_oa) +
        res.ledger.uncompute_oa;
    long long analytic_prep = 0;
    for (std::size_t j = 1; j <= vta.stages(); ++j)
        analytic_prep += static_cast<long long>(vta.stage_cost(j)) *
                         res.prep.run.ledger.analytic_stage[j - 1];
    res.ledger.analytic_total_oa =
        res.ledger.final_rounds * (analytic_prep + res.ledger.inversion_oa) +
        res.ledger.uncompute_oa;
    res.ledger.exact_match =
        res.prep.run.ledger.exact_match() && res.ledger.analytic_total_oa == res.ledger.total_oa;

    // Project the register model |clock 0, cont'd, +, +> and read the system
    // amplitudes in the eigenbasis.
    const double w = 1.0 / (2.0 * std::sqrt(2.0));
    CVec coeff(d, 0.0);
    for (std::size_t u = 0; u < d; ++u)
        for (int br = 0; br < 2; ++br)
            for (int aux = 0; aux < 2; ++aux)
                for (int sgn = 0; sgn < 2; ++sgn)
                    coeff[u] += w * inverted[vta.idx(0, 1, br, aux, 2 * u + sgn)];

    // Exact solution in the eigenbasis.
    CVec target(d, 0.0);
    double tnorm = 0.0;
    for (std::size_t u = 0; u < d; ++u) {
        target[u] = vta.eigen_amplitudes()[u] / vta.eigenvalues()[u];
        tnorm += std::norm(target[u]);
    }
    kernels::scal(target.size(), 1.0 / std::sqrt(tnorm), target.data());
    res.fidelity = std::abs(inner(target, coeff));

    // System-basis output (for outcome probabilities) and its weight on the
    // exact solution direction.
    const auto spec_a = spectral_decompose(CMat(inst.a), 1e-8);
    CVec x(inst.b.size(), 0.0);
    for (std::size_t u = 0; u < d; ++u)
        kernels::axpy(x.size(), coeff[u], spec_a.eigenvectors[u].data(), x.data());
    const double xn = norm(x);
    if (xn > 0.0) kernels::scal(x.size(), 1.0 / xn, x.data());
    res.solution = std::move(x);
    res.outcome_weight_on_solution = res.fidelity * res.fidelity;
    return res;
}

GroverFixture grover_fixture(std::size_t d, std::size_t w) {
    if (d < 15) throw std::invalid_argument("grover_fixture requires d >= 15");
    GroverFixture fx;
    InstanceConfig cfg;
    cfg.dim = d;
    cfg.law = SpectrumLaw::Grover;
    cfg.grover_marked = w;
    fx.instance = generate_instance(cfg);
    fx.marked = w;
    fx.ainv_norm = std::sqrt(static_cast<double>(d));
    const double dd = static_cast<double>(d);
    fx.expected_sol_norm = std::sqrt(5.0 * dd * dd - 8.0 * dd + 4.0) / dd;
    const CVec& sol = *fx.instance.solution;
    fx.exact_outcome_prob = std::norm(sol[w]);
    return fx;
}

}  // namespace qls
