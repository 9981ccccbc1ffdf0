#include "qls/vtaa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qls {

void DenseVta::apply_input(std::size_t j, CVec& state, bool adjoint) const {
    const CMat& a = inputs.at(j - 1);
    state = adjoint ? a.apply_adjoint(state) : a.apply(state);
}

CVec DenseVta::project_stopped_bad(std::size_t j, const CVec& v) const {
    if (j == 0) return CVec(v.size());
    CVec w = flag.apply(v);
    if (j < stages()) w = clock.at(j).apply(w);
    return w;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

ValidationReport validate_axioms(const DenseVta& vta, double tol) {
    ValidationReport rep;
    const std::size_t m = vta.stages();
    auto add = [&](const std::string& name, double violation) {
        rep.checks.push_back({name, violation <= tol, violation});
    };

    double v = 0.0;
    for (const auto& p : vta.clock)
        v = std::max(v, std::max((p * p - p).max_abs(), (p - p.adjoint()).max_abs()));
    add("clock projections idempotent and Hermitian", v);

    add("Pi_0 = 0", vta.clock.front().max_abs());
    add("Pi_m = I", (vta.clock.back() - CMat::identity(vta.dim())).max_abs());

    v = 0.0;
    for (std::size_t j = 0; j + 1 < vta.clock.size(); ++j)
        for (std::size_t k = j + 1; k < vta.clock.size(); ++k)
            v = std::max(v, (vta.clock[k] * vta.clock[j] - vta.clock[j]).max_abs());
    add("clock ordering Pi_k Pi_j = Pi_j", v);

    add("flag projection",
        std::max((vta.flag * vta.flag - vta.flag).max_abs(), (vta.flag - vta.flag.adjoint()).max_abs()));

    v = 0.0;
    for (const auto& p : vta.clock) v = std::max(v, (vta.flag * p - p * vta.flag).max_abs());
    add("flag commutes with clock", v);

    v = 0.0;
    for (const auto& a : vta.inputs) v = std::max(v, (a.adjoint() * a - CMat::identity(vta.dim())).max_abs());
    add("inputs unitary", v);

    v = 0.0;
    for (std::size_t j = 1; j <= m; ++j)
        v = std::max(v, (vta.inputs[j - 1] * vta.clock[j - 1] - vta.clock[j - 1]).max_abs());
    add("inputs fix Im(Pi_{j-1})", v);

    // Monotone potentially-good amplitude chain, 1 = b_0 >= b_1 >= ... >= b_m.
    CVec state = vta.initial_state();
    rep.amplitude_chain.resize(m + 1);
    auto goodbar = [&](std::size_t j, const CVec& s) {
        CVec bad = vta.project_stopped_bad(j, s);
        CVec good = s;
        good -= bad;
        return norm(good);
    };
    rep.amplitude_chain[0] = goodbar(0, state);
    for (std::size_t j = 1; j <= m; ++j) {
        vta.apply_input(j, state, false);
        rep.amplitude_chain[j] = goodbar(j, state);
    }
    double worst_rise = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        worst_rise = std::max(worst_rise, rep.amplitude_chain[j + 1] - rep.amplitude_chain[j]);
    add("amplitude chain monotone", std::max(0.0, worst_rise));
    return rep;
}

double ThresholdVector::sum() const {
    double s = 0.0;
    for (double a : alpha) s += a;
    return s;
}

std::vector<std::size_t> AmplificationSchedule::nontrivial() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < r.size(); ++j)
        if (r[j] >= 1) out.push_back(j + 1);
    return out;
}

bool CostLedger::exact_match() const {
    if (initial_uses != analytic_initial) return false;
    if (stage_uses.size() != analytic_stage.size()) return false;
    for (std::size_t j = 0; j < stage_uses.size(); ++j)
        if (stage_uses[j] != analytic_stage[j]) return false;
    return true;
}

long long tunable_step_count(double alpha, double a) {
    if (alpha < 0.0) throw std::invalid_argument("tunable_step_count: negative threshold");
    if (alpha == 0.0) return 0;
    if (!(a > 0.0)) throw std::domain_error("unreachable threshold: zero amplitude with positive alpha");
    const double target = std::sqrt(alpha) / 3.0;
    long long r = std::max(0LL, static_cast<long long>(std::ceil(std::sqrt(alpha) / (6.0 * a) - 0.5)));
    while (r > 0 && (2.0 * (r - 1) + 1.0) * a >= target) --r;
    while ((2.0 * r + 1.0) * a < target) ++r;
    return r;
}

namespace {

// Statevector engine for nested amplitude amplification. The amplified
// operator is applied by literal recursion so the instrumented counters
// reproduce the cost recurrence Cost(A~_j) = (2r_j+1)(Cost(A_j)+Cost(A~_{j-1}))
// as exact integers.
class Engine {
  public:
    Engine(const VariableTimeAlgorithm& vta, CostLedger& ledger)
        : vta_(vta), ledger_(ledger), psi0_(vta.initial_state()) {
        ledger_.stage_uses.assign(vta.stages(), 0);
    }

    // Realized steps r_1..r_{j} must be fixed before stage j+1 runs.
    std::vector<long long> realized;

    CVec prepare_initial() {
        ++ledger_.initial_uses;
        return psi0_;
    }

    void apply_input_counted(std::size_t j, CVec& s, bool adjoint) {
        vta_.apply_input(j, s, adjoint);
        ++ledger_.stage_uses[j - 1];
    }

    void reflect_stopped_bad(std::size_t j, CVec& s) const {
        // (I - 2 Pibar_j Pi_b) s = 2 Pi_j Pi_b s - s
        CVec bad = vta_.project_stopped_bad(j, s);
        kernels::scal(s.size(), -1.0, s.data());
        kernels::axpy(s.size(), 2.0, bad.data(), s.data());
    }

    void reflect_initial(CVec& s) {
        // O_b (I - 2|0><0|) O_b^dagger: one O_b query each way.
        const cplx c = inner(psi0_, s);
        kernels::axpy(s.size(), -2.0 * c, psi0_.data(), s.data());
        ledger_.initial_uses += 2;
    }

    void grover_step(std::size_t j, CVec& s, bool adjoint) {
        if (!adjoint) {
            reflect_stopped_bad(j, s);
            apply_input_counted(j, s, true);
            apply_amplified(j - 1, s, true);
            reflect_initial(s);
            apply_amplified(j - 1, s, false);
            apply_input_counted(j, s, false);
            kernels::scal(s.size(), -1.0, s.data());
        } else {
            kernels::scal(s.size(), -1.0, s.data());
            apply_input_counted(j, s, true);
            apply_amplified(j - 1, s, true);
            reflect_initial(s);
            apply_amplified(j - 1, s, false);
            apply_input_counted(j, s, false);
            reflect_stopped_bad(j, s);
        }
    }

    void apply_amplified(std::size_t j, CVec& s, bool adjoint) {
        if (j == 0) return;
        const long long r = realized.at(j - 1);
        if (!adjoint) {
            apply_amplified(j - 1, s, false);
            apply_input_counted(j, s, false);
            for (long long t = 0; t < r; ++t) grover_step(j, s, false);
        } else {
            for (long long t = 0; t < r; ++t) grover_step(j, s, true);
            apply_input_counted(j, s, true);
            apply_amplified(j - 1, s, true);
        }
    }

    double goodbar_norm(std::size_t j, const CVec& s) const {
        CVec bad = vta_.project_stopped_bad(j, s);
        CVec good = s;
        good -= bad;
        return norm(good);
    }

  private:
    const VariableTimeAlgorithm& vta_;
    CostLedger& ledger_;
    CVec psi0_;
};

}  // namespace

std::vector<double> unamplified_amplitude_profile(const VariableTimeAlgorithm& vta) {
    const std::size_t m = vta.stages();
    std::vector<double> b(m + 1);
    CVec state = vta.initial_state();
    auto goodbar = [&](std::size_t j) {
        CVec bad = vta.project_stopped_bad(j, state);
        CVec good = state;
        good -= bad;
        return norm(good);
    };
    b[0] = goodbar(0);
    for (std::size_t j = 1; j <= m; ++j) {
        vta.apply_input(j, state, false);
        b[j] = goodbar(j);
    }
    return b;
}

namespace {

void fill_analytic(const VariableTimeAlgorithm& vta, const AmplificationSchedule& schedule,
                   CostLedger& ledger) {
    const std::size_t m = vta.stages();
    ledger.analytic_stage.assign(m, 0);
    long long prod = 1;
    for (std::size_t j = m; j >= 1; --j) {
        prod *= schedule.steps(j);
        ledger.analytic_stage[j - 1] = prod;
    }
    ledger.analytic_initial = prod;
    ledger.analytic_weighted_total = vta.initial_cost() * static_cast<double>(prod);
    for (std::size_t j = 1; j <= m; ++j)
        ledger.analytic_weighted_total +=
            vta.stage_cost(j) * static_cast<double>(ledger.analytic_stage[j - 1]);
    ledger.weighted_total = vta.initial_cost() * static_cast<double>(ledger.initial_uses);
    for (std::size_t j = 1; j <= m; ++j)
        ledger.weighted_total += vta.stage_cost(j) * static_cast<double>(ledger.stage_uses[j - 1]);
}

// Shared driver: `choose_r(j, a_j)` fixes the schedule stage by stage.
RunResult run_engine(const VariableTimeAlgorithm& vta,
                     const std::function<long long(std::size_t, double)>& choose_r,
                     const RunOptions& opts) {
    const std::size_t m = vta.stages();
    RunResult res;
    res.trace.unamplified = unamplified_amplitude_profile(vta);
    res.trace.sqrt_p_succ = res.trace.unamplified[m];
    res.schedule.r.assign(m, 0);
    res.trace.stages.resize(m);

    if (opts.backend == Backend::Matrix) {
        if (vta.dim() > opts.dim_cap)
            throw std::length_error("matrix backend dimension exceeds configured cap");
        Engine eng(vta, res.ledger);
        eng.realized.assign(m, 0);
        CVec state = eng.prepare_initial();
        for (std::size_t j = 1; j <= m; ++j) {
            eng.apply_input_counted(j, state, false);
            const double a = eng.goodbar_norm(j, state);
            const long long r = choose_r(j, a);
            eng.realized[j - 1] = r;
            res.schedule.r[j - 1] = r;
            for (long long t = 0; t < r; ++t) eng.grover_step(j, state, false);
            const double post = eng.goodbar_norm(j, state);
            const double loss = a > 0.0 ? post / ((2.0 * r + 1.0) * a) : 1.0;
            res.trace.stages[j - 1] = {a, post, loss, r};
        }
        res.trace.final_success_amplitude = eng.goodbar_norm(m, state);
        res.final_state = std::move(state);
    } else {
        // Analytic backend: propagate amplitudes through the closed form
        // post = sin((2r+1) asin(pre)); transition preservation scales the
        // whole downstream profile by the same factor.
        double factor = 1.0;
        double post_prev = 1.0;
        CostLedger& led = res.ledger;
        led.stage_uses.assign(m, 0);
        for (std::size_t j = 1; j <= m; ++j) {
            const double a = res.trace.unamplified[j] * factor;
            const long long r = choose_r(j, a);
            res.schedule.r[j - 1] = r;
            double post = a;
            if (r >= 1) {
                if ((2.0 * r + 1.0) * a > 1.0)
                    throw std::domain_error("overshoot at stage " + std::to_string(j) +
                                            ": (2r+1) a > 1 in analytic backend");
                post = std::sin((2.0 * r + 1.0) * std::asin(a));
            }
            const double loss = a > 0.0 ? post / ((2.0 * r + 1.0) * a) : 1.0;
            res.trace.stages[j - 1] = {a, post, loss, r};
            if (res.trace.unamplified[j] > 0.0) factor = post / res.trace.unamplified[j];
            post_prev = post;
        }
        res.trace.final_success_amplitude = post_prev;
        // Counters mirror the recursion arithmetic exactly.
        long long prod = 1;
        for (std::size_t j = m; j >= 1; --j) {
            prod *= res.schedule.steps(j);
            led.stage_uses[j - 1] = prod;
        }
        led.initial_uses = prod;
    }
    fill_analytic(vta, res.schedule, res.ledger);
    return res;
}

}  // namespace

RunResult run_nested(const VariableTimeAlgorithm& vta, const AmplificationSchedule& schedule,
                     const RunOptions& opts) {
    if (schedule.r.size() != vta.stages())
        throw std::invalid_argument("schedule length does not match stage count");
    return run_engine(
        vta, [&](std::size_t j, double) { return schedule.r[j - 1]; }, opts);
}

RunResult run_tunable(const VariableTimeAlgorithm& vta, const ThresholdVector& thresholds,
                      const RunOptions& opts) {
    if (thresholds.alpha.size() != vta.stages())
        throw std::invalid_argument("threshold length does not match stage count");
    auto choose = [&](std::size_t j, double a) {
        double seen = a;
        if (opts.amplitude_estimator) seen = opts.amplitude_estimator(j, a);
        return tunable_step_count(thresholds.alpha[j - 1], seen);
    };
    return run_engine(vta, choose, opts);
}

UniversalityReport universality_check(const AmplificationSchedule& schedule,
                                      const AmplitudeTrace& trace,
                                      const ThresholdVector* thresholds) {
    UniversalityReport rep;
    const std::size_t m = schedule.r.size();

    rep.loss_factor = 1.0;
    rep.max_overshoot = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const auto& st = trace.stages[j - 1];
        rep.loss_factor *= st.loss_factor;
        if (schedule.r[j - 1] >= 1)
            rep.max_overshoot = std::max(rep.max_overshoot, schedule.steps(j) * st.pre_amplitude);
    }

    if (thresholds) {
        rep.forward_applicable = true;
        bool alphas_ok = true;
        for (double a : thresholds->alpha)
            if (a > 1.0 + 1e-12) alphas_ok = false;
        rep.loss_bound = std::pow(5.0 / 6.0, thresholds->sum());
        rep.forward_ok = alphas_ok && rep.max_overshoot <= 1.0 + 1e-12 &&
                         rep.loss_factor >= rep.loss_bound - 1e-12;
    }

    // Reverse direction: reconstruct thresholds from a no-overshoot schedule.
    rep.reconstructed_alpha.assign(m, 0.0);
    rep.reverse_ok = true;
    for (std::size_t j = 1; j <= m; ++j) {
        if (schedule.r[j - 1] < 1) continue;
        const double a = trace.stages[j - 1].pre_amplitude;
        const double steps = static_cast<double>(schedule.steps(j));
        if (a > 1.0 / (3.0 * steps) + 1e-12) rep.reverse_ok = false;
        const double alpha = 9.0 * steps * steps * a * a;
        rep.reconstructed_alpha[j - 1] = alpha;
        if (alpha > 1.0 + 1e-12) rep.reverse_ok = false;
    }
    return rep;
}

QueryProductCheck query_product_identity(const AmplitudeTrace& trace,
                                         const AmplificationSchedule& schedule, std::size_t v,
                                         std::size_t w) {
    const auto nt = schedule.nontrivial();
    if (v < 1 || w < v || w > nt.size()) throw std::out_of_range("query_product_identity indices");
    QueryProductCheck chk;
    chk.lhs = 1.0;
    double inv_loss = 1.0;
    for (std::size_t u = v; u <= w; ++u) {
        const std::size_t s = nt[u - 1];
        chk.lhs *= static_cast<double>(schedule.steps(s));
        inv_loss /= trace.stages[s - 1].loss_factor;
    }
    const std::size_t s_w = nt[w - 1];
    const double post_w = trace.stages[s_w - 1].post_amplitude;
    const double b_w = trace.unamplified[s_w];
    double post_vm1 = 1.0, b_vm1 = 1.0;  // s_0 = 0 convention
    if (v >= 2) {
        const std::size_t s_vm1 = nt[v - 2];
        post_vm1 = trace.stages[s_vm1 - 1].post_amplitude;
        b_vm1 = trace.unamplified[s_vm1];
    }
    chk.rhs = inv_loss * (post_w / post_vm1) * (b_vm1 / b_w);
    chk.abs_diff = std::abs(chk.lhs - chk.rhs);
    return chk;
}

OptimizedThresholds optimize_thresholds(const std::vector<double>& amplitudes,
                                        const std::vector<double>& costs) {
    if (amplitudes.size() != costs.size() || amplitudes.empty())
        throw std::invalid_argument("optimize_thresholds: mismatched inputs");
    OptimizedThresholds out;
    double s = 0.0;
    std::vector<double> w(amplitudes.size());
    for (std::size_t v = 0; v < amplitudes.size(); ++v) {
        if (!(amplitudes[v] > 0.0) || !(costs[v] > 0.0))
            throw std::invalid_argument("optimize_thresholds requires positive inputs");
        w[v] = std::pow(amplitudes[v] * costs[v], 2.0 / 3.0);
        s += w[v];
    }
    out.alpha.resize(w.size());
    for (std::size_t v = 0; v < w.size(); ++v) out.alpha[v] = w[v] / s;
    out.objective = std::pow(s, 1.5);
    return out;
}

namespace {

class PremergedVta final : public VariableTimeAlgorithm {
  public:
    PremergedVta(std::shared_ptr<const VariableTimeAlgorithm> base, std::size_t keep_last)
        : base_(std::move(base)), l_(keep_last) {
        merged_ = base_->stages() - l_;
        merged_cost_ = 0.0;
        for (std::size_t j = 1; j <= merged_; ++j) merged_cost_ += base_->stage_cost(j);
    }

    std::size_t stages() const override { return l_ + 1; }
    std::size_t dim() const override { return base_->dim(); }
    CVec initial_state() const override { return base_->initial_state(); }

    void apply_input(std::size_t j, CVec& state, bool adjoint) const override {
        if (j == 1) {
            if (!adjoint)
                for (std::size_t k = 1; k <= merged_; ++k) base_->apply_input(k, state, false);
            else
                for (std::size_t k = merged_; k >= 1; --k) base_->apply_input(k, state, true);
        } else {
            base_->apply_input(merged_ + j - 1, state, adjoint);
        }
    }

    CVec project_stopped_bad(std::size_t j, const CVec& v) const override {
        if (j == 0) return CVec(v.size());
        return base_->project_stopped_bad(merged_ + j - 1, v);
    }

    double stage_cost(std::size_t j) const override {
        return j == 1 ? merged_cost_ : base_->stage_cost(merged_ + j - 1);
    }
    double initial_cost() const override { return base_->initial_cost(); }

  private:
    std::shared_ptr<const VariableTimeAlgorithm> base_;
    std::size_t l_, merged_;
    double merged_cost_ = 0.0;
};

}  // namespace

std::shared_ptr<VariableTimeAlgorithm> premerge(std::shared_ptr<const VariableTimeAlgorithm> vta,
                                                std::size_t keep_last) {
    if (keep_last > vta->stages()) throw std::out_of_range("premerge: keep_last exceeds stage count");
    return std::make_shared<PremergedVta>(std::move(vta), keep_last);
}

DenseVta premerge_dense(const DenseVta& vta, std::size_t keep_last) {
    const std::size_t m = vta.stages();
    if (keep_last > m) throw std::out_of_range("premerge: keep_last exceeds stage count");
    const std::size_t merged = m - keep_last;
    DenseVta out;
    out.psi0 = vta.psi0;
    out.psi0_cost = vta.psi0_cost;
    out.flag = vta.flag;
    if (merged == 0) return vta;

    CMat first = CMat::identity(vta.dim());
    double cost = 0.0;
    for (std::size_t j = 1; j <= merged; ++j) {
        first = vta.inputs[j - 1] * first;
        cost += vta.costs[j - 1];
    }
    out.inputs.push_back(std::move(first));
    out.costs.push_back(cost);
    out.clock.push_back(vta.clock.front());  // Pi_0 = 0
    out.clock.push_back(vta.clock[merged]);
    for (std::size_t v = 2; v <= keep_last + 1; ++v) {
        out.inputs.push_back(vta.inputs[merged + v - 2]);
        out.costs.push_back(vta.costs[merged + v - 2]);
        out.clock.push_back(vta.clock[merged + v - 1]);
    }
    return out;
}

AnalyticCosts cost_totals(const AmplificationSchedule& schedule, const std::vector<double>& costs,
                          double psi0_cost) {
    const std::size_t m = schedule.r.size();
    if (costs.size() != m) throw std::invalid_argument("cost_totals: cost vector length mismatch");
    AnalyticCosts out;
    out.stage_factors.assign(m, 1);
    long long prod = 1;
    for (std::size_t j = m; j >= 1; --j) {
        prod *= schedule.steps(j);
        out.stage_factors[j - 1] = prod;
    }
    out.initial_factor = prod;
    out.weighted_total = psi0_cost * static_cast<double>(prod);
    for (std::size_t j = 1; j <= m; ++j)
        out.weighted_total += costs[j - 1] * static_cast<double>(out.stage_factors[j - 1]);

    // Merged form: segments ending at nontrivial stages share one factor.
    const auto nt = schedule.nontrivial();
    out.merged_weighted_total = psi0_cost * static_cast<double>(prod);
    std::size_t seg_start = 1;
    long long seg_factor = prod;
    for (std::size_t v = 0; v <= nt.size(); ++v) {
        const std::size_t seg_end = v < nt.size() ? nt[v] : m;
        double seg_cost = 0.0;
        for (std::size_t j = seg_start; j <= seg_end; ++j) seg_cost += costs[j - 1];
        out.merged_weighted_total += seg_cost * static_cast<double>(seg_factor);
        if (v < nt.size()) seg_factor /= schedule.steps(nt[v]);
        seg_start = seg_end + 1;
        if (seg_start > m) break;
    }
    return out;
}

}  // namespace qls
