#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qls/complex_matrix.hpp"

namespace qls {

/// Abstract variable time algorithm: clock projections Pi_0..Pi_m, a flag
/// projection Pi_b commuting with them, input algorithms A_1..A_m fixing
/// Im(Pi_{j-1}), an initial state, and per-stage abstract query costs.
/// Implementations provide the applications; the amplification engine never
/// needs the operators as explicit matrices.
class VariableTimeAlgorithm {
  public:
    virtual ~VariableTimeAlgorithm() = default;

    virtual std::size_t stages() const = 0;  // m
    virtual std::size_t dim() const = 0;
    virtual CVec initial_state() const = 0;

    /// Applies A_j (or its adjoint) in place; j is 1-based.
    virtual void apply_input(std::size_t j, CVec& state, bool adjoint) const = 0;

    /// Returns Pi_j Pi_b v ("stopped and failed at or before stage j");
    /// j = 0 gives the zero vector, j = m uses Pi_m = I.
    virtual CVec project_stopped_bad(std::size_t j, const CVec& v) const = 0;

    virtual double stage_cost(std::size_t j) const = 0;
    virtual double initial_cost() const = 0;
};

/// Concrete dense-matrix algorithm, used by generic instances and by the
/// axiom validator.
class DenseVta final : public VariableTimeAlgorithm {
  public:
    std::vector<CMat> clock;   // Pi_0..Pi_m (m+1 entries)
    CMat flag;                 // Pi_b
    std::vector<CMat> inputs;  // A_1..A_m
    CVec psi0;
    std::vector<double> costs;  // Cost(A_j)
    double psi0_cost = 1.0;

    std::size_t stages() const override { return inputs.size(); }
    std::size_t dim() const override { return psi0.size(); }
    CVec initial_state() const override { return psi0; }
    void apply_input(std::size_t j, CVec& state, bool adjoint) const override;
    CVec project_stopped_bad(std::size_t j, const CVec& v) const override;
    double stage_cost(std::size_t j) const override { return costs.at(j - 1); }
    double initial_cost() const override { return psi0_cost; }
};

struct AxiomCheck {
    std::string name;
    bool pass = false;
    double violation = 0.0;
};

struct ValidationReport {
    std::vector<AxiomCheck> checks;
    std::vector<double> amplitude_chain;  // ||Pibar_j Pi_b A_j..A_1 psi0||, j=0..m
    bool all_pass() const;
};

ValidationReport validate_axioms(const DenseVta& vta, double tol = tau_unit);

struct ThresholdVector {
    std::vector<double> alpha;  // alpha_1..alpha_m
    double sum() const;
};

struct AmplificationSchedule {
    std::vector<long long> r;  // r_1..r_m
    long long steps(std::size_t j) const { return 2 * r.at(j - 1) + 1; }
    std::vector<std::size_t> nontrivial() const;  // 1-based stages with r_j >= 1
};

struct StageTrace {
    double pre_amplitude = 0.0;   // a_j = ||Pibar_j Pi_b A_j Atilde_{j-1} psi0||
    double post_amplitude = 0.0;  // ||Pibar_j Pi_b Atilde_j psi0||
    double loss_factor = 1.0;     // post / ((2r+1) pre)
    long long r = 0;
};

struct AmplitudeTrace {
    std::vector<StageTrace> stages;
    std::vector<double> unamplified;  // b_k, k=0..m (no amplification anywhere)
    double final_success_amplitude = 0.0;
    double sqrt_p_succ = 0.0;  // b_m
};

/// Query accounting. Counts are exact integers: every application of A_j or
/// its adjoint bumps stage_uses[j-1]; every O_b-equivalent use (initial
/// preparation, and two per reflection about the initial state) bumps
/// initial_uses. Analytic values follow the nested-amplification product
/// formula and must match the counters exactly.
struct CostLedger {
    long long initial_uses = 0;
    std::vector<long long> stage_uses;
    long long analytic_initial = 0;
    std::vector<long long> analytic_stage;
    double weighted_total = 0.0;           // sum of costs times counted uses
    double analytic_weighted_total = 0.0;  // Eq-style analytic total

    bool exact_match() const;
};

enum class Backend { Matrix, Analytic };

struct RunOptions {
    Backend backend = Backend::Matrix;
    std::size_t dim_cap = 4096;
    /// Optional amplitude-estimation model for scheduling decisions: maps the
    /// exact amplitude to the value the scheduler sees.
    std::function<double(std::size_t stage, double amplitude)> amplitude_estimator;
};

struct RunResult {
    CVec final_state;  // matrix backend only
    AmplitudeTrace trace;
    CostLedger ledger;
    AmplificationSchedule schedule;  // realized schedule
};

/// b_k = ||Pibar_k Pi_b A_k..A_1 psi0|| for k = 0..m (plain composition).
std::vector<double> unamplified_amplitude_profile(const VariableTimeAlgorithm& vta);

RunResult run_nested(const VariableTimeAlgorithm& vta, const AmplificationSchedule& schedule,
                     const RunOptions& opts = {});

/// Least nonnegative r with (2r+1) a >= sqrt(alpha)/3.
long long tunable_step_count(double alpha, double a);

RunResult run_tunable(const VariableTimeAlgorithm& vta, const ThresholdVector& thresholds,
                      const RunOptions& opts = {});

struct UniversalityReport {
    bool forward_applicable = false;
    bool forward_ok = false;
    double loss_factor = 1.0;
    double loss_bound = 1.0;           // (5/6)^{sum alpha}
    double max_overshoot = 0.0;        // max_j (2r_j+1) a_j
    bool reverse_ok = false;
    std::vector<double> reconstructed_alpha;
};

UniversalityReport universality_check(const AmplificationSchedule& schedule,
                                      const AmplitudeTrace& trace,
                                      const ThresholdVector* thresholds = nullptr);

struct QueryProductCheck {
    double lhs = 0.0, rhs = 0.0, abs_diff = 0.0;
};

/// Both sides of the query-product representation over nontrivial stages
/// s_v..s_w (v, w are 1-based indices into the nontrivial stage list).
QueryProductCheck query_product_identity(const AmplitudeTrace& trace,
                                         const AmplificationSchedule& schedule, std::size_t v,
                                         std::size_t w);

struct OptimizedThresholds {
    std::vector<double> alpha;  // per nontrivial segment, sums to 1
    double objective = 0.0;     // (sum (b_v c_v)^{2/3})^{3/2}
};

/// Minimizes sum_v b_v c_v / sqrt(alpha_v) under sum alpha = 1.
OptimizedThresholds optimize_thresholds(const std::vector<double>& amplitudes,
                                        const std::vector<double>& costs);

/// Merges stages 1..m-keep_last into a single first stage.
std::shared_ptr<VariableTimeAlgorithm> premerge(
    std::shared_ptr<const VariableTimeAlgorithm> vta, std::size_t keep_last);

/// Dense premerge producing explicit operator products.
DenseVta premerge_dense(const DenseVta& vta, std::size_t keep_last);

struct AnalyticCosts {
    long long initial_factor = 1;            // prod (2r_k+1)
    std::vector<long long> stage_factors;    // prod_{k>=j} (2r_k+1)
    double weighted_total = 0.0;
    double merged_weighted_total = 0.0;      // pre-merged segment form
};

AnalyticCosts cost_totals(const AmplificationSchedule& schedule, const std::vector<double>& costs,
                          double psi0_cost);

}  // namespace qls
