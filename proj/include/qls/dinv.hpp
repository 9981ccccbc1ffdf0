#pragma once
#include <memory>
#include <optional>

#include "qls/encodings.hpp"
#include "qls/instances.hpp"
#include "qls/vtaa.hpp"

namespace qls {

/// Solver parameters. The base rho = 3 is fixed; c is the threshold constant
/// slightly above 1; the exact flags switch branch marking / gapped phase
/// estimation to their band-exact idealizations (transition-band values are
/// always taken from the actual quartet).
struct DinvSpec {
    double c = 1.001;
    double eps_bm = 1e-4;
    double eps_gpe = 1e-4;
    double eps_blk = 1e-4;
    bool exact_gpe = false;
    bool exact_bm = false;
    int forced_l = -1;  // >= 0: skip the norm estimate and pin the pre-merge count
    std::size_t dim_cap = 4096;
};

/// Non-uniform per-stage GPE accuracies: eps_gpe/l on the last l-1 stages,
/// halving geometrically toward stage 1.
std::vector<double> gpe_error_schedule(int m, int l, double eps_gpe);

/// Branch marking: records the +/- sign of the walk eigenphase into the branch
/// qubit, |+>|+>|phi_{u,+-}> -> |+->|+>|phi_{u,+-}> within eps.
struct BranchMarking {
    ThresholdQuartet quartet;
    double eps = 0.0;
    long long query_cost = 0;  // O_A units, 2 * quartet degree
    bool exact = false;

    /// 2x2 ancilla action F at eigenphase theta (the controlled -iV applies it
    /// on the aux qubit when the branch qubit is |1>).
    CMat action(double theta) const;
};

BranchMarking branch_marking(const BlockEncoding& be, double eps_bm, bool exact = false);

/// Branch-controlled gapped phase estimation at threshold gamma (in units of
/// lambda/alpha_a), rho = 3. Output qubit lands within eps of |0>, i|1>, -|0>
/// for the positive passband, stopband, negative passband respectively, with
/// no dependence on the +/- branch.
struct Gpe {
    double gamma = 0.0;
    double eps = 0.0;
    ThresholdQuartet quartet;
    long long query_cost = 0;
    bool exact = false;

    CMat action(double theta) const;  // F on the outcome qubit at eigenphase theta
    cplx xi0(double ratio) const;     // <0|F|0> at theta = arccos(ratio)
    cplx xi1(double ratio) const;     // <1|F|0>
};

Gpe gpe(const BlockEncoding& be, double gamma, int rho, double eps, bool exact = false);

/// The clock/flag/branch layout of the solver's variable time algorithm.
/// Registers, outermost first: clock (m values), flag (good=0, cont'd=1,
/// bad=2, unused=3), branch qubit (Z basis), quartet aux qubit, walk
/// coordinate v = 2u + s over the qubitized eigenbasis {phi_{u,+}, phi_{u,-}}.
class DinvVta final : public VariableTimeAlgorithm {
  public:
    std::size_t stages() const override { return static_cast<std::size_t>(m_); }
    std::size_t dim() const override;
    CVec initial_state() const override;
    void apply_input(std::size_t j, CVec& state, bool adjoint) const override;
    CVec project_stopped_bad(std::size_t j, const CVec& v) const override;
    double stage_cost(std::size_t j) const override { return static_cast<double>(costs_.at(j - 1)); }
    double initial_cost() const override { return 1.0; }

    int clock_size() const { return m_; }
    const std::vector<double>& eigenvalues() const { return eigs_; }
    const std::vector<double>& ratios() const { return ratios_; }
    const std::vector<CVec>& eigenvectors() const { return eigvecs_; }
    const CVec& eigen_amplitudes() const { return gamma_; }
    int band(std::size_t u) const { return bands_[u]; }
    long long bm_cost() const { return bm_.query_cost; }
    const BranchMarking& marking() const { return bm_; }
    const Gpe& stage_gpe(std::size_t j) const { return gpes_.at(j - 1); }
    double alpha_a() const { return alpha_a_; }
    double alpha_ainv() const { return alpha_ainv_; }

    /// xi coefficients of stage j at eigenvalue index u (xi_{m,0} = 1).
    cplx xi0(std::size_t j, std::size_t u) const;
    cplx xi1(std::size_t j, std::size_t u) const;
    /// zeta_{j,u} = xi_{j,u,0} prod_{h<j} xi_{h,u,1}.
    cplx zeta(std::size_t j, std::size_t u) const;

    /// Applies the branch un-marking to a full register state.
    void apply_unmark(CVec& state, bool adjoint = false) const;

    /// Inverse of the clock-labeling cascade (marking, rotation-free GPE
    /// stages, finalization): maps the zeta-weighted clock profile back to
    /// clock 0 / cont'd and removes the branch marking.
    void apply_label_inverse(CVec& state) const;

    /// Flat register index.
    std::size_t idx(int clock, int flag, int br, int aux, std::size_t v) const;

  private:
    friend DinvVta build_inverter_vta(const BlockEncoding& be, const CVec& b, const DinvSpec& spec,
                                      int l_for_schedule);
    int m_ = 0;
    double alpha_a_ = 1.0, alpha_ainv_ = 1.0;
    std::vector<double> eigs_, ratios_, thetas_;
    std::vector<int> bands_;
    std::vector<CVec> eigvecs_;
    CVec gamma_;
    BranchMarking bm_;
    std::vector<Gpe> gpes_;  // stages 1..m-1
    std::vector<long long> costs_;
    std::size_t nwalk_ = 0;  // 2 * eigenvalue count

    void apply_flip(std::size_t j, CVec& state) const;
    void apply_gpe(std::size_t j, CVec& state, bool adjoint) const;
    void apply_rot(std::size_t j, CVec& state, bool adjoint) const;
    void apply_inc(CVec& state, bool adjoint) const;
    void apply_fin(CVec& state) const;
    void apply_bm(CVec& state, bool adjoint) const;
};

/// Builds the solver's variable time algorithm from a rescaled encoding.
/// l_for_schedule fixes the non-uniform GPE error schedule (use the current
/// pre-merge estimate; prepare_dinv iterates to the fixed point).
DinvVta build_inverter_vta(const BlockEncoding& be, const CVec& b, const DinvSpec& spec,
                           int l_for_schedule);

struct DeterministicPlan {
    int l = 0;
    ThresholdVector thresholds;
    AmplificationSchedule schedule;  // (1,...,1,3,...,3)
    double sum_alpha = 0.0;
    double sqrt_p_estimate = 0.0;
};

/// l = Floor(log3(2 / (sqrt5 c sqrt_p))), thresholds c^2 9^{j-m+l} b_j^2.
DeterministicPlan deterministic_plan(const DinvVta& vta, const DinvSpec& spec,
                                     double sqrt_p_estimate);

/// The five success probabilities and the threshold sums entering the
/// multiplicative-bound checks.
struct ProbabilityFamily {
    double p_succ = 0.0;          // ||A^{-1} b||^2 / alpha_ainv^2
    double p_dinv_1 = 0.0;        // single-slot auxiliary probability
    double p_dinv = 0.0;          // two-slot discretized inverse state
    double p_dinv_m = 0.0;        // all-slot, perfect branch marking
    double p_dinv_bm = 0.0;       // simulated state, erroneous branch marking
    double sigma_exact = 0.0;     // sum 9^{j-m+l} b_j^2, band-exact inputs
    double sigma_gpe = 0.0;       // erroneous GPE, perfect marking
    double sigma_bm = 0.0;        // erroneous GPE and marking
    int l = 0;
};

ProbabilityFamily probability_family(const BlockEncoding& be, const CVec& b, const DinvSpec& spec,
                                     int l);

struct BoundCheck {
    std::string name;
    bool pass = false;
    double lhs = 0.0, mid = 0.0, rhs = 0.0;
};

/// Every inequality chain of the success-probability and threshold-sum
/// propositions, evaluated numerically.
std::vector<BoundCheck> check_multiplicative_bounds(const ProbabilityFamily& f,
                                                    const DinvSpec& spec);

struct DinvResult {
    RunResult run;
    DeterministicPlan plan;
    ProbabilityFamily probs;
    double sqrt_p_dinv = 0.0;          // measured ||psi_dinv_bm||
    bool schedule_matches_plan = false;
    double min_final_amplitude = 0.0;  // sqrt5 / (9c)
    double state_error = 0.0;          // normalized distance to the ideal state
    double state_error_bound = 0.0;    // C1 eps_gpe + C2 eps_bm / sqrt(p succ)
    std::shared_ptr<DinvVta> vta;
};

/// Runs Tunable VTAA under the deterministic plan and checks the §-level
/// guarantees: realized schedule, final amplitude, and projected state error.
DinvResult prepare_dinv(const LinearSystemInstance& inst, const DinvSpec& spec);

struct NormEstimate {
    double sqrt_p_dinv_estimate = 0.0;  // 2 / (sqrt5 3^{l+1} c)
    double norm_estimate = 0.0;         // alpha_ainv * estimate
    int stopped_l = 0;
    long long ob_queries = 0;
    long long oa_queries = 0;
    bool failed = false;  // stochastic mode: estimate not 3-multiplicative
};

enum class EstimateMode { ExactAmplitude, Stochastic };

/// Iterates the deterministic schedule over l = 1, 2, ... and stops at the
/// first amplitude above 4 sqrt5/(45 c); returns a 3-multiplicative estimate
/// of sqrt(p_succ_dinv). alpha_p is a lower bound on p_succ_dinv.
NormEstimate estimate_solution_norm(const LinearSystemInstance& inst, double alpha_p,
                                    EstimateMode mode, const DinvSpec& spec,
                                    double estimation_accuracy = 0.01,
                                    std::uint64_t seed = 1);

struct SolveLedger {
    long long prep_ob = 0, prep_oa = 0;
    long long inversion_oa = 0;
    long long uncompute_oa = 0;
    long long final_rounds = 1;  // 2r+1 of the closing amplification
    long long total_ob = 0, total_oa = 0;
    long long analytic_total_oa = 0;
    bool exact_match = false;
};

struct SolveResult {
    CVec solution;        // normalized system-register output
    double fidelity = 0.0;
    double outcome_weight_on_solution = 0.0;  // |<x|psi>|^2 marginal
    SolveLedger ledger;
    DinvResult prep;
    double p_blk = 0.0;   // post-inversion success probability
};

/// Full linear-system pipeline: discretized inverse state, clock-controlled
/// block-encoded inversion, constant-round amplification, clock uncompute.
SolveResult solve_qls(const LinearSystemInstance& inst, double eps, double norm_estimate,
                      const DinvSpec& spec_in = {});

struct GroverFixture {
    LinearSystemInstance instance;
    std::size_t marked = 0;
    double ainv_norm = 0.0;        // sqrt(d)
    double expected_sol_norm = 0.0;  // sqrt(5d^2-8d+4)/d
    double exact_outcome_prob = 0.0; // |<w|x>|^2 for the exact solution
};

GroverFixture grover_fixture(std::size_t d, std::size_t w);

}  // namespace qls
