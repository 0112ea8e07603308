#pragma once
//
// Theorem-level bounds with explicit constants, their preconditions, and
// the matching empirical quantities measured on a PerturbationInstance.
//
// Index conventions follow the usual 1-based statement of the results:
// k, s, j count singular values from 1, sigma_0 = delta_0 = +inf and
// sigma_{r+1} = 0.
//

#include "stk/matcore.hpp"
#include "stk/models.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stk {

struct PreconditionFlags {
    bool dim_ok = false;
    bool snr_ok = false;
    bool gap_ok = false;

    bool all() const { return dim_ok && snr_ok && gap_ok; }
    static PreconditionFlags satisfied() { return {true, true, true}; }
};

// Statement constant (b+1)^2/(b-1)^2 or the (b+2)^2/(b-1)^2 that appears
// in the proof of the Gaussian subspace bound.
enum class ConstantForm { statement, proof };

struct GaussianBoundParams {
    int N = 0;
    int n = 0;
    int r = 0;
    int k = 1;
    int s = 1;
    double b = 2.0;
    double K = 1.0;
    std::vector<double> sigma;  // sigma_1 >= ... >= sigma_r > 0

    // Derived.
    double eta = 0;
    double gamma = 0;
    double chi = 0;
    double xi = 0;
    double M = 0;
    int k0 = 0;  // min(k, r - k)
    int r0 = 0;  // largest index meeting both r0 clauses, 0 if none

    // Realized ||E|| when known; otherwise 2(sqrt N + sqrt n) is used.
    std::optional<double> noise_norm;

    static GaussianBoundParams make(int N, int n, std::vector<double> sigma, int k, int s, double b, double K,
                                    std::optional<double> noise_norm = std::nullopt);

    double sigma_at(int i) const;  // 1-based with the infinity / zero conventions
    double gap(int i) const;       // delta_i
    double min_gap() const;        // min(delta_{k-1}, delta_s)
    double log_dim() const;        // ln(N + n)
    double effective_noise_norm() const;
    double constant(ConstantForm form) const;  // (b+1)^2/(b-1)^2 or (b+2)^2/(b-1)^2
    // max(0, 1 - factor * (N+n)^{-power})
    double probability(double factor, double power) const;
    PreconditionFlags flags() const;
};

double chi_of(double b);
double xi_of(double b);

struct BoundReport {
    std::string theorem_id;
    double bound_value = 0;
    double probability_floor = 0;
    PreconditionFlags preconditions;
    bool precondition_met = false;
    bool quantitative = true;  // false for constant-free shape evaluators
    std::optional<double> empirical;
    std::optional<double> ratio;
    std::optional<bool> violated;
    std::optional<int> chosen_index;  // j0 of the location check

    // Stores the empirical value and derives ratio and violated.
    void set_empirical(double value);
};

// Slack applied to every inequality: 1e-9 * max(1, bound).
bool exceeds(double empirical, double bound);

nlohmann::json to_json(const BoundReport& report);
std::string csv_header();
std::string csv_row(const BoundReport& report);

// ---------------------------------------------------------------------------
// Deterministic results.

BoundReport mirsky_check(const PerturbationInstance& inst, const NormSpec& spec);

// Reports for the left (U) and right (V) subspaces against the shared bound.
std::pair<BoundReport, BoundReport> wedin_check(const PerturbationInstance& inst, int k, const NormSpec& spec);

// ---------------------------------------------------------------------------
// Gaussian noise.

enum class SubspaceVariant {
    general_norm,  // needs the cross-term norm
    operator_norm,
    simplified,    // constant-free shape of the simplified corollary
};

BoundReport gauss_subspace_bound(const GaussianBoundParams& p, SubspaceVariant variant,
                                 std::optional<double> cross_term_norm = std::nullopt,
                                 ConstantForm form = ConstantForm::statement);

// Checks, for singular value j in [k, s], whether some j0 in [k, s] puts
// sigma~_j in the location set of sigma_{j0} and satisfies the varphi
// residual inequality. A report is violated when no admissible j0 passes
// both tests; the chosen j0 minimizes residual / allowance.
BoundReport gauss_sv_location_check(const PerturbationInstance& inst, const GaussianBoundParams& p, int j,
                                    const std::function<double(double)>& phi_at);

struct IncoherenceStats {
    double u_2inf = 0;
    double v_2inf = 0;
    std::optional<double> window_2inf;  // ||U_k||_{2,inf} for the aligned corollary

    static IncoherenceStats from_instance(const PerturbationInstance& inst, int k);
};

enum class EntrywiseForm {
    vector_inf,             // shape only
    matrix_2inf,            // shape only
    infnorm_nonasymptotic,  // explicit constants, uses gamma
    corollary_aligned,      // shape only
};

BoundReport entrywise_bound(const GaussianBoundParams& p, const IncoherenceStats& inc, EntrywiseForm form);

// Linear form at ||x^T U|| and bilinear form at y in R^{s-k+1} (unit).
std::pair<BoundReport, BoundReport> linear_bilinear_bound(const GaussianBoundParams& p, double xU_norm,
                                                          const Vector& y);

enum class WeightedForm { theorem, corollary_full };

BoundReport weighted_bound(const GaussianBoundParams& p, const IncoherenceStats& inc, WeightedForm form);

// ---------------------------------------------------------------------------
// General noise.

struct GeneralNoiseParams {
    double L = 0;  // bound on ||U^T E V||
    double B = 0;  // bound on ||E||
    double t = 0;  // bound on ||U_k^T E V_k||
    double epsilon = 0.5;

    void validate() const;
};

// first: sigma_k - sigma~_k <= t, second: sigma~_k - sigma_k <= upper allowance.
std::pair<BoundReport, BoundReport> general_sv_bounds(const PerturbationInstance& inst, int k,
                                                      const GeneralNoiseParams& gp);

BoundReport general_subspace_bound(int k, int r, double delta_k, double sigma_k, const GeneralNoiseParams& gp,
                                   const NormSpec& spec);

double fbounded_probability(const std::function<double(double)>& f, double t, int r, int k, double delta_k);

// ---------------------------------------------------------------------------
// Empirical counterparts.

enum class Quantity {
    sin_theta,        // |||sin angle(U_{k,s}, U~_{k,s})|||
    two_inf_proj,     // ||U~_{k,s} - P U~_{k,s}||_{2,inf}
    two_inf_aligned,  // ||U~_{k,s} - U_{k,s} O||_{2,inf}
    max_aligned,      // ||U~_{k,s} - U_{k,s} O||_max
    linear,           // ||x^T (U~_{k,s} - P U~_{k,s})||
    bilinear,         // |x^T (U~_{k,s} - P U~_{k,s}) y|
    weighted_2inf,    // ||(U~_{k,s} - P U~_{k,s}) D~_{k,s}||_{2,inf}
    weighted_aligned, // ||U~_r D~_r - U O D~_r||_{2,inf}, O Procrustes of (U, U~_r)
    sv_gap,           // sigma_k - sigma_{k+1} of the signal
};

struct QuantityQuery {
    Quantity which = Quantity::sin_theta;
    int k = 1;
    int s = 1;
    NormSpec norm = NormSpec::operator_norm();
    Vector x;
    Vector y;
};

double empirical_quantity(const PerturbationInstance& inst, const QuantityQuery& q);

// |||P_{U-perp} E P_{V~_{k,s}} (+) P_{V-perp} E^T P_{U~_{k,s}}||| for the
// signal's full rank-r bases U, V.
double cross_term_norm(const PerturbationInstance& inst, int k, int s, const NormSpec& spec);

// U_{k,s} and U~_{k,s}, V_{k,s}, V~_{k,s} as plain matrices.
Matrix signal_left(const PerturbationInstance& inst, int k, int s);
Matrix signal_right(const PerturbationInstance& inst, int k, int s);
Matrix sum_left(const PerturbationInstance& inst, int k, int s);
Matrix sum_right(const PerturbationInstance& inst, int k, int s);

}  // namespace stk
