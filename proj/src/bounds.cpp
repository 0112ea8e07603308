#include "stk/bounds.hpp"

#include "stk/error.hpp"
#include "stk/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace stk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog9 = std::log(9.0);

double sq(double x) { return x * x; }

double lead_ratio(double b) { return b * b / sq(b - 1.0); }

void check_window(int k, int s, int r, const char* who)
{
    if (k < 1 || s < k || s > r)
        throw InvalidParameter(std::string(who) + ": need 1 <= k <= s <= r");
}

BoundReport gaussian_report(const GaussianBoundParams& p, std::string id, double bound, double prob_factor)
{
    BoundReport rep;
    rep.theorem_id = std::move(id);
    rep.bound_value = bound;
    rep.preconditions = p.flags();
    rep.precondition_met = rep.preconditions.all();
    rep.probability_floor = rep.precondition_met ? p.probability(prob_factor, p.K) : 0.0;
    return rep;
}

BoundReport shape_report(const GaussianBoundParams& p, std::string id, double bound)
{
    BoundReport rep;
    rep.theorem_id = std::move(id);
    rep.bound_value = bound;
    rep.preconditions = p.flags();
    rep.precondition_met = rep.preconditions.all();
    rep.quantitative = false;
    rep.probability_floor = 0.0;
    return rep;
}

double indicator_not_full(const GaussianBoundParams& p) { return (p.s - p.k + 1) != p.r ? 1.0 : 0.0; }

// Singular values of W - B (B^T W) for orthonormal B, i.e. of P_{B-perp} W.
Vector residual_singulars(const Matrix& basis, const Matrix& w)
{
    const Matrix res = w - basis * (basis.transpose() * w);
    return singular_values(res);
}

Vector concat(const Vector& a, const Vector& b)
{
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

std::string fmt(double x)
{
    if (!std::isfinite(x))
        return "";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

double chi_of(double b) { return 1.0 + 1.0 / (4.0 * b * (b - 1.0)); }
double xi_of(double b) { return 1.0 + 1.0 / (2.0 * sq(b - 1.0)); }

// ---------------------------------------------------------------------------

GaussianBoundParams GaussianBoundParams::make(int N, int n, std::vector<double> sigma, int k, int s, double b,
                                              double K, std::optional<double> noise_norm)
{
    if (N < 1 || n < 1)
        throw InvalidParameter("GaussianBoundParams: dimensions must be positive");
    if (sigma.empty() || static_cast<int>(sigma.size()) > std::min(N, n))
        throw InvalidParameter("GaussianBoundParams: need 1 <= r <= min(N, n)");
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (!(sigma[i] > 0) || !std::isfinite(sigma[i]))
            throw InvalidParameter("GaussianBoundParams: singular values must be positive and finite");
        if (i > 0 && sigma[i] > sigma[i - 1])
            throw InvalidParameter("GaussianBoundParams: singular values must be descending");
    }
    if (!(b >= 2.0))
        throw InvalidParameter("GaussianBoundParams: b must be at least 2");
    if (!(K > 0))
        throw InvalidParameter("GaussianBoundParams: K must be positive");
    if (noise_norm && !(*noise_norm >= 0))
        throw InvalidParameter("GaussianBoundParams: noise norm must be nonnegative");

    GaussianBoundParams p;
    p.N = N;
    p.n = n;
    p.r = static_cast<int>(sigma.size());
    p.k = k;
    p.s = s;
    p.b = b;
    p.K = K;
    p.sigma = std::move(sigma);
    p.noise_norm = noise_norm;
    check_window(k, s, p.r, "GaussianBoundParams");

    const double lg = p.log_dim();
    const double rr = static_cast<double>(p.r);
    p.eta = 11.0 * lead_ratio(b) * std::sqrt(2.0 * kLog9 * rr + (K + 7.0) * lg);
    p.gamma = 9.0 * lead_ratio(b) * std::sqrt(rr * (K + 7.0) * lg);
    p.chi = chi_of(b);
    p.xi = xi_of(b);
    p.M = 2.0 * b * (std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n)));
    p.k0 = std::min(k, p.r - k);

    const double snr_floor = p.M + 80.0 * b * p.eta * rr;
    const double gap_floor = 75.0 * p.chi * p.eta * rr;
    p.r0 = 0;
    for (int i = p.r; i >= 1; --i) {
        if (p.sigma_at(i) >= snr_floor && p.gap(i) >= gap_floor) {
            p.r0 = i;
            break;
        }
    }
    return p;
}

double GaussianBoundParams::sigma_at(int i) const
{
    if (i <= 0)
        return kInf;
    if (i > r)
        return 0.0;
    return sigma[static_cast<std::size_t>(i - 1)];
}

double GaussianBoundParams::gap(int i) const
{
    if (i <= 0)
        return kInf;
    return sigma_at(i) - sigma_at(i + 1);
}

double GaussianBoundParams::min_gap() const { return std::min(gap(k - 1), gap(s)); }

double GaussianBoundParams::log_dim() const { return std::log(static_cast<double>(N) + static_cast<double>(n)); }

double GaussianBoundParams::effective_noise_norm() const
{
    if (noise_norm)
        return *noise_norm;
    return 2.0 * (std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n)));
}

double GaussianBoundParams::constant(ConstantForm form) const
{
    const double top = form == ConstantForm::statement ? b + 1.0 : b + 2.0;
    return sq(top) / sq(b - 1.0);
}

double GaussianBoundParams::probability(double factor, double power) const
{
    const double v = 1.0 - factor * std::pow(static_cast<double>(N) + static_cast<double>(n), -power);
    return std::clamp(v, 0.0, 1.0);
}

PreconditionFlags GaussianBoundParams::flags() const
{
    PreconditionFlags f;
    const double rr = static_cast<double>(r);
    f.dim_ok = sq(std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n))) >=
               32.0 * (K + 7.0) * log_dim() + 64.0 * kLog9 * rr;
    f.snr_ok = r0 >= 1 && s <= r0;
    f.gap_ok = min_gap() >= 75.0 * chi * eta * rr;
    return f;
}

// ---------------------------------------------------------------------------

bool exceeds(double empirical, double bound)
{
    if (std::isinf(bound) && bound > 0)
        return false;
    return empirical > bound + 1e-9 * std::max(1.0, std::abs(bound));
}

void BoundReport::set_empirical(double value)
{
    empirical = value;
    if (bound_value > 0 && std::isfinite(bound_value))
        ratio = value / bound_value;
    else if (value == 0.0)
        ratio = 0.0;
    else
        ratio.reset();
    violated = exceeds(value, bound_value);
}

nlohmann::json to_json(const BoundReport& report)
{
    auto num = [](std::optional<double> v) -> nlohmann::json {
        if (v && std::isfinite(*v))
            return *v;
        return nullptr;
    };
    nlohmann::json j;
    j["theorem_id"] = report.theorem_id;
    j["bound"] = num(report.bound_value);
    j["empirical"] = num(report.empirical);
    j["ratio"] = num(report.ratio);
    j["prob_floor"] = report.probability_floor;
    j["pre_dim"] = report.preconditions.dim_ok;
    j["pre_snr"] = report.preconditions.snr_ok;
    j["pre_gap"] = report.preconditions.gap_ok;
    j["violated"] = report.violated ? nlohmann::json(*report.violated) : nlohmann::json(nullptr);
    return j;
}

std::string csv_header() { return "theorem_id,bound,empirical,ratio,prob_floor,pre_dim,pre_snr,pre_gap,violated"; }

std::string csv_row(const BoundReport& report)
{
    std::ostringstream os;
    os << report.theorem_id << ',' << fmt(report.bound_value) << ',' << (report.empirical ? fmt(*report.empirical) : "")
       << ',' << (report.ratio ? fmt(*report.ratio) : "") << ',' << fmt(report.probability_floor) << ','
       << report.preconditions.dim_ok << ',' << report.preconditions.snr_ok << ',' << report.preconditions.gap_ok
       << ',' << (report.violated ? (*report.violated ? "1" : "0") : "");
    return os.str();
}

// ---------------------------------------------------------------------------

Matrix signal_left(const PerturbationInstance& inst, int k, int s)
{
    check_window(k, s, inst.signal_rank(), "signal_left");
    return inst.svd_signal.left_cols(k - 1, s);
}

Matrix signal_right(const PerturbationInstance& inst, int k, int s)
{
    check_window(k, s, inst.signal_rank(), "signal_right");
    return inst.svd_signal.right_cols(k - 1, s);
}

Matrix sum_left(const PerturbationInstance& inst, int k, int s)
{
    check_window(k, s, static_cast<int>(inst.svd_sum.size()), "sum_left");
    return inst.svd_sum.left_cols(k - 1, s);
}

Matrix sum_right(const PerturbationInstance& inst, int k, int s)
{
    check_window(k, s, static_cast<int>(inst.svd_sum.size()), "sum_right");
    return inst.svd_sum.right_cols(k - 1, s);
}

BoundReport mirsky_check(const PerturbationInstance& inst, const NormSpec& spec)
{
    if (!spec.unitarily_invariant())
        throw InvalidParameter("mirsky_check: norm must be unitarily invariant");
    const Eigen::Index m = std::min(inst.sum.rows(), inst.sum.cols());
    Vector clean = Vector::Zero(m);
    const Eigen::Index have = std::min<Eigen::Index>(m, inst.svd_signal.size());
    clean.head(have) = inst.svd_signal.singulars.head(have);
    const Vector diff = clean - inst.svd_sum.singulars.head(m);

    BoundReport rep;
    rep.theorem_id = "mirsky";
    rep.bound_value = apply_norm(inst.noise, spec);
    rep.preconditions = PreconditionFlags::satisfied();
    rep.precondition_met = true;
    rep.probability_floor = 1.0;
    rep.set_empirical(gauge(diff, spec));
    return rep;
}

std::pair<BoundReport, BoundReport> wedin_check(const PerturbationInstance& inst, int k, const NormSpec& spec)
{
    if (!spec.unitarily_invariant())
        throw InvalidParameter("wedin_check: norm must be unitarily invariant");
    const int r = inst.signal_rank();
    if (k < 1 || k > r)
        throw InvalidParameter("wedin_check: need 1 <= k <= rank(A)");

    const double sigma_k = inst.svd_signal.singulars(k - 1);
    const double next = k < inst.svd_sum.size() ? inst.svd_sum.singulars(k) : 0.0;
    const double delta_hat = sigma_k - next;

    const Matrix uk = signal_left(inst, 1, k);
    const Matrix vk = signal_right(inst, 1, k);
    const Matrix ut = sum_left(inst, 1, k);
    const Matrix vt = sum_right(inst, 1, k);

    BoundReport base;
    base.preconditions = PreconditionFlags::satisfied();
    base.preconditions.gap_ok = delta_hat > 0;
    base.precondition_met = delta_hat > 0;
    base.probability_floor = base.precondition_met ? 1.0 : 0.0;
    if (base.precondition_met) {
        const double left = gauge(residual_singulars(uk, inst.noise * vt), spec);
        const double right = gauge(residual_singulars(vk, inst.noise.transpose() * ut), spec);
        base.bound_value = std::max(left, right) / delta_hat;
    } else {
        base.bound_value = kInf;
    }

    BoundReport u = base;
    u.theorem_id = "wedin_u";
    u.set_empirical(sin_theta_norm(OrthonormalBasis(uk), OrthonormalBasis(ut), spec));
    BoundReport v = base;
    v.theorem_id = "wedin_v";
    v.set_empirical(sin_theta_norm(OrthonormalBasis(vk), OrthonormalBasis(vt), spec));
    if (!base.precondition_met) {
        u.violated.reset();
        v.violated.reset();
    }
    return {u, v};
}

// ---------------------------------------------------------------------------

BoundReport gauss_subspace_bound(const GaussianBoundParams& p, SubspaceVariant variant,
                                 std::optional<double> cross_term_norm, ConstantForm form)
{
    check_window(p.k, p.s, p.r, "gauss_subspace_bound");
    const double width = static_cast<double>(p.s - p.k + 1);
    const std::string suffix = form == ConstantForm::proof ? "_proof" : "";

    switch (variant) {
    case SubspaceVariant::general_norm: {
        if (!cross_term_norm)
            throw InvalidParameter("gauss_subspace_bound: general-norm variant needs the cross-term norm");
        const double window = std::min(width, static_cast<double>(p.r) - width);
        const double first = 6.0 * std::sqrt(2.0) * p.constant(form) * std::sqrt(std::max(0.0, window)) * p.eta *
                             std::sqrt(width) / p.min_gap();
        const double bound = first + 2.0 * *cross_term_norm / p.sigma_at(p.s);
        return gaussian_report(p, "gauss_subspace_general" + suffix, bound, 20.0);
    }
    case SubspaceVariant::operator_norm: {
        const double first =
            3.0 * std::sqrt(2.0) * p.constant(form) * indicator_not_full(p) * p.eta * std::sqrt(width) / p.min_gap();
        const double bound = first + 2.0 * p.effective_noise_norm() / p.sigma_at(p.s);
        return gaussian_report(p, "gauss_subspace_op" + suffix, bound, 20.0);
    }
    case SubspaceVariant::simplified: {
        const double kk = static_cast<double>(p.k);
        const double first = std::sqrt(kk * p.k0) * std::sqrt(p.r + p.log_dim()) / p.gap(p.k);
        const double bound = first + kk * p.effective_noise_norm() / p.sigma_at(p.k);
        return shape_report(p, "gauss_subspace_simplified", bound);
    }
    }
    throw InvalidParameter("gauss_subspace_bound: unknown variant");
}

BoundReport gauss_sv_location_check(const PerturbationInstance& inst, const GaussianBoundParams& p, int j,
                                    const std::function<double(double)>& phi_at)
{
    if (j < p.k || j > p.s)
        throw InvalidParameter("gauss_sv_location_check: j must lie in [k, s]");
    if (j > inst.svd_sum.size())
        throw InvalidParameter("gauss_sv_location_check: j exceeds min(N, n)");

    BoundReport rep;
    rep.theorem_id = "sv_location";
    rep.preconditions = p.flags();
    rep.precondition_met = rep.preconditions.all();

    const double st = inst.svd_sum.singulars(j - 1);
    double phi = 0.0;
    try {
        phi = phi_at(st);
    } catch (const DomainError&) {
        rep.precondition_met = false;
        rep.probability_floor = 0.0;
        rep.bound_value = 0.0;
        return rep;
    }
    rep.probability_floor = rep.precondition_met ? p.probability(10.0, p.K) : 0.0;

    const double w = 20.0 * p.chi * p.eta * p.r;
    int best = -1;
    bool best_inside = false;
    double best_score = kInf;
    double best_res = 0.0;
    double best_allow = 0.0;
    for (int j0 = p.k; j0 <= p.s; ++j0) {
        const double s0 = p.sigma_at(j0);
        const bool inside = st >= s0 - w && st <= p.chi * s0 + w;
        const double residual = std::abs(phi - s0 * s0);
        const double allowance = 20.0 * p.xi * p.chi * p.eta * p.r * (st + p.chi * s0);
        const double score = residual / allowance;
        // Prefer members of the location set, then the smallest relative residual.
        if (best < 0 || (inside && !best_inside) || (inside == best_inside && score < best_score)) {
            best = j0;
            best_inside = inside;
            best_score = score;
            best_res = residual;
            best_allow = allowance;
        }
    }
    rep.chosen_index = best;
    rep.bound_value = best_allow;
    rep.set_empirical(best_res);
    rep.violated = *rep.violated || !best_inside;
    return rep;
}

IncoherenceStats IncoherenceStats::from_instance(const PerturbationInstance& inst, int k)
{
    const int r = inst.signal_rank();
    IncoherenceStats inc;
    inc.u_2inf = two_inf_norm(signal_left(inst, 1, r));
    inc.v_2inf = two_inf_norm(signal_right(inst, 1, r));
    if (k >= 1 && k <= r)
        inc.window_2inf = two_inf_norm(signal_left(inst, 1, k));
    return inc;
}

BoundReport entrywise_bound(const GaussianBoundParams& p, const IncoherenceStats& inc, EntrywiseForm form)
{
    check_window(p.k, p.s, p.r, "entrywise_bound");
    if (inc.u_2inf < 0 || inc.u_2inf > 1.0 + 1e-12)
        throw InvalidParameter("entrywise_bound: ||U||_{2,inf} must lie in [0, 1]");
    const double u = inc.u_2inf;
    const double lg = p.log_dim();
    const double rr = static_cast<double>(p.r);
    const double kk = static_cast<double>(p.k);

    switch (form) {
    case EntrywiseForm::vector_inf: {
        const double gapk = std::min(p.gap(p.k - 1), p.gap(p.k));
        const double bound =
            std::sqrt(rr + lg) / gapk * u + std::sqrt(rr * lg) / p.sigma_at(p.k) * (1.0 + u);
        return shape_report(p, "entry_vector_inf", bound);
    }
    case EntrywiseForm::matrix_2inf: {
        const double bound = std::sqrt(kk) * std::sqrt(rr + lg) / p.gap(p.k) * u +
                             std::sqrt(kk) * std::sqrt(rr * lg) / p.sigma_at(p.k) * (1.0 + u);
        return shape_report(p, "entry_matrix_2inf", bound);
    }
    case EntrywiseForm::corollary_aligned: {
        const double head = inc.window_2inf.value_or(u);
        const double e = p.effective_noise_norm();
        const double bound = std::sqrt(kk) * std::sqrt(rr + lg) / p.gap(p.k) * u +
                             std::sqrt(kk) * std::sqrt(rr * lg) / p.sigma_at(p.k) * (1.0 + u) +
                             sq(e) / sq(p.sigma_at(p.k)) * head;
        return shape_report(p, "entry_aligned", bound);
    }
    case EntrywiseForm::infnorm_nonasymptotic: {
        const double width = static_cast<double>(p.s - p.k + 1);
        const double first = 3.0 * std::sqrt(2.0) * p.constant(ConstantForm::statement) * u * p.eta *
                             std::sqrt(width) / p.min_gap() * indicator_not_full(p);
        const double n2 = sq(static_cast<double>(p.n));
        double acc = 0.0;
        for (int i = p.k; i <= p.s; ++i) {
            const double si = p.sigma_at(i);
            acc += si <= n2 ? sq(p.gamma) / sq(si) : 16.0 * p.n / sq(si);
        }
        const double bound = first + 2.0 * std::sqrt(2.0) * lead_ratio(p.b) * (1.0 + u) * std::sqrt(acc);
        return gaussian_report(p, "entry_2inf", bound, 40.0);
    }
    }
    throw InvalidParameter("entrywise_bound: unknown form");
}

std::pair<BoundReport, BoundReport> linear_bilinear_bound(const GaussianBoundParams& p, double xU_norm,
                                                          const Vector& y)
{
    check_window(p.k, p.s, p.r, "linear_bilinear_bound");
    const int width = p.s - p.k + 1;
    if (y.size() != width)
        throw InvalidInput("linear_bilinear_bound: y must have length s - k + 1");
    if (std::abs(y.norm() - 1.0) > 1e-8)
        throw InvalidInput("linear_bilinear_bound: y must be a unit vector");
    if (!(xU_norm >= 0) || xU_norm > 1.0 + 1e-12)
        throw InvalidParameter("linear_bilinear_bound: ||x^T U|| must lie in [0, 1]");

    const double head = 3.0 * std::sqrt(2.0) * p.constant(ConstantForm::statement) * xU_norm * p.eta /
                        p.min_gap() * indicator_not_full(p);
    const double tail = 2.0 * std::sqrt(2.0) * lead_ratio(p.b) * p.gamma * (1.0 + xU_norm);

    double inv_sq = 0.0;
    double weighted = 0.0;
    int support = 0;
    for (int i = p.k; i <= p.s; ++i) {
        const double si = p.sigma_at(i);
        const double yi = y(i - p.k);
        inv_sq += 1.0 / sq(si);
        weighted += std::abs(yi) / si;
        support += yi != 0.0 ? 1 : 0;
    }

    BoundReport lin = gaussian_report(p, "linear_form", head * std::sqrt(static_cast<double>(width)) +
                                                            tail * std::sqrt(inv_sq), 40.0);
    BoundReport bil = gaussian_report(p, "bilinear_form",
                                      head * std::sqrt(static_cast<double>(support)) + tail * weighted, 40.0);
    const bool small_signal = p.sigma_at(1) <= sq(static_cast<double>(p.n));
    for (BoundReport* rep : {&lin, &bil}) {
        if (!small_signal) {
            rep->precondition_met = false;
            rep->probability_floor = 0.0;
        }
    }
    return {lin, bil};
}

BoundReport weighted_bound(const GaussianBoundParams& p, const IncoherenceStats& inc, WeightedForm form)
{
    check_window(p.k, p.s, p.r, "weighted_bound");
    const double u = inc.u_2inf;
    if (form == WeightedForm::theorem) {
        const double width = static_cast<double>(p.s - p.k + 1);
        const double first = 3.0 * std::sqrt(2.0) * p.constant(ConstantForm::statement) * u * p.eta *
                             p.sigma_at(p.k) * std::sqrt(width) / p.min_gap() * indicator_not_full(p);
        const double second =
            2.0 * std::sqrt(2.0) * lead_ratio(p.b) * (1.0 + u) * std::sqrt(sq(p.gamma) * width + 16.0);
        return gaussian_report(p, "weighted", first + second, 40.0);
    }
    if (p.k != 1 || p.s != p.r)
        throw InvalidParameter("weighted_bound: the corollary needs k = 1 and s = r");
    const double c = 36.0 * sq(lead_ratio(p.b));
    const double e = p.effective_noise_norm();
    const double bound = c * p.r * std::sqrt((p.K + 7.0) * p.log_dim()) * (1.0 + u) + 2.0 * u * sq(e) / p.sigma_at(p.r);
    return gaussian_report(p, "weighted_corollary", bound, 40.0);
}

// ---------------------------------------------------------------------------

void GeneralNoiseParams::validate() const
{
    if (!(L >= 0) || !(B >= 0) || !(t >= 0))
        throw InvalidParameter("GeneralNoiseParams: L, B, t must be nonnegative");
    if (!(epsilon > 0 && epsilon < 1))
        throw InvalidParameter("GeneralNoiseParams: epsilon must lie in (0, 1)");
}

std::pair<BoundReport, BoundReport> general_sv_bounds(const PerturbationInstance& inst, int k,
                                                      const GeneralNoiseParams& gp)
{
    gp.validate();
    const int r = inst.signal_rank();
    if (k < 1 || k > r)
        throw InvalidParameter("general_sv_bounds: need 1 <= k <= r");
    const double sk = inst.svd_signal.singulars(k - 1);
    const double st = inst.svd_sum.singulars(k - 1);
    const double kk = static_cast<double>(k);

    BoundReport lower;
    lower.theorem_id = "general_sv_lower";
    lower.preconditions = PreconditionFlags::satisfied();
    lower.precondition_met = true;
    lower.probability_floor = 1.0 - gp.epsilon;
    lower.bound_value = gp.t;
    lower.set_empirical(sk - st);

    BoundReport upper;
    upper.theorem_id = "general_sv_upper";
    upper.preconditions = PreconditionFlags::satisfied();
    upper.precondition_met = st > 0;
    upper.probability_floor = upper.precondition_met ? 1.0 - gp.epsilon : 0.0;
    if (upper.precondition_met) {
        upper.bound_value = 2.0 * std::sqrt(kk) * sq(gp.B) / st + kk * gp.B * sq(gp.B) / sq(st) + gp.L;
        upper.set_empirical(st - sk);
    } else {
        upper.bound_value = kInf;
    }
    return {lower, upper};
}

BoundReport general_subspace_bound(int k, int r, double delta_k, double sigma_k, const GeneralNoiseParams& gp,
                                   const NormSpec& spec)
{
    gp.validate();
    if (k < 1 || k > r)
        throw InvalidParameter("general_subspace_bound: need 1 <= k <= r");
    if (!spec.unitarily_invariant())
        throw InvalidParameter("general_subspace_bound: norm must be unitarily invariant");
    if (!(sigma_k > 0) || !(delta_k >= 0))
        throw InvalidParameter("general_subspace_bound: need sigma_k > 0 and delta_k >= 0");

    BoundReport rep;
    rep.preconditions = PreconditionFlags::satisfied();
    rep.preconditions.gap_ok = delta_k >= 2.0 * gp.L && delta_k > 0;
    rep.precondition_met = rep.preconditions.gap_ok;
    rep.probability_floor = rep.precondition_met ? 1.0 - gp.epsilon : 0.0;

    const double kk = static_cast<double>(k);
    const double inner = delta_k > 0 ? gp.L / delta_k + 2.0 * sq(gp.B) / (delta_k * sigma_k) : kInf;
    if (spec.kind() == NormSpec::Kind::operator_norm) {
        rep.theorem_id = "general_subspace_op";
        const double first = k < r ? 2.0 * std::sqrt(kk) * inner : 0.0;
        rep.bound_value = first + 2.0 * gp.B / sigma_k;
    } else {
        rep.theorem_id = "general_subspace";
        const double window = static_cast<double>(std::min(k, r - k));
        const double first = window > 0 ? 2.0 * std::sqrt(kk * window) * inner : 0.0;
        rep.bound_value = first + 2.0 * kk * gp.B / sigma_k;
    }
    return rep;
}

double fbounded_probability(const std::function<double(double)>& f, double t, int r, int k, double delta_k)
{
    if (r < 1 || k < 1 || k > r)
        throw InvalidParameter("fbounded_probability: need 1 <= k <= r");
    auto term = [&](int m, double arg) {
        const double tail = f(arg);
        if (tail <= 0.0)
            return 0.0;
        const double mm = static_cast<double>(m);
        return std::exp(2.0 * std::log(mm) + 2.0 * mm * kLog9 + std::log(tail));
    };
    const double v = 1.0 - term(r, t / (2.0 * r)) - term(k, delta_k / (4.0 * k));
    return std::clamp(v, 0.0, 1.0);
}

// ---------------------------------------------------------------------------

double cross_term_norm(const PerturbationInstance& inst, int k, int s, const NormSpec& spec)
{
    const int r = inst.signal_rank();
    const Matrix u = signal_left(inst, 1, r);
    const Matrix v = signal_right(inst, 1, r);
    const Matrix ut = sum_left(inst, k, s);
    const Matrix vt = sum_right(inst, k, s);
    const Vector a = residual_singulars(u, inst.noise * vt);
    const Vector b = residual_singulars(v, inst.noise.transpose() * ut);
    return gauge(concat(a, b), spec);
}

double empirical_quantity(const PerturbationInstance& inst, const QuantityQuery& q)
{
    const int r = inst.signal_rank();
    if (q.which == Quantity::sv_gap) {
        if (q.k < 1 || q.k > r)
            throw InvalidParameter("empirical_quantity: k out of range");
        const double next = q.k < r ? inst.svd_signal.singulars(q.k) : 0.0;
        return inst.svd_signal.singulars(q.k - 1) - next;
    }
    if (q.which == Quantity::weighted_aligned) {
        const Matrix u = signal_left(inst, 1, r);
        const Matrix ut = sum_left(inst, 1, r);
        const Matrix o = procrustes_align(OrthonormalBasis(u), OrthonormalBasis(ut));
        const auto d = inst.svd_sum.singulars.head(r).asDiagonal();
        return two_inf_norm(ut * d - u * o * d);
    }

    check_window(q.k, q.s, r, "empirical_quantity");
    const Matrix u = signal_left(inst, q.k, q.s);
    const Matrix ut = sum_left(inst, q.k, q.s);
    const Matrix proj_res = ut - u * (u.transpose() * ut);

    switch (q.which) {
    case Quantity::sin_theta:
        return sin_theta_norm(OrthonormalBasis(u), OrthonormalBasis(ut), q.norm);
    case Quantity::two_inf_proj:
        return two_inf_norm(proj_res);
    case Quantity::two_inf_aligned:
    case Quantity::max_aligned: {
        const Matrix o = procrustes_align(OrthonormalBasis(u), OrthonormalBasis(ut));
        const Matrix diff = ut - u * o;
        return q.which == Quantity::two_inf_aligned ? two_inf_norm(diff) : max_norm(diff);
    }
    case Quantity::linear:
        if (q.x.size() != u.rows())
            throw InvalidInput("empirical_quantity: x must have length N");
        return (q.x.transpose() * proj_res).norm();
    case Quantity::bilinear:
        if (q.x.size() != u.rows() || q.y.size() != u.cols())
            throw InvalidInput("empirical_quantity: x in R^N and y in R^{s-k+1} required");
        return std::abs(q.x.dot(proj_res * q.y));
    case Quantity::weighted_2inf:
        return two_inf_norm(proj_res * inst.svd_sum.singulars.segment(q.k - 1, q.s - q.k + 1).asDiagonal());
    default:
        break;
    }
    throw InvalidParameter("empirical_quantity: unknown quantity");
}

}  // namespace stk
