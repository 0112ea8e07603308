// Acceptance suite: runs every criterion and prints one PASS/FAIL line each.
// Exit status 0 when all pass, 2 otherwise.

#include "oracles.hpp"
#include "stk/error.hpp"
#include "stk/harness.hpp"
#include "stk/models.hpp"
#include "stk/resolvent.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace stk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Run {
    SummaryReport report;
    double seconds = 0;
};

std::string config_path(const std::string& name) { return std::string(STK_CONFIG_DIR) + "/" + name; }

Run run_config(const std::string& name)
{
    const ExperimentConfig cfg = ExperimentConfig::load(config_path(name));
    const auto start = std::chrono::steady_clock::now();
    Run out;
    out.report = run_monte_carlo(cfg);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// Totals over every summary row whose id starts with `prefix`.
struct Totals {
    int rows = 0;
    int trials = 0;
    int valid = 0;
    int violations = 0;
    int precondition_failures = 0;
    double worst_rate = 0;
    double max_p99 = 0;
};

Totals totals(const SummaryReport& rep, const std::string& prefix)
{
    Totals t;
    for (const auto& s : rep.theorems) {
        if (s.theorem_id.rfind(prefix, 0) != 0)
            continue;
        ++t.rows;
        t.trials += s.trials;
        t.valid += s.valid;
        t.violations += s.violations;
        t.precondition_failures += s.precondition_failures;
        t.worst_rate = std::max(t.worst_rate, s.rate);
        if (s.ratio_p99)
            t.max_p99 = std::max(t.max_p99, *s.ratio_p99);
    }
    return t;
}

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Zero violations over every row with the prefix, at least one valid evaluation.
bool exact_family(const SummaryReport& rep, const std::string& prefix, std::string& detail)
{
    const Totals t = totals(rep, prefix);
    detail += fmt("%s: %d/%d valid, %d violations, p99 ratio %.3g; ", prefix.c_str(), t.valid, t.trials,
                  t.violations, t.max_p99);
    return t.rows > 0 && t.valid > 0 && t.violations == 0;
}

// Rate within budget + 3 binomial standard errors, preconditions met on every trial.
bool budget_family(const SummaryReport& rep, const std::string& prefix, double budget, std::string& detail)
{
    const Totals t = totals(rep, prefix);
    const double limit = binomial_margin(budget, std::max(1, t.valid));
    const double rate = t.valid > 0 ? static_cast<double>(t.violations) / t.valid : 1.0;
    detail += fmt("%s: rate %.4g (limit %.4g), %d/%d valid, p99 ratio %.3g; ", prefix.c_str(), rate, limit, t.valid,
                  t.trials, t.max_p99);
    return t.rows > 0 && t.valid == t.trials && t.precondition_failures == 0 && rate <= limit;
}

Outcome mirsky()
{
    const Run r = run_config("acceptance_mirsky.json");
    Outcome o;
    bool ok = true;
    for (const char* norm : {"operator", "frobenius", "nuclear", "kyfan:3"}) {
        const TheoremSummary* s = r.report.find(std::string("mirsky:") + norm);
        ok = ok && s && s->trials == 1000 && s->valid == 1000 && s->violations == 0;
    }
    o.detail = fmt("4 norms x 1000 trials, 0 violations required, %.1f s (limit 30 s)", r.seconds);
    o.pass = ok && r.seconds < 30.0;
    return o;
}

Outcome wedin()
{
    const Run r = run_config("acceptance_wedin.json");
    Outcome o;
    o.pass = exact_family(r.report, "wedin", o.detail);
    o.detail += fmt("%.1f s", r.seconds);
    return o;
}

Outcome subspace_identities()
{
    const Run r = run_config("acceptance_selftest.json");
    Outcome o;
    bool ok = true;
    for (const char* id : {"projector_cosines", "procrustes_spectrum", "frobenius_sandwich", "prop_2inf"})
        ok = exact_family(r.report, id, o.detail) && ok;
    o.pass = ok && !has_violations(r.report);
    return o;
}

struct GaussianRun {
    Run run;
    bool done = false;
};

GaussianRun& gaussian_run()
{
    static GaussianRun g;
    if (!g.done) {
        g.run = run_config("acceptance_gaussian.json");
        g.done = true;
    }
    return g;
}

Outcome gaussian_sin_theta()
{
    // The evaluator's own precondition check on the acceptance regime.
    const GaussianBoundParams p = GaussianBoundParams::make(900, 900, {2e5, 1.2e5}, 1, 1, 2.0, 1.0);
    const Run& r = gaussian_run().run;
    Outcome o;
    const bool pre = p.flags().all();
    o.detail = fmt("preconditions %s, r0 = %d; ", pre ? "true" : "false", p.r0);
    o.pass = pre && budget_family(r.report, "gauss_subspace_op", 20.0 / 1800.0, o.detail);
    o.detail += fmt("%.1f s (limit 600 s)", r.seconds);
    o.pass = o.pass && r.seconds < 600.0;
    return o;
}

Outcome sv_location()
{
    Outcome o;
    o.pass = budget_family(gaussian_run().run.report, "sv_location", 10.0 / 1800.0, o.detail);
    return o;
}

Outcome entrywise_family()
{
    const SummaryReport& rep = gaussian_run().run.report;
    Outcome o;
    bool ok = true;
    for (const char* id : {"entry_2inf", "bilinear_form", "weighted_corollary"})
        ok = budget_family(rep, id, 40.0 / 1800.0, o.detail) && ok;
    o.pass = ok;
    return o;
}

Outcome general_noise()
{
    const Run r = run_config("acceptance_general.json");
    Outcome o;
    const bool sv = exact_family(r.report, "general_sv", o.detail);
    const bool sub = exact_family(r.report, "general_subspace", o.detail);
    o.pass = sv && sub;
    return o;
}

// Probe values against dense inversion of the linearization.
bool dense_oracle_probes(std::string& detail)
{
    double worst = 0;
    int probes = 0;
    for (int dim : {5, 12, 25, 40}) {
        for (int rep = 0; rep < 5; ++rep) {
            const std::uint64_t seed = derive_seed(8080, static_cast<std::uint64_t>(dim * 10 + rep));
            const Matrix e = gen_gaussian(dim, dim, seed);
            const LinearizationSpectrum spec = LinearizationSpectrum::from_noise(e);
            const double M = 4.0 * (2.0 * std::sqrt(static_cast<double>(dim)));
            const Vector x = gen_gaussian(2 * dim, 1, derive_seed(seed, 1)).col(0).normalized();
            const Vector y = gen_gaussian(2 * dim, 1, derive_seed(seed, 2)).col(0).normalized();
            for (Complex z : {Complex(M, 0), Complex(2 * M, 0), Complex(0, 1.5 * M), Complex(-M, M)}) {
                const oracle::Phi ref = oracle::phi_dense(e, z);
                const ResolventProbe pr = phi_values(spec, z);
                const Complex bil = resolvent_bilinear(spec, z, x, y);
                const Complex bil_ref = oracle::bilinear_dense(e, z, x, y);
                auto rel = [](Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
                worst = std::max({worst, rel(pr.phi1, ref.phi1), rel(pr.phi2, ref.phi2), rel(bil, bil_ref)});
                ++probes;
            }
        }
    }
    detail += fmt("dense oracle: %d probes, worst rel. error %.2e; ", probes, worst);
    return worst <= 1e-8;
}

Outcome resolvent_identities()
{
    const Run ident = run_config("acceptance_resolvent.json");
    Outcome o;
    bool ok = true;
    for (const char* id : {"phi_identity", "varphi_monotone", "varphi_crude", "uphiu"})
        ok = exact_family(ident.report, id, o.detail) && ok;
    ok = dense_oracle_probes(o.detail) && ok;

    const Run law = run_config("acceptance_local_law.json");
    const Totals t = totals(law.report, "local_law");
    const double budget = 9.0 / std::pow(400.0, 2.0);
    const double limit = binomial_margin(budget, std::max(1, t.valid));
    const double rate = t.valid > 0 ? static_cast<double>(t.violations) / t.valid : 1.0;
    o.detail += fmt("local law: %d probes, failure rate %.4g (limit %.4g), p99 ratio %.3g", t.valid, rate, limit,
                    t.max_p99);
    o.pass = ok && t.valid == 2000 && rate <= limit;
    return o;
}

Outcome noise_event()
{
    const Run big = run_config("acceptance_noise_event.json");
    const Run small = run_config("acceptance_noise_event_small.json");
    const Totals tb = totals(big.report, "noise_norm_event");
    const Totals ts = totals(small.report, "noise_norm_event");
    const double limit = binomial_margin(2.0 * std::exp(-18.0), std::max(1, ts.valid));
    const double rate = ts.valid > 0 ? static_cast<double>(ts.violations) / ts.valid : 1.0;
    Outcome o;
    o.detail = fmt("200x200: %d/%d inside; 9x9: %d draws, failure rate %.3g (limit %.3g)", tb.valid - tb.violations,
                   tb.valid, ts.valid, rate, limit);
    o.pass = tb.valid == 500 && tb.violations == 0 && ts.valid == 100000 && rate <= limit;
    return o;
}

Outcome gmm_recovery()
{
    const Run r = run_config("acceptance_gmm.json");
    const TheoremSummary* s = r.report.find("gmm_exact");
    Outcome o;
    if (!s) {
        o.detail = "gmm_exact missing";
        return o;
    }
    const double exact = s->valid > 0 ? 1.0 - static_cast<double>(s->violations) / s->valid : 0.0;
    o.detail = fmt("thresholds met on %d/%d trials, exact recovery %.2f%%, %.1f s (limit 120 s); ", s->valid,
                   s->trials, 100 * exact, r.seconds);
    o.pass = s->trials == 100 && s->valid == 100 && exact >= 0.99 && r.seconds < 120.0;

    const Run practical = run_config("acceptance_gmm_practical.json");
    const TheoremSummary* p = practical.report.find("gmm_rate");
    if (p && p->ratio_p50)
        o.detail += fmt("practical regime median misclassification %.4f (informational, target <= 0.05)",
                        *p->ratio_p50);
    return o;
}

Outcome submatrix_recovery()
{
    const Run r = run_config("acceptance_submatrix.json");
    const TheoremSummary* s = r.report.find("submatrix_exact");
    Outcome o;
    if (!s) {
        o.detail = "submatrix_exact missing";
        return o;
    }
    const double exact = s->valid > 0 ? 1.0 - static_cast<double>(s->violations) / s->valid : 0.0;
    o.detail = fmt("thresholds met on %d/%d trials, exact family recovery %.2f%%", s->valid, s->trials, 100 * exact);
    o.pass = s->trials == 100 && s->valid == 100 && exact >= 0.99;
    return o;
}

Outcome reproducibility()
{
    Outcome o;
    o.pass = true;
    int checked = 0;
    for (const char* name :
         {"acceptance_mirsky.json", "acceptance_wedin.json", "acceptance_selftest.json", "acceptance_general.json",
          "acceptance_resolvent.json", "acceptance_local_law.json", "acceptance_noise_event.json",
          "acceptance_gmm.json", "acceptance_gmm_practical.json", "acceptance_submatrix.json",
          "acceptance_gaussian.json"}) {
        ExperimentConfig cfg = ExperimentConfig::load(config_path(name));
        // The 900 x 900 regime is rerun on a prefix of its trials to bound runtime.
        if (cfg.scenario == Scenario::bounds && cfg.low_rank.rows >= 900)
            cfg.trials = std::min(cfg.trials, 4);
        const std::string a = render_report(run_monte_carlo(cfg), cfg.format);
        const std::string b = render_report(run_monte_carlo(cfg), cfg.format);
        if (a != b) {
            o.pass = false;
            o.detail += std::string(name) + " differs; ";
        }
        ++checked;
    }
    o.detail += fmt("%d configs rerun, reports compared byte for byte", checked);
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 mirsky", mirsky},
        {"2 wedin", wedin},
        {"3 subspace identities", subspace_identities},
        {"4 gaussian sin-theta", gaussian_sin_theta},
        {"5 singular value location", sv_location},
        {"6 entrywise/bilinear/weighted", entrywise_family},
        {"7 general-noise bounds", general_noise},
        {"8 resolvent identities", resolvent_identities},
        {"9 spectral-norm event", noise_event},
        {"10 gmm recovery", gmm_recovery},
        {"11 submatrix recovery", submatrix_recovery},
        {"12 reproducibility", reproducibility},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " -- " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 2;
}
