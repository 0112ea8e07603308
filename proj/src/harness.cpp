#include "stk/harness.hpp"

#include "stk/error.hpp"
#include "stk/kernels.hpp"
#include "stk/resolvent.hpp"
#include "stk/subspace.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#ifndef STK_VERSION
#define STK_VERSION "0.0.0"
#endif

namespace stk {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Names.

Scenario parse_scenario(const std::string& name)
{
    if (name == "bounds")
        return Scenario::bounds;
    if (name == "gmm")
        return Scenario::gmm;
    if (name == "submatrix")
        return Scenario::submatrix;
    if (name == "resolvent")
        return Scenario::resolvent;
    if (name == "selftest")
        return Scenario::selftest;
    throw ConfigError("unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario s)
{
    switch (s) {
    case Scenario::bounds:
        return "bounds";
    case Scenario::gmm:
        return "gmm";
    case Scenario::submatrix:
        return "submatrix";
    case Scenario::resolvent:
        return "resolvent";
    case Scenario::selftest:
        return "selftest";
    }
    return "bounds";
}

ReportFormat parse_format(const std::string& name)
{
    if (name == "csv")
        return ReportFormat::csv;
    if (name == "json")
        return ReportFormat::json;
    throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

std::vector<std::string> known_theorems(Scenario s)
{
    switch (s) {
    case Scenario::bounds:
        return {"mirsky",          "wedin",           "gauss_subspace_op", "gauss_subspace_general",
                "gauss_subspace_simplified", "sv_location", "general_sv",  "general_subspace",
                "entry_2inf",      "entry_vector_inf", "entry_matrix_2inf", "entry_aligned",
                "linear_form",     "bilinear_form",   "weighted",          "weighted_corollary",
                "noise_norm_event"};
    case Scenario::gmm:
        return {"gmm_exact", "gmm_embedding", "gmm_rate"};
    case Scenario::submatrix:
        return {"submatrix_exact"};
    case Scenario::resolvent:
        return {"phi_identity",  "varphi_monotone", "varphi_crude",     "uphiu",         "local_law",
                "resolvent_norm", "resolvent_first", "resolvent_second", "phi_modulus",   "solve_zj",
                "noise_norm_event"};
    case Scenario::selftest:
        return {"mirsky",        "wedin",         "projector_cosines", "procrustes_spectrum",
                "frobenius_sandwich", "prop_2inf", "phi_identity",      "uphiu"};
    }
    return {};
}

namespace {

std::vector<std::string> default_theorems(Scenario s)
{
    switch (s) {
    case Scenario::bounds:
        return {"mirsky", "wedin"};
    case Scenario::gmm:
        return {"gmm_exact", "gmm_embedding", "gmm_rate"};
    case Scenario::submatrix:
        return {"submatrix_exact"};
    case Scenario::resolvent:
        return {"phi_identity", "varphi_monotone", "varphi_crude", "uphiu", "local_law"};
    case Scenario::selftest:
        return known_theorems(Scenario::selftest);
    }
    return {};
}

bool wants(const ExperimentConfig& cfg, const std::string& id)
{
    return std::find(cfg.theorems.begin(), cfg.theorems.end(), id) != cfg.theorems.end();
}

template <class T>
T get_or(const json& obj, const char* key, T fallback)
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return fallback;
    return obj.at(key).get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config.

ExperimentConfig ExperimentConfig::from_json(const json& doc)
{
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;
    cfg.source = doc;
    try {
        cfg.scenario = parse_scenario(get_or<std::string>(doc, "scenario", "bounds"));
        cfg.trials = get_or<int>(doc, "trials", 1);
        cfg.base_seed = get_or<std::uint64_t>(doc, "base_seed", 0);
        cfg.theorems = get_or<std::vector<std::string>>(doc, "theorems", {});
        if (cfg.theorems.empty())
            cfg.theorems = default_theorems(cfg.scenario);
        if (doc.contains("norms")) {
            cfg.norms.clear();
            for (const auto& name : doc.at("norms").get<std::vector<std::string>>())
                cfg.norms.push_back(NormSpec::parse(name));
        }
        if (doc.contains("low_rank")) {
            const json& lr = doc.at("low_rank");
            cfg.low_rank.rows = lr.at("rows").get<int>();
            cfg.low_rank.cols = lr.at("cols").get<int>();
            cfg.low_rank.singulars = lr.at("singulars").get<std::vector<double>>();
            const std::string mode = get_or<std::string>(lr, "mode", "haar");
            if (mode == "haar")
                cfg.low_rank.mode = FactorMode::haar;
            else if (mode == "coherent")
                cfg.low_rank.mode = FactorMode::coherent;
            else
                throw ConfigError("low_rank.mode must be haar or coherent");
            cfg.low_rank.coherent_row = get_or<int>(lr, "coherent_row", 0);
        }
        cfg.fixed_signal = get_or<bool>(doc, "fixed_signal", false);
        if (doc.contains("noise")) {
            const json& nz = doc.at("noise");
            if (nz.contains("norm_range")) {
                const auto range = nz.at("norm_range").get<std::vector<double>>();
                if (range.size() != 2)
                    throw ConfigError("noise.norm_range must have two entries");
                cfg.noise.norm_min = range[0];
                cfg.noise.norm_max = range[1];
            }
        }
        if (doc.contains("gaussian")) {
            const json& g = doc.at("gaussian");
            cfg.gaussian.b = get_or<double>(g, "b", 2.0);
            cfg.gaussian.K = get_or<double>(g, "K", 1.0);
            cfg.gaussian.k = get_or<int>(g, "k", 1);
            cfg.gaussian.s = get_or<int>(g, "s", cfg.gaussian.k);
            cfg.gaussian.both_constants = get_or<bool>(g, "both_constants", false);
        }
        cfg.wedin_k = get_or<std::vector<int>>(doc, "wedin_k", {});
        if (doc.contains("gmm")) {
            const json& g = doc.at("gmm");
            cfg.gmm.dim = g.at("dim").get<int>();
            cfg.gmm.samples = g.at("samples").get<int>();
            cfg.gmm.clusters = g.at("clusters").get<int>();
            cfg.gmm.center_scale = get_or<double>(g, "center_scale", 0.0);
            if (g.contains("delta"))
                cfg.gmm.delta = g.at("delta").get<double>();
            cfg.gmm.L = get_or<double>(g, "L", 1.0);
            cfg.gmm.noiseless = get_or<bool>(g, "noiseless", false);
        }
        if (doc.contains("submatrix")) {
            const json& s = doc.at("submatrix");
            cfg.submatrix.rows = s.at("rows").get<int>();
            cfg.submatrix.cols = s.at("cols").get<int>();
            cfg.submatrix.block_rows = s.at("block_rows").get<int>();
            cfg.submatrix.block_cols = s.at("block_cols").get<int>();
            cfg.submatrix.amplitudes = s.at("amplitudes").get<std::vector<double>>();
            cfg.submatrix.L = get_or<double>(s, "L", 1.0);
            cfg.submatrix.noiseless = get_or<bool>(s, "noiseless", false);
        }
        if (doc.contains("resolvent")) {
            const json& r = doc.at("resolvent");
            if (r.contains("shapes")) {
                cfg.resolvent.shapes.clear();
                for (const auto& sh : r.at("shapes")) {
                    const auto v = sh.get<std::vector<int>>();
                    if (v.size() != 2)
                        throw ConfigError("resolvent.shapes entries must be [N, n]");
                    cfg.resolvent.shapes.emplace_back(v[0], v[1]);
                }
            }
            cfg.resolvent.b = get_or<double>(r, "b", 2.0);
            cfg.resolvent.K = get_or<double>(r, "K", 1.0);
            if (r.contains("z")) {
                cfg.resolvent.z.clear();
                for (const auto& zz : r.at("z")) {
                    const auto v = zz.get<std::vector<double>>();
                    if (v.size() != 2)
                        throw ConfigError("resolvent.z entries must be [re, im]");
                    cfg.resolvent.z.emplace_back(v[0], v[1]);
                }
            }
            cfg.resolvent.probes_per_trial = get_or<int>(r, "probes_per_trial", 1);
            cfg.resolvent.grid_points = get_or<int>(r, "grid_points", 50);
            cfg.resolvent.basis_rank = get_or<int>(r, "basis_rank", 2);
        }
        if (doc.contains("kmeans")) {
            const json& km = doc.at("kmeans");
            cfg.kmeans.restarts = get_or<int>(km, "restarts", 10);
            cfg.kmeans.max_iter = get_or<int>(km, "max_iter", 100);
            cfg.kmeans.tol = get_or<double>(km, "tol", 1e-8);
        }
        cfg.threads = get_or<int>(doc, "threads", 0);
        cfg.output = get_or<std::string>(doc, "output", "");
        cfg.format = parse_format(get_or<std::string>(doc, "format", "csv"));
        cfg.record_timing = get_or<bool>(doc, "record_timing", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

void ExperimentConfig::validate() const
{
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    const auto known = known_theorems(scenario);
    for (const auto& id : theorems)
        if (std::find(known.begin(), known.end(), id) == known.end())
            throw ConfigError("theorem '" + id + "' is not available in scenario " + scenario_name(scenario));
    try {
        switch (scenario) {
        case Scenario::bounds: {
            low_rank.validate();
            const int r = low_rank.rank();
            if (noise.norm_min && (!(*noise.norm_min >= 0) || *noise.norm_max < *noise.norm_min))
                throw ConfigError("noise.norm_range must be an increasing pair of nonnegative values");
            for (int k : wedin_k)
                if (k < 1 || k > r)
                    throw ConfigError("wedin_k entries must lie in [1, r]");
            if (gaussian.k < 1 || gaussian.s < gaussian.k || gaussian.s > r)
                throw ConfigError("gaussian.k and gaussian.s must satisfy 1 <= k <= s <= r");
            if (!(gaussian.b >= 2) || !(gaussian.K > 0))
                throw ConfigError("gaussian.b must be >= 2 and gaussian.K > 0");
            static const char* gaussian_ids[] = {"gauss_subspace_op", "gauss_subspace_general", "sv_location",
                                                 "entry_2inf",        "linear_form",            "bilinear_form",
                                                 "weighted",          "weighted_corollary"};
            if (noise.norm_min)
                for (const char* id : gaussian_ids)
                    if (wants(*this, id))
                        throw ConfigError(std::string(id) + " assumes unit-variance noise; drop noise.norm_range");
            for (const auto& ns : norms)
                if (!ns.unitarily_invariant())
                    throw ConfigError("norms must be unitarily invariant");
            break;
        }
        case Scenario::gmm:
            if (gmm.dim < 1 || gmm.samples < 1 || gmm.clusters < 1 || gmm.clusters > gmm.dim ||
                gmm.clusters > gmm.samples)
                throw ConfigError("gmm needs 1 <= clusters <= min(dim, samples)");
            if (!(gmm.center_scale > 0) && !(gmm.delta && *gmm.delta > 0))
                throw ConfigError("gmm needs a positive center_scale or delta");
            if (!(gmm.L > 0))
                throw ConfigError("gmm.L must be positive");
            break;
        case Scenario::submatrix: {
            const int k = static_cast<int>(submatrix.amplitudes.size());
            if (k < 1 || submatrix.block_rows < 1 || submatrix.block_cols < 1 ||
                k * submatrix.block_rows > submatrix.rows || k * submatrix.block_cols > submatrix.cols)
                throw ConfigError("submatrix blocks must fit inside the matrix");
            if (!(submatrix.L > 0))
                throw ConfigError("submatrix.L must be positive");
            break;
        }
        case Scenario::resolvent:
            if (resolvent.shapes.empty() || resolvent.z.empty())
                throw ConfigError("resolvent needs at least one shape and one probe point");
            for (const auto& [N, n] : resolvent.shapes)
                if (N < 1 || n < 1)
                    throw ConfigError("resolvent shapes must be positive");
            for (const auto& [re, im] : resolvent.z)
                if (std::hypot(re, im) < 1.0)
                    throw ConfigError("resolvent probe points must satisfy |z| >= M (|re + i im| >= 1)");
            if (resolvent.probes_per_trial < 1 || resolvent.grid_points < 2 || resolvent.basis_rank < 1)
                throw ConfigError("resolvent probes_per_trial >= 1, grid_points >= 2, basis_rank >= 1");
            if (!(resolvent.b >= 2) || !(resolvent.K > 0))
                throw ConfigError("resolvent.b must be >= 2 and resolvent.K > 0");
            break;
        case Scenario::selftest:
            break;
        }
        KMeansConfig km = kmeans;
        km.k = 1;
        km.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Trial helpers.

namespace {

Vector random_unit(int dim, std::uint64_t seed)
{
    Vector v = gen_gaussian(dim, 1, seed).col(0);
    return v / v.norm();
}

BoundReport check_report(std::string id, double deviation, double tol)
{
    BoundReport rep;
    rep.theorem_id = std::move(id);
    rep.bound_value = tol;
    rep.preconditions = PreconditionFlags::satisfied();
    rep.precondition_met = true;
    rep.probability_floor = 1.0;
    rep.empirical = deviation;
    rep.ratio = tol > 0 ? std::optional<double>(deviation / tol) : std::nullopt;
    rep.violated = !(deviation <= tol);
    return rep;
}

BoundReport tagged(BoundReport rep, const NormSpec& spec)
{
    rep.theorem_id += ":" + spec.name();
    return rep;
}

double spectral_event_floor(int N, int n)
{
    const double root = std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n));
    return std::clamp(1.0 - 2.0 * std::exp(-root * root / 2.0), 0.0, 1.0);
}

BoundReport noise_event_report(int N, int n, double noise_norm)
{
    BoundReport rep;
    rep.theorem_id = "noise_norm_event";
    rep.bound_value = 2.0 * (std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n)));
    rep.preconditions = PreconditionFlags::satisfied();
    rep.precondition_met = true;
    rep.probability_floor = spectral_event_floor(N, n);
    rep.set_empirical(noise_norm);
    return rep;
}

// ---- bounds ---------------------------------------------------------------

void wedin_reports(const PerturbationInstance& inst, const std::vector<int>& ks, const std::vector<NormSpec>& norms,
                   std::vector<BoundReport>& out)
{
    for (int k : ks)
        for (const auto& ns : norms) {
            auto [u, v] = wedin_check(inst, k, ns);
            out.push_back(tagged(std::move(u), ns));
            out.push_back(tagged(std::move(v), ns));
        }
}

std::vector<BoundReport> bounds_trial(const ExperimentConfig& cfg, int trial, const LowRankSample* fixed)
{
    const std::uint64_t seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    const LowRankSample sample = fixed ? *fixed : gen_low_rank(cfg.low_rank, derive_seed(seed, 1));
    const int N = cfg.low_rank.rows;
    const int n = cfg.low_rank.cols;
    const int r = cfg.low_rank.rank();

    Matrix noise = gen_gaussian(N, n, derive_seed(seed, 2));
    const LinearizationSpectrum spectrum = LinearizationSpectrum::values_only(noise);
    double noise_norm = spectrum.noise_norm();
    LinearizationSpectrum scaled = spectrum;
    if (cfg.noise.norm_min) {
        std::mt19937_64 rng(derive_seed(seed, 3));
        const double target = std::uniform_real_distribution<double>(*cfg.noise.norm_min, *cfg.noise.norm_max)(rng);
        const double factor = noise_norm > 0 ? target / noise_norm : 0.0;
        noise *= factor;
        scaled.eta *= factor;
        noise_norm = scaled.noise_norm();
    }
    const PerturbationInstance inst = perturb(sample, noise, seed);

    std::vector<BoundReport> out;
    if (wants(cfg, "mirsky"))
        for (const auto& ns : cfg.norms)
            out.push_back(tagged(mirsky_check(inst, ns), ns));
    if (wants(cfg, "wedin")) {
        std::vector<int> ks = cfg.wedin_k;
        if (ks.empty())
            for (int k = 1; k <= r; ++k)
                ks.push_back(k);
        wedin_reports(inst, ks, cfg.norms, out);
    }
    if (wants(cfg, "noise_norm_event"))
        out.push_back(noise_event_report(N, n, noise_norm));

    const GaussianConfig& g = cfg.gaussian;
    const GaussianBoundParams p =
        GaussianBoundParams::make(N, n, cfg.low_rank.singulars, g.k, g.s, g.b, g.K, noise_norm);
    std::vector<ConstantForm> forms{ConstantForm::statement};
    if (g.both_constants)
        forms.push_back(ConstantForm::proof);

    auto quantity = [&](Quantity which, int k, int s, NormSpec ns = NormSpec::operator_norm()) {
        QuantityQuery q;
        q.which = which;
        q.k = k;
        q.s = s;
        q.norm = ns;
        return empirical_quantity(inst, q);
    };

    if (wants(cfg, "gauss_subspace_op")) {
        const double emp = quantity(Quantity::sin_theta, g.k, g.s);
        for (ConstantForm f : forms) {
            BoundReport rep = gauss_subspace_bound(p, SubspaceVariant::operator_norm, std::nullopt, f);
            rep.set_empirical(emp);
            out.push_back(std::move(rep));
        }
    }
    if (wants(cfg, "gauss_subspace_general")) {
        for (const auto& ns : cfg.norms) {
            const double cross = cross_term_norm(inst, g.k, g.s, ns);
            const double emp = quantity(Quantity::sin_theta, g.k, g.s, ns);
            for (ConstantForm f : forms) {
                BoundReport rep = gauss_subspace_bound(p, SubspaceVariant::general_norm, cross, f);
                rep.set_empirical(emp);
                out.push_back(tagged(std::move(rep), ns));
            }
        }
    }
    if (wants(cfg, "gauss_subspace_simplified")) {
        BoundReport rep = gauss_subspace_bound(p, SubspaceVariant::simplified);
        rep.set_empirical(quantity(Quantity::sin_theta, 1, g.k));
        out.push_back(std::move(rep));
    }
    if (wants(cfg, "sv_location")) {
        auto phi = [&](double x) { return varphi_real(scaled, x); };
        for (int j = g.k; j <= g.s; ++j)
            out.push_back(gauss_sv_location_check(inst, p, j, phi));
    }

    const IncoherenceStats inc = IncoherenceStats::from_instance(inst, g.k);
    if (wants(cfg, "entry_2inf")) {
        BoundReport rep = entrywise_bound(p, inc, EntrywiseForm::infnorm_nonasymptotic);
        rep.set_empirical(quantity(Quantity::two_inf_proj, g.k, g.s));
        out.push_back(std::move(rep));
    }
    if (wants(cfg, "entry_vector_inf")) {
        BoundReport rep = entrywise_bound(p, inc, EntrywiseForm::vector_inf);
        rep.set_empirical(quantity(Quantity::two_inf_proj, g.k, g.k));
        out.push_back(std::move(rep));
    }
    if (wants(cfg, "entry_matrix_2inf")) {
        BoundReport rep = entrywise_bound(p, inc, EntrywiseForm::matrix_2inf);
        rep.set_empirical(quantity(Quantity::two_inf_proj, 1, g.k));
        out.push_back(std::move(rep));
    }
    if (wants(cfg, "entry_aligned")) {
        BoundReport rep = entrywise_bound(p, inc, EntrywiseForm::corollary_aligned);
        rep.set_empirical(quantity(Quantity::two_inf_aligned, 1, g.k));
        out.push_back(std::move(rep));
    }
    if (wants(cfg, "linear_form") || wants(cfg, "bilinear_form")) {
        QuantityQuery q;
        q.k = g.k;
        q.s = g.s;
        q.x = random_unit(N, derive_seed(seed, 4));
        q.y = random_unit(g.s - g.k + 1, derive_seed(seed, 5));
        const double xu = (q.x.transpose() * signal_left(inst, 1, r)).norm();
        auto [lin, bil] = linear_bilinear_bound(p, std::min(1.0, xu), q.y);
        if (wants(cfg, "linear_form")) {
            q.which = Quantity::linear;
            lin.set_empirical(empirical_quantity(inst, q));
            out.push_back(std::move(lin));
        }
        if (wants(cfg, "bilinear_form")) {
            q.which = Quantity::bilinear;
            bil.set_empirical(empirical_quantity(inst, q));
            out.push_back(std::move(bil));
        }
    }
    if (wants(cfg, "weighted")) {
        BoundReport rep = weighted_bound(p, inc, WeightedForm::theorem);
        rep.set_empirical(quantity(Quantity::weighted_2inf, g.k, g.s));
        out.push_back(std::move(rep));
    }
    if (wants(cfg, "weighted_corollary")) {
        const GaussianBoundParams full =
            GaussianBoundParams::make(N, n, cfg.low_rank.singulars, 1, r, g.b, g.K, noise_norm);
        BoundReport rep = weighted_bound(full, inc, WeightedForm::corollary_full);
        rep.set_empirical(quantity(Quantity::weighted_aligned, 1, r));
        out.push_back(std::move(rep));
    }

    if (wants(cfg, "general_sv") || wants(cfg, "general_subspace")) {
        const Matrix u = signal_left(inst, 1, r);
        const Matrix v = signal_right(inst, 1, r);
        const Matrix core = u.transpose() * inst.noise * v;
        GeneralNoiseParams gp;
        gp.L = singular_values(core)(0);
        gp.B = noise_norm;
        gp.epsilon = 0.01;
        for (int k = 1; k <= r; ++k) {
            gp.t = singular_values(core.topLeftCorner(k, k))(0);
            if (wants(cfg, "general_sv")) {
                auto [lower, upper] = general_sv_bounds(inst, k, gp);
                out.push_back(std::move(lower));
                out.push_back(std::move(upper));
            }
            if (wants(cfg, "general_subspace")) {
                const double delta = p.gap(k);
                for (const auto& ns : cfg.norms) {
                    BoundReport rep = general_subspace_bound(k, r, delta, p.sigma_at(k), gp, ns);
                    rep.set_empirical(quantity(Quantity::sin_theta, 1, k, ns));
                    out.push_back(tagged(std::move(rep), ns));
                }
            }
        }
    }
    return out;
}

// ---- gmm ------------------------------------------------------------------

GmmSpec gmm_spec(const GmmConfig& g)
{
    GmmSpec spec;
    spec.dim = g.dim;
    spec.samples = g.samples;
    spec.clusters = g.clusters;
    const double scale = g.delta ? *g.delta / std::sqrt(2.0) : g.center_scale;
    for (int c = 0; c < g.clusters; ++c)
        spec.centers.push_back(scale * Vector::Unit(g.dim, c));
    spec.rule = LabelRule::balanced;
    spec.noiseless = g.noiseless;
    return spec;
}

std::vector<BoundReport> gmm_trial(const ExperimentConfig& cfg, int trial)
{
    const std::uint64_t seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    const GmmConfig& g = cfg.gmm;
    const GmmSample sample = sample_gmm(gmm_spec(g), seed);

    KMeansConfig km = cfg.kmeans;
    km.k = g.clusters;
    km.seed = derive_seed(seed, 1);
    const Labeling truth{sample.labels, g.clusters};
    const Labeling found = spectral_gmm(sample.data, g.clusters, km);
    const double miss = misclassification(truth, found);

    PreconditionFlags flags;
    flags.dim_ok = recovery_dim_ok(g.dim, g.samples, g.clusters, g.L);
    flags.gap_ok = sample.delta >= separation_threshold(g.samples, g.dim, g.clusters, g.L, sample.smallest_cluster);
    flags.snr_ok = sample.sigma_min >= sigma_threshold(g.samples, g.dim, g.clusters, g.L);
    const bool met = flags.gap_ok && flags.snr_ok;
    const double floor = std::max(0.0, 1.0 - 40.0 * std::pow(static_cast<double>(g.samples + g.dim), -g.L));

    std::vector<BoundReport> out;
    if (wants(cfg, "gmm_exact")) {
        BoundReport rep;
        rep.theorem_id = "gmm_exact";
        rep.preconditions = flags;
        rep.precondition_met = met;
        rep.probability_floor = met ? floor : 0.0;
        rep.bound_value = 0.0;
        rep.set_empirical(miss);
        out.push_back(rep);
    }
    if (wants(cfg, "gmm_embedding")) {
        BoundReport rep;
        rep.theorem_id = "gmm_embedding";
        rep.preconditions = flags;
        rep.precondition_met = met;
        rep.probability_floor = met ? floor : 0.0;
        rep.bound_value = sample.delta / 5.0;
        rep.set_empirical(embedding_gap(sample.data, g.clusters, sample.truth_embedding));
        out.push_back(rep);
    }
    if (wants(cfg, "gmm_rate")) {
        BoundReport rep;
        rep.theorem_id = "gmm_rate";
        rep.preconditions = flags;
        rep.precondition_met = true;
        rep.probability_floor = 1.0;
        rep.bound_value = 1.0;
        rep.set_empirical(miss);
        out.push_back(rep);
    }
    return out;
}

// ---- submatrix --------------------------------------------------------------

std::vector<BoundReport> submatrix_trial(const ExperimentConfig& cfg, int trial)
{
    const std::uint64_t seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    const SubmatrixConfig& s = cfg.submatrix;
    SubmatrixSpec spec = contiguous_blocks(s.rows, s.cols, s.block_rows, s.block_cols, s.amplitudes);
    spec.noiseless = s.noiseless;
    const SubmatrixSample sample = plant_submatrices(spec, seed);
    const int k = spec.blocks();

    KMeansConfig km = cfg.kmeans;
    km.k = k + 1;
    km.seed = derive_seed(seed, 1);
    const SubmatrixEstimate est = spectral_submatrix(sample.data, k, km);
    const bool exact = families_match(est.row_sets, sample.row_family) && families_match(est.col_sets, sample.col_family);

    PreconditionFlags flags;
    flags.dim_ok = recovery_dim_ok(s.rows, s.cols, k, s.L);
    flags.gap_ok = sample.delta_rows >= separation_threshold(s.rows, s.cols, k, s.L, sample.r_min) &&
                   sample.delta_cols >= separation_threshold(s.rows, s.cols, k, s.L, sample.c_min);
    flags.snr_ok = sample.sigma_min >= sigma_threshold(s.rows, s.cols, k, s.L);

    std::vector<BoundReport> out;
    if (wants(cfg, "submatrix_exact")) {
        BoundReport rep;
        rep.theorem_id = "submatrix_exact";
        rep.preconditions = flags;
        rep.precondition_met = flags.gap_ok && flags.snr_ok;
        rep.probability_floor =
            rep.precondition_met ? std::max(0.0, 1.0 - 40.0 * std::pow(static_cast<double>(s.rows + s.cols), -s.L))
                                 : 0.0;
        rep.bound_value = 0.0;
        rep.set_empirical(exact ? 0.0 : 1.0);
        out.push_back(rep);
    }
    return out;
}

// ---- resolvent --------------------------------------------------------------

std::vector<BoundReport> resolvent_trial(const ExperimentConfig& cfg, int trial)
{
    const std::uint64_t seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    const ResolventConfig& rc = cfg.resolvent;
    const auto [N, n] = rc.shapes[static_cast<std::size_t>(trial) % rc.shapes.size()];
    const Matrix noise = gen_gaussian(N, n, derive_seed(seed, 1));
    const bool need_vectors = wants(cfg, "local_law");
    const LinearizationSpectrum spec =
        need_vectors ? LinearizationSpectrum::from_noise(noise) : LinearizationSpectrum::values_only(noise);

    const double b = rc.b;
    const double root = std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n));
    const double M = 2.0 * b * root;
    const bool on_event = spec.noise_norm() <= 2.0 * root;
    const double lead = b / (b - 1.0);

    std::vector<BoundReport> out;
    if (wants(cfg, "noise_norm_event"))
        out.push_back(noise_event_report(N, n, spec.noise_norm()));

    for (int probe = 0; probe < rc.probes_per_trial; ++probe) {
        const std::size_t zi = static_cast<std::size_t>(trial * rc.probes_per_trial + probe) % rc.z.size();
        const Complex z = M * Complex(rc.z[zi].first, rc.z[zi].second);
        if (!(std::abs(z) > spec.noise_norm()))
            continue;
        const ResolventProbe pr = phi_values(spec, z);

        if (wants(cfg, "phi_identity")) {
            const Complex defect = pr.phi1 - pr.phi2 + static_cast<double>(n - N) / z;
            const double scale = std::max({1.0, std::abs(pr.phi1), std::abs(pr.phi2)});
            out.push_back(check_report("phi_identity", std::abs(defect) / scale, 1e-8));
        }
        if (wants(cfg, "uphiu")) {
            const int r = std::min({rc.basis_rank, N, n});
            const Matrix u = haar_orthonormal(N, r, derive_seed(seed, 10 + static_cast<std::uint64_t>(probe)));
            const Matrix v = haar_orthonormal(n, r, derive_seed(seed, 1000 + static_cast<std::uint64_t>(probe)));
            out.push_back(check_report("uphiu", uphiu_deviation(spec, linearized_basis(u, v), z), 1e-8));
        }
        if (wants(cfg, "local_law")) {
            const Vector x = random_unit(N + n, derive_seed(seed, 2000 + static_cast<std::uint64_t>(probe)));
            const Vector y = random_unit(N + n, derive_seed(seed, 3000 + static_cast<std::uint64_t>(probe)));
            BoundReport rep;
            rep.theorem_id = "local_law";
            rep.preconditions = PreconditionFlags::satisfied();
            rep.preconditions.dim_ok = root * root >= 32.0 * (rc.K + 1.0) * std::log(static_cast<double>(N + n));
            rep.preconditions.snr_ok = std::abs(z) >= M * (1.0 - 1e-12);
            rep.precondition_met = rep.preconditions.all();
            rep.probability_floor =
                rep.precondition_met
                    ? std::max(0.0, 1.0 - 9.0 * std::pow(static_cast<double>(N + n), -(rc.K + 1.0)))
                    : 0.0;
            rep.bound_value = local_law_threshold(N, n, b, rc.K, z);
            rep.set_empirical(local_law_gap(spec, z, x, y));
            out.push_back(rep);
        }
        if (on_event && std::abs(z) >= M * (1.0 - 1e-12)) {
            const ResolventNorms norms = resolvent_norms(spec, z);
            const double az = std::abs(z);
            auto event_report = [&](const char* id, double value, double bound) {
                BoundReport rep;
                rep.theorem_id = id;
                rep.preconditions = PreconditionFlags::satisfied();
                rep.precondition_met = true;
                rep.probability_floor = 1.0;
                rep.bound_value = bound;
                rep.set_empirical(value);
                return rep;
            };
            if (wants(cfg, "resolvent_norm"))
                out.push_back(event_report("resolvent_norm", norms.resolvent, lead / az));
            if (wants(cfg, "resolvent_first"))
                out.push_back(event_report("resolvent_first", norms.first_order, lead * spec.noise_norm() / (az * az)));
            if (wants(cfg, "resolvent_second"))
                out.push_back(event_report("resolvent_second", norms.second_order,
                                           lead * spec.noise_norm() * spec.noise_norm() / (az * az * az)));
            if (wants(cfg, "phi_modulus")) {
                const double c = 1.0 / (4.0 * b * (b - 1.0));
                double worst = 0.0;
                for (Complex phi : {pr.phi1, pr.phi2}) {
                    worst = std::max(worst, (1.0 - c) * az - std::abs(phi));
                    worst = std::max(worst, std::abs(phi) - (1.0 + c) * az);
                }
                out.push_back(check_report("phi_modulus", std::max(0.0, worst) / az, 1e-12));
            }
        }
    }

    if (M > spec.noise_norm()) {
        std::vector<double> xs(static_cast<std::size_t>(rc.grid_points));
        for (int i = 0; i < rc.grid_points; ++i)
            xs[i] = M * (1.0 + 2.0 * i / (rc.grid_points - 1.0));
        const std::vector<double> phi = varphi_grid_serial(spec, xs);
        if (wants(cfg, "varphi_monotone")) {
            int bad = 0;
            for (std::size_t i = 1; i < phi.size(); ++i)
                bad += phi[i] > phi[i - 1] ? 0 : 1;
            out.push_back(check_report("varphi_monotone", bad, 0.0));
        }
        if (wants(cfg, "varphi_crude")) {
            int bad = 0;
            for (std::size_t i = 0; i < phi.size(); ++i)
                bad += (phi[i] > 0 && phi[i] < xs[i] * xs[i]) ? 0 : 1;
            out.push_back(check_report("varphi_crude", bad, 0.0));
        }
        if (wants(cfg, "solve_zj") && on_event) {
            const double sigma = 4.0 * M;
            const double zj = solve_zj(spec, sigma, b);
            const double res = std::abs(varphi_real(spec, zj) - sigma * sigma) / (sigma * sigma);
            const double chi = chi_of(b);
            double outside = 0.0;
            outside = std::max(outside, (sigma - zj) / sigma);
            outside = std::max(outside, (zj - chi * sigma) / sigma);
            out.push_back(check_report("solve_zj", std::max(res - 1e-8, outside) > 0 ? std::max(res, outside) : 0.0,
                                       1e-8));
        }
    }
    return out;
}

// ---- selftest ----------------------------------------------------------------

std::vector<BoundReport> selftest_trial(const ExperimentConfig& cfg, int trial)
{
    const std::uint64_t seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
    std::mt19937_64 rng(derive_seed(seed, 1));
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int N = uniform_int(6, 80);
    const int n = uniform_int(6, 80);
    const int r = uniform_int(1, std::min({N, n, 5}));

    LowRankSpec lr;
    lr.rows = N;
    lr.cols = n;
    for (int i = 0; i < r; ++i)
        lr.singulars.push_back(10.0 * (r - i) + std::uniform_real_distribution<double>(0.0, 5.0)(rng));
    std::sort(lr.singulars.rbegin(), lr.singulars.rend());
    const LowRankSample sample = gen_low_rank(lr, derive_seed(seed, 2));
    const double scale = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
    const Matrix noise = scale * gen_gaussian(N, n, derive_seed(seed, 3));
    const PerturbationInstance inst = perturb(sample, noise, seed);

    std::vector<BoundReport> out;
    const std::vector<NormSpec> norms{NormSpec::operator_norm(), NormSpec::frobenius(), NormSpec::nuclear(),
                                      NormSpec::schatten(3.0), NormSpec::kyfan(2)};
    if (wants(cfg, "mirsky"))
        for (const auto& ns : norms)
            out.push_back(tagged(mirsky_check(inst, ns), ns));
    if (wants(cfg, "wedin")) {
        std::vector<int> ks;
        for (int k = 1; k <= r; ++k)
            ks.push_back(k);
        wedin_reports(inst, ks, {NormSpec::operator_norm(), NormSpec::frobenius()}, out);
    }

    const int d = uniform_int(1, std::min(N, 20));
    const OrthonormalBasis ub(haar_orthonormal(N, d, derive_seed(seed, 4)));
    const OrthonormalBasis vb(haar_orthonormal(N, d, derive_seed(seed, 5)));
    const AngleSpectrum angles = principal_angles(ub, vb);
    if (wants(cfg, "projector_cosines")) {
        const Vector sv = singular_values(orth_projector(ub.matrix()) * orth_projector(vb.matrix()));
        Vector cosines = angles.cosines();
        std::sort(cosines.data(), cosines.data() + cosines.size(), std::greater<>());
        double dev = (sv.head(d) - cosines).cwiseAbs().maxCoeff();
        if (sv.size() > d)
            dev = std::max(dev, sv.tail(sv.size() - d).cwiseAbs().maxCoeff());
        out.push_back(check_report("projector_cosines", dev, 1e-9));
    }
    const Matrix o = procrustes_align(ub, vb);
    const Matrix residual = ub.matrix() * o - vb.matrix();
    if (wants(cfg, "procrustes_spectrum")) {
        Vector expect(d);
        for (int i = 0; i < d; ++i)
            expect(i) = 2.0 * std::sin(angles.angles[i] / 2.0);
        std::sort(expect.data(), expect.data() + d, std::greater<>());
        out.push_back(check_report("procrustes_spectrum", (singular_values(residual) - expect).cwiseAbs().maxCoeff(),
                                   1e-9));
    }
    if (wants(cfg, "frobenius_sandwich")) {
        const double s = sin_theta_norm(ub, vb, NormSpec::frobenius());
        const double a = residual.norm();
        out.push_back(check_report("frobenius_sandwich", std::max({0.0, s - a, a - std::sqrt(2.0) * s}), 1e-9));
    }
    if (wants(cfg, "prop_2inf")) {
        const Matrix& u = ub.matrix();
        const Matrix& v = vb.matrix();
        const Matrix proj = v - u * (u.transpose() * v);
        const Matrix al = v - u * o;
        const double s2 = std::pow(sin_theta_norm(ub, vb, NormSpec::operator_norm()), 2);
        const Vector x = random_unit(N, derive_seed(seed, 6));
        const Vector y = random_unit(d, derive_seed(seed, 7));
        const double xu = (x.transpose() * u).norm();
        double slack = 0.0;
        slack = std::max(slack, two_inf_norm(al) - two_inf_norm(proj) - two_inf_norm(u) * s2);
        slack = std::max(slack, (x.transpose() * al).norm() - (x.transpose() * proj).norm() - xu * s2);
        slack = std::max(slack, std::abs(x.dot(al * y)) - std::abs(x.dot(proj * y)) - xu * s2);
        out.push_back(check_report("prop_2inf", slack, 1e-9));
    }

    const LinearizationSpectrum spec = LinearizationSpectrum::from_noise(noise);
    const double M = 4.0 * (std::sqrt(static_cast<double>(N)) + std::sqrt(static_cast<double>(n)));
    const Complex z = std::max(M, 2.0 * spec.noise_norm() + 1.0) * Complex(std::cos(0.3 * trial), std::sin(0.3 * trial));
    if (wants(cfg, "phi_identity")) {
        const ResolventProbe pr = phi_values(spec, z);
        const double scale_phi = std::max({1.0, std::abs(pr.phi1), std::abs(pr.phi2)});
        out.push_back(check_report("phi_identity",
                                   std::abs(pr.phi1 - pr.phi2 + static_cast<double>(n - N) / z) / scale_phi, 1e-8));
    }
    if (wants(cfg, "uphiu")) {
        const Matrix u = signal_left(inst, 1, r);
        const Matrix v = signal_right(inst, 1, r);
        out.push_back(check_report("uphiu", uphiu_deviation(spec, linearized_basis(u, v), z), 1e-8));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Driver.

std::vector<std::vector<BoundReport>> run_trials(const ExperimentConfig& cfg, bool parallel)
{
    cfg.validate();
    set_threads(cfg.threads);

    std::optional<LowRankSample> fixed;
    if (cfg.scenario == Scenario::bounds && cfg.fixed_signal)
        fixed = gen_low_rank(cfg.low_rank, cfg.base_seed);

    auto one = [&](int i) -> std::vector<BoundReport> {
        switch (cfg.scenario) {
        case Scenario::bounds:
            return bounds_trial(cfg, i, fixed ? &*fixed : nullptr);
        case Scenario::gmm:
            return gmm_trial(cfg, i);
        case Scenario::submatrix:
            return submatrix_trial(cfg, i);
        case Scenario::resolvent:
            return resolvent_trial(cfg, i);
        case Scenario::selftest:
            return selftest_trial(cfg, i);
        }
        return {};
    };
    return parallel ? parallel_map(cfg.trials, one) : serial_map(cfg.trials, one);
}

double nearest_rank(std::vector<double> values, double q)
{
    if (values.empty())
        throw InvalidInput("nearest_rank: empty sample");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    const auto rank = static_cast<std::size_t>(std::max(1.0, std::ceil(q * n)));
    return values[std::min(rank, values.size()) - 1];
}

double binomial_margin(double budget, int trials)
{
    const double b = std::clamp(budget, 0.0, 1.0);
    return b + 3.0 * std::sqrt(b * (1.0 - b) / std::max(1, trials));
}

SummaryReport summarize(const ExperimentConfig& cfg, const std::vector<std::vector<BoundReport>>& trials)
{
    struct Acc {
        TheoremSummary s;
        std::vector<double> ratios;
        double floor = 1.0;
    };
    std::map<std::string, Acc> acc;
    for (const auto& reports : trials)
        for (const auto& rep : reports) {
            Acc& a = acc[rep.theorem_id];
            a.s.theorem_id = rep.theorem_id;
            ++a.s.trials;
            if (!rep.precondition_met) {
                ++a.s.precondition_failures;
                continue;
            }
            if (!rep.quantitative || !rep.violated)
                continue;
            ++a.s.valid;
            a.s.violations += *rep.violated ? 1 : 0;
            if (rep.ratio && std::isfinite(*rep.ratio))
                a.ratios.push_back(*rep.ratio);
            a.floor = std::min(a.floor, rep.probability_floor);
        }

    SummaryReport out;
    out.scenario = scenario_name(cfg.scenario);
    out.version = STK_VERSION;
    out.config = cfg.source;
    for (auto& [id, a] : acc) {
        a.s.rate = a.s.valid > 0 ? static_cast<double>(a.s.violations) / a.s.valid : 0.0;
        if (!a.ratios.empty()) {
            a.s.ratio_p50 = nearest_rank(a.ratios, 0.50);
            a.s.ratio_p90 = nearest_rank(a.ratios, 0.90);
            a.s.ratio_p99 = nearest_rank(a.ratios, 0.99);
        }
        a.s.prob_floor = a.s.valid > 0 ? a.floor : 0.0;
        out.theorems.push_back(a.s);
    }
    return out;
}

SummaryReport run_monte_carlo(const ExperimentConfig& cfg, bool parallel)
{
    const auto start = std::chrono::steady_clock::now();
    SummaryReport rep = summarize(cfg, run_trials(cfg, parallel));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cfg.record_timing)
        rep.wall_seconds = secs;
    return rep;
}

const TheoremSummary* SummaryReport::find(const std::string& id) const
{
    for (const auto& t : theorems)
        if (t.theorem_id == id)
            return &t;
    return nullptr;
}

bool has_violations(const SummaryReport& report)
{
    return std::any_of(report.theorems.begin(), report.theorems.end(),
                       [](const TheoremSummary& t) { return t.violations > 0; });
}

// ---------------------------------------------------------------------------
// Report I/O.

namespace {

std::string num(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : ""; }

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

std::string report_to_csv(const SummaryReport& report)
{
    std::ostringstream os;
    os << "theorem_id,trials,valid,violations,rate,ratio_p50,ratio_p90,ratio_p99\n";
    for (const auto& t : report.theorems)
        os << t.theorem_id << ',' << t.trials << ',' << t.valid << ',' << t.violations << ',' << num(t.rate) << ','
           << opt_num(t.ratio_p50) << ',' << opt_num(t.ratio_p90) << ',' << opt_num(t.ratio_p99) << '\n';
    return os.str();
}

json report_to_json(const SummaryReport& report)
{
    json doc;
    doc["toolkit_version"] = report.version;
    doc["scenario"] = report.scenario;
    doc["config"] = report.config;
    json rows = json::array();
    for (const auto& t : report.theorems) {
        json row;
        row["theorem_id"] = t.theorem_id;
        row["trials"] = t.trials;
        row["valid"] = t.valid;
        row["violations"] = t.violations;
        row["rate"] = t.rate;
        row["ratio_p50"] = opt_json(t.ratio_p50);
        row["ratio_p90"] = opt_json(t.ratio_p90);
        row["ratio_p99"] = opt_json(t.ratio_p99);
        row["precondition_failures"] = t.precondition_failures;
        row["prob_floor"] = t.prob_floor;
        rows.push_back(row);
    }
    doc["theorems"] = rows;
    if (report.wall_seconds)
        doc["wall_seconds"] = *report.wall_seconds;
    return doc;
}

SummaryReport report_from_json(const json& doc)
{
    try {
        SummaryReport rep;
        rep.version = doc.at("toolkit_version").get<std::string>();
        rep.scenario = doc.at("scenario").get<std::string>();
        rep.config = doc.at("config");
        for (const auto& row : doc.at("theorems")) {
            TheoremSummary t;
            t.theorem_id = row.at("theorem_id").get<std::string>();
            t.trials = row.at("trials").get<int>();
            t.valid = row.at("valid").get<int>();
            t.violations = row.at("violations").get<int>();
            t.rate = row.at("rate").get<double>();
            t.ratio_p50 = opt_from(row, "ratio_p50");
            t.ratio_p90 = opt_from(row, "ratio_p90");
            t.ratio_p99 = opt_from(row, "ratio_p99");
            t.precondition_failures = row.at("precondition_failures").get<int>();
            t.prob_floor = row.at("prob_floor").get<double>();
            rep.theorems.push_back(t);
        }
        rep.wall_seconds = opt_from(doc, "wall_seconds");
        return rep;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("report_from_json: ") + e.what());
    }
}

std::string render_report(const SummaryReport& report, ReportFormat format)
{
    if (format == ReportFormat::csv)
        return report_to_csv(report);
    return report_to_json(report).dump(2) + "\n";
}

void emit_report(const SummaryReport& report, ReportFormat format, const std::string& path)
{
    const std::string text = render_report(report, format);
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        if (!std::cout)
            throw IoError("failed writing report to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out)
        throw IoError("failed writing report to '" + path + "'");
}

}  // namespace stk
