#pragma once
//
// Monte Carlo driver: builds seeded instances, evaluates bounds and
// algorithms per trial, aggregates violation rates and writes reports.
//
// Config documents are JSON; see configs/ and README.md for the schema.
//

#include "stk/bounds.hpp"
#include "stk/clustering.hpp"
#include "stk/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stk {

enum class Scenario { bounds, gmm, submatrix, resolvent, selftest };
enum class ReportFormat { csv, json };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);
ReportFormat parse_format(const std::string& name);

struct NoiseConfig {
    // Entries are N(0,1); when set, each draw is rescaled so that ||E|| is
    // uniform on [norm_min, norm_max].
    std::optional<double> norm_min;
    std::optional<double> norm_max;
};

struct GaussianConfig {
    double b = 2.0;
    double K = 1.0;
    int k = 1;
    int s = 1;
    bool both_constants = false;  // also evaluate the (b+2)^2 proof constant
};

struct GmmConfig {
    int dim = 0;
    int samples = 0;
    int clusters = 0;
    double center_scale = 0;  // centers c * e_i; alternatively set delta
    std::optional<double> delta;
    double L = 1.0;
    bool noiseless = false;
};

struct SubmatrixConfig {
    int rows = 0;
    int cols = 0;
    int block_rows = 0;
    int block_cols = 0;
    std::vector<double> amplitudes;
    double L = 1.0;
    bool noiseless = false;
};

struct ResolventConfig {
    std::vector<std::pair<int, int>> shapes{{200, 200}};  // cycled by trial index
    double b = 2.0;
    double K = 1.0;
    // Probe points in units of M = 2b(sqrt N + sqrt n), as (re, im).
    std::vector<std::pair<double, double>> z{{1.0, 0.0}, {1.5, 0.0}, {3.0, 0.0}, {0.0, 1.2},
                                             {1.0, 1.0}, {-1.3, 0.4}, {2.0, -2.0}};
    int probes_per_trial = 1;
    int grid_points = 50;
    int basis_rank = 2;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::bounds;
    int trials = 1;
    std::uint64_t base_seed = 0;
    std::vector<std::string> theorems;
    std::vector<NormSpec> norms{NormSpec::operator_norm()};
    LowRankSpec low_rank;
    bool fixed_signal = false;  // reuse one signal draw (seed = base_seed) for every trial
    NoiseConfig noise;
    GaussianConfig gaussian;
    std::vector<int> wedin_k;  // default 1..r
    GmmConfig gmm;
    SubmatrixConfig submatrix;
    ResolventConfig resolvent;
    KMeansConfig kmeans;
    int threads = 0;
    std::string output;  // empty or "-" for stdout
    ReportFormat format = ReportFormat::csv;
    bool record_timing = false;

    nlohmann::json source;  // the document after command-line overrides

    // Throws ConfigError with a readable message.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig load(const std::string& path);
    void validate() const;
};

// Theorem ids understood by each scenario.
std::vector<std::string> known_theorems(Scenario s);

struct TheoremSummary {
    std::string theorem_id;
    int trials = 0;      // evaluations
    int valid = 0;       // evaluations with preconditions met and a quantitative claim
    int violations = 0;
    double rate = 0;     // violations / valid (0 when valid == 0)
    std::optional<double> ratio_p50;
    std::optional<double> ratio_p90;
    std::optional<double> ratio_p99;
    int precondition_failures = 0;
    double prob_floor = 0;  // smallest floor among valid evaluations

    bool operator==(const TheoremSummary&) const = default;
};

struct SummaryReport {
    std::string scenario;
    std::string version;
    nlohmann::json config;
    std::vector<TheoremSummary> theorems;  // sorted by theorem_id
    std::optional<double> wall_seconds;

    const TheoremSummary* find(const std::string& id) const;
    bool operator==(const SummaryReport&) const = default;
};

// Per-trial reports, trial order.
std::vector<std::vector<BoundReport>> run_trials(const ExperimentConfig& cfg, bool parallel = true);

SummaryReport summarize(const ExperimentConfig& cfg, const std::vector<std::vector<BoundReport>>& trials);

SummaryReport run_monte_carlo(const ExperimentConfig& cfg, bool parallel = true);

// Nearest-rank quantile of a non-empty sample.
double nearest_rank(std::vector<double> values, double q);

// Binomial acceptance: rate <= budget + 3 sqrt(budget (1 - budget) / trials).
double binomial_margin(double budget, int trials);

std::string report_to_csv(const SummaryReport& report);
nlohmann::json report_to_json(const SummaryReport& report);
SummaryReport report_from_json(const nlohmann::json& doc);
std::string render_report(const SummaryReport& report, ReportFormat format);

// Writes to `path` (stdout when empty or "-"); throws IoError.
void emit_report(const SummaryReport& report, ReportFormat format, const std::string& path);

// True when any evaluated deterministic check was violated.
bool has_violations(const SummaryReport& report);

}  // namespace stk
