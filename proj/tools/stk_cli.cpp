// stk: command-line driver for the Monte Carlo harness.
//
//   stk <bounds|gmm|submatrix|resolvent|selftest> [--config path] [--trials N]
//       [--seed S] [--out path] [--format csv|json] [--threads T]
//
// Exit codes: 0 ok, 1 invalid config, 2 selftest violation, 3 runtime failure.

#include "stk/error.hpp"
#include "stk/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kViolation = 2, kRuntime = 3 };

struct Options {
    std::string config;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> threads;
};

nlohmann::json read_document(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw stk::ConfigError("cannot open config '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw stk::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

int run(const std::string& scenario, const Options& opt)
{
    nlohmann::json doc = opt.config.empty() ? nlohmann::json::object() : read_document(opt.config);
    if (!doc.is_object())
        throw stk::ConfigError("config must be a JSON object");
    if (doc.contains("scenario") && doc["scenario"] != scenario)
        throw stk::ConfigError("config scenario '" + doc["scenario"].dump() + "' does not match subcommand '" +
                               scenario + "'");
    doc["scenario"] = scenario;
    if (opt.trials)
        doc["trials"] = *opt.trials;
    if (opt.seed)
        doc["base_seed"] = *opt.seed;
    if (opt.out)
        doc["output"] = *opt.out;
    if (opt.format)
        doc["format"] = *opt.format;
    if (opt.threads)
        doc["threads"] = *opt.threads;

    const stk::ExperimentConfig cfg = stk::ExperimentConfig::from_json(doc);
    const auto start = std::chrono::steady_clock::now();
    const stk::SummaryReport report = stk::run_monte_carlo(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stk::emit_report(report, cfg.format, cfg.output);
    std::cerr << "stk " << scenario << ": " << cfg.trials << " trials in " << secs << " s\n";

    if (cfg.scenario == stk::Scenario::selftest && stk::has_violations(report)) {
        for (const auto& t : report.theorems)
            if (t.violations > 0)
                std::cerr << "selftest violation: " << t.theorem_id << " (" << t.violations << " of " << t.valid
                          << ")\n";
        return kViolation;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Perturbation-bound Monte Carlo toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(STK_VERSION));

    Options opt;
    std::string chosen;
    for (const char* name : {"bounds", "gmm", "submatrix", "resolvent", "selftest"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " scenario");
        sub->add_option("--config", opt.config, "JSON config document")->check(CLI::ExistingFile);
        sub->add_option("--trials", opt.trials, "number of trials")->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "base seed");
        sub->add_option("--out", opt.out, "output path ('-' for stdout)");
        sub->add_option("--format", opt.format, "report format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", opt.threads, "worker threads (0 = runtime default)")
            ->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        return run(chosen, opt);
    } catch (const stk::ConfigError& e) {
        std::cerr << "stk: invalid config: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "stk: " << e.what() << "\n";
        return kRuntime;
    }
}
