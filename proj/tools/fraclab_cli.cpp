#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fraclab/config.hpp"
#include "fraclab/errors.hpp"
#include "fraclab/experiments.hpp"
#include "fraclab/report.hpp"

using namespace fraclab;

namespace {

enum Exit { kPass = 0, kAssertion = 1, kConfig = 2, kNumerical = 3 };

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

const Flag kFlags[] = {
    {"--alpha", "alpha", "fractional order alpha > 0"},
    {"--n", "n", "space dimension (1..3)"},
    {"--m", "m", "polyharmonic order for constants"},
    {"--potential", "potential", "potential file, kind name, or entry such as 'kind=box radius=1 amplitude=2'"},
    {"--theta-list", "theta_list", "comma-separated scalings in (0,1]"},
    {"--N", "N", "lattice points"},
    {"--L", "L", "lattice period"},
    {"--tmin", "tmin", "smallest sampled time"},
    {"--tmax", "tmax", "largest sampled time"},
    {"--beta", "beta", "smoothing power"},
    {"--p", "p", "norm index, 'inf' allowed"},
    {"--out", "out", "output directory"},
    {"--seed", "seed", "seed for every random sample"},
    {"--oracle", "oracle", "kernel oracle: none | poisson | gaussian"},
    {"--suite", "suite", "acceptance suite of this command (see 'list')"},
    {"--terms", "terms", "perturbation series terms"},
    {"--epsilon", "epsilon", "threshold defining V^epsilon"},
    {"--samples", "samples", "Monte-Carlo sample count"},
    {"--tol", "tol", "tolerance override (0 keeps the experiment's own)"},
};

void print_report(const Report& r, const std::vector<std::string>& files, const std::string& dir)
{
    std::printf("%s\n", r.summary().c_str());
    for (const auto& [k, v] : r.constants) std::printf("  %s = %.17g\n", k.c_str(), v);
    for (const auto& c : r.checks)
        std::printf("  [%s] %s = %.6g (%s %.6g)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value, c.relation.c_str(),
                    c.bound);
    for (const auto& n : r.notes) std::printf("  note: %s\n", n.c_str());
    std::printf("  wrote %zu files to %s\n", files.size(), dir.c_str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"fraclab: fractional heat kernels, Kato potentials, perturbation series and L^p growth"};
    app.require_subcommand(1);
    std::map<std::string, std::string> values;
    std::string config_path;
    std::vector<std::pair<Command, CLI::App*>> subs;
    const std::vector<std::pair<Command, const char*>> commands{
        {Command::constants, "closed-form constants and twisted symbol minima"},
        {Command::kernel, "free kernel evaluation and oracles"},
        {Command::kato, "Kato class verdict, K_V(t) and V^epsilon"},
        {Command::duhamel, "perturbation series on the periodic lattice"},
        {Command::lpgrowth, "growth of smoothed propagator norms"},
        {Command::all, "every acceptance suite"},
    };
    for (const auto& [cmd, help] : commands) {
        CLI::App* sub = app.add_subcommand(to_string(cmd), help);
        sub->add_option("--config", config_path, "flat key = value file, read before the flags");
        for (const auto& f : kFlags) sub->add_option(f.name, values[f.key], f.help);
        subs.emplace_back(cmd, sub);
    }
    CLI::App* list = app.add_subcommand("list", "acceptance criteria, their commands and expected runtimes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    if (list->parsed()) {
        std::printf("%s", list_experiments().c_str());
        return kPass;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path);
        for (const auto& [cmd, sub] : subs) {
            if (!sub->parsed()) continue;
            cfg.command = cmd;
            for (const auto& f : kFlags)
                if (sub->count(f.name) > 0) set_config_key(cfg, f.key, values[f.key]);
        }
        validate_config(cfg);
        const Report r = run_experiment(cfg);
        const auto files = write_report_files(r, cfg.out);
        print_report(r, files, cfg.out);
        return r.passed() ? kPass : kAssertion;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\nrun 'fraclab <command> --help' for usage\n", e.what());
        return kConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "configuration error: %s\nrun 'fraclab <command> --help' for usage\n", e.what());
        return kConfig;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    }
}
