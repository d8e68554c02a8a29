// overlap-ifs: overlap numbers and dimension bounds for 1-D similarity IFS.
//
// Precedence: built-in defaults < --config file < command-line flags.
// Exit codes: 0 success, 2 config error, 3 budget error, 4 flagged samples.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "overlap_ifs/reports.hpp"

namespace {

using namespace overlap_ifs;

struct Flags {
    std::string config;
    std::string system_file;
    double lambda = 0.0;
    std::string p;
    int n = 0;
    std::uint64_t samples = 0;
    double tau = 0.0;
    std::uint64_t seed = 0;
    int quad_depth = 0;
    unsigned jobs = 1;
    std::string out;
    std::string lambda_grid;
    double o_value = 0.0;
    double x = 0.0;
    double fuzz = 0.0;
    bool quiet = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--system", f.system_file, "JSON system definition file");
    sub->add_option("--lambda", f.lambda, "use S_lambda = {lambda x - 1, lambda x + 1}");
    sub->add_option("--p", f.p, "probability vector F[,F...]");
    sub->add_option("--n", f.n, "chain length");
    sub->add_option("--samples", f.samples, "Monte Carlo sample count N");
    sub->add_option("--tau", f.tau, "genericity window");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--quad-depth", f.quad_depth, "use exact quadrature at this depth");
    sub->add_option("--jobs", f.jobs, "worker threads");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--quiet", f.quiet, "do not print the result record");
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' in --p");
        }
    }
    return out;
}

RunConfig build_config(const CLI::App* sub, const Flags& f) {
    RunConfig cfg;
    if (sub->count("--config")) apply_config_json(cfg, read_json_file(f.config));
    if (sub->count("--system")) {
        cfg.system_file = f.system_file;
        cfg.system.reset();
        cfg.lambda.reset();
    }
    if (sub->count("--lambda")) cfg.lambda = f.lambda;
    if (sub->count("--p")) cfg.p = parse_list(f.p);
    if (sub->count("--n")) cfg.n_values = {f.n};
    if (sub->count("--samples")) cfg.samples = f.samples;
    if (sub->count("--tau")) cfg.tau = f.tau;
    if (sub->count("--seed")) cfg.seed = f.seed;
    if (sub->count("--quad-depth")) cfg.quad_depth = f.quad_depth;
    if (sub->count("--jobs")) cfg.jobs = f.jobs;
    if (sub->count("--out")) cfg.out_dir = f.out;
    if (sub->get_option_no_throw("--lambda-grid") && sub->count("--lambda-grid")) {
        cfg.lambda_grid = parse_grid_spec(f.lambda_grid);
    }
    if (sub->get_option_no_throw("--o-value") && sub->count("--o-value")) cfg.o_value = f.o_value;
    if (sub->get_option_no_throw("--x") && sub->count("--x")) cfg.x = f.x;
    if (sub->get_option_no_throw("--fuzz") && sub->count("--fuzz")) cfg.fuzz = f.fuzz;
    if (const char* env = std::getenv("OVERLAP_IFS_BUDGET")) {
        try {
            cfg.budget = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("OVERLAP_IFS_BUDGET must be a positive integer");
        }
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overlap numbers and Hausdorff dimension bounds for 1-D similarity IFS"};
    app.require_subcommand(1);
    Flags flags;

    using Command = std::function<ResultRecord(const RunConfig&)>;
    std::map<CLI::App*, Command> commands;

    auto* estimate = app.add_subcommand("estimate-overlap", "finite-n overlap number estimates");
    add_common(estimate, flags);
    commands[estimate] = cmd_estimate_overlap;

    auto* hd = app.add_subcommand("hd-bound", "Hausdorff dimension upper bound");
    add_common(hd, flags);
    hd->add_option("--o-value", flags.o_value, "use this overlap number instead of estimating");
    commands[hd] = cmd_hd_bound;

    auto* sweep = app.add_subcommand("sweep-lambda", "overlap numbers and bounds over a lambda grid");
    add_common(sweep, flags);
    sweep->add_option("--lambda-grid", flags.lambda_grid, "grid as start:stop:step");
    commands[sweep] = cmd_sweep_lambda;

    auto* profile = app.add_subcommand("beta-profile", "beta_n as an exact step function");
    add_common(profile, flags);
    commands[profile] = cmd_beta_profile;

    auto* validate = app.add_subcommand("validate", "check a system and report overlaps");
    add_common(validate, flags);
    commands[validate] = cmd_validate;

    auto* count = app.add_subcommand("count-chains", "certified n-chain count at a point");
    add_common(count, flags);
    count->add_option("--x", flags.x, "query point")->required();
    count->add_option("--fuzz", flags.fuzz, "query half-width");
    commands[count] = cmd_count_chains;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        for (const auto& [sub, run] : commands) {
            if (!sub->parsed()) continue;
            const RunConfig cfg = build_config(sub, flags);
            const ResultRecord rec = run(cfg);
            write_record(rec, cfg.out_dir);
            if (!flags.quiet) std::cout << rec.to_json().dump(2) << '\n';
        }
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what()
                  << "\nhint: lower --n, or raise the node budget with OVERLAP_IFS_BUDGET\n";
        return 3;
    } catch (const FlaggedSampleError& e) {
        std::cerr << "flagged samples: " << e.what() << '\n';
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
