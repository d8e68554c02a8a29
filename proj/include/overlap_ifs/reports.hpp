#pragma once

// Run configuration, result records and the command implementations behind
// the overlap-ifs CLI. Every command returns a ResultRecord; writing it
// produces results.json plus one CSV whose header is fixed per command.
//
// CSV numbers use the shortest round-trip decimal form.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "overlap_ifs/chain_counter.hpp"
#include "overlap_ifs/errors.hpp"
#include "overlap_ifs/ifs_core.hpp"
#include "overlap_ifs/overlap_estimator.hpp"
#include "overlap_ifs/philox.hpp"
#include "overlap_ifs/pressure_dimension.hpp"

namespace overlap_ifs {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// System definitions

/// {"maps": [{"ratio": r, "offset": c}, ...]} or
/// {"bernoulli_convolution": {"lambda": l}}.
inline IfsSystem system_from_json(const json& doc) {
    try {
        if (doc.contains("bernoulli_convolution")) {
            return IfsSystem::bernoulli_convolution(
                doc.at("bernoulli_convolution").at("lambda").get<double>());
        }
        if (doc.contains("maps")) {
            std::vector<SimilarityMap> maps;
            for (const auto& m : doc.at("maps")) {
                maps.emplace_back(m.at("ratio").get<double>(), m.at("offset").get<double>());
            }
            return IfsSystem(std::move(maps));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed system definition: ") + e.what());
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid system definition: ") + e.what());
    }
    throw ConfigError("system definition needs \"maps\" or \"bernoulli_convolution\"");
}

inline json system_to_json(const IfsSystem& sys) {
    json out;
    if (auto lambda = sys.bernoulli_lambda()) {
        out["bernoulli_convolution"] = {{"lambda", *lambda}};
    } else {
        out["maps"] = json::array();
        for (const auto& m : sys.maps()) {
            out["maps"].push_back({{"ratio", m.ratio}, {"offset", m.offset}});
        }
    }
    return out;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
}

inline IfsSystem load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::optional<json> system;              // inline definition
    std::optional<std::string> system_file;  // or a path
    std::optional<double> lambda;            // or the S_lambda shorthand
    std::optional<std::vector<double>> p;
    std::vector<int> n_values{8, 12, 16};
    std::uint64_t samples = 10000;
    std::optional<double> tau;
    std::uint64_t seed = 0;
    std::optional<int> quad_depth;
    std::vector<double> lambda_grid;
    unsigned jobs = 1;
    std::string out_dir = ".";
    std::optional<double> o_value;  // hd-bound: skip estimation
    std::optional<double> x;        // count-chains query point
    double fuzz = 0.0;              // count-chains fuzz
    std::uint64_t budget = kDefaultNodeBudget;

    [[nodiscard]] int headline_n() const { return n_values.back(); }
};

namespace detail {

template <class T>
T get_field(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

inline std::vector<double> parse_grid(const json& g) {
    if (g.is_array()) return g.get<std::vector<double>>();
    const double start = get_field<double>(g, "start");
    const double stop = get_field<double>(g, "stop");
    const double step = get_field<double>(g, "step");
    if (!(step > 0.0)) throw ConfigError("lambda grid step must be positive");
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    // snapped to 12 decimals so 0.55 + 1 * 0.05 prints as 0.6
    for (long i = 0; i <= count; ++i) {
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
    return out;
}

}  // namespace detail

/// "start:stop:step" grid syntax used by the CLI.
inline std::vector<double> parse_grid_spec(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad lambda grid '" + spec + "'");
        }
    }
    if (parts.size() != 3) throw ConfigError("lambda grid must be start:stop:step");
    return detail::parse_grid(json{{"start", parts[0]}, {"stop", parts[1]}, {"step", parts[2]}});
}

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys{
        "system", "system_file", "lambda", "p",  "n",   "n_values", "samples", "tau",   "seed",
        "quad_depth", "lambda_grid", "jobs", "out", "o_value", "x",       "fuzz",    "budget"};
    return keys;
}

/// Overlays the fields present in `doc` onto `cfg`.
inline void apply_config_json(RunConfig& cfg, const json& doc) {
    using detail::get_field;
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        const auto& keys = known_config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("unknown config field '" + key + "'");
        }
    }
    if (doc.contains("system")) cfg.system = doc.at("system");
    if (doc.contains("system_file")) cfg.system_file = get_field<std::string>(doc, "system_file");
    if (doc.contains("lambda")) cfg.lambda = get_field<double>(doc, "lambda");
    if (doc.contains("p")) cfg.p = get_field<std::vector<double>>(doc, "p");
    if (doc.contains("n")) cfg.n_values = {get_field<int>(doc, "n")};
    if (doc.contains("n_values")) cfg.n_values = get_field<std::vector<int>>(doc, "n_values");
    if (doc.contains("samples")) cfg.samples = get_field<std::uint64_t>(doc, "samples");
    if (doc.contains("tau")) {
        // null (as echoed for an unset window) clears it
        if (doc.at("tau").is_null()) {
            cfg.tau.reset();
        } else {
            cfg.tau = get_field<double>(doc, "tau");
        }
    }
    if (doc.contains("seed")) cfg.seed = get_field<std::uint64_t>(doc, "seed");
    if (doc.contains("quad_depth")) cfg.quad_depth = get_field<int>(doc, "quad_depth");
    if (doc.contains("lambda_grid")) cfg.lambda_grid = detail::parse_grid(doc.at("lambda_grid"));
    if (doc.contains("jobs")) cfg.jobs = get_field<unsigned>(doc, "jobs");
    if (doc.contains("out")) cfg.out_dir = get_field<std::string>(doc, "out");
    if (doc.contains("o_value")) cfg.o_value = get_field<double>(doc, "o_value");
    if (doc.contains("x")) cfg.x = get_field<double>(doc, "x");
    if (doc.contains("fuzz")) cfg.fuzz = get_field<double>(doc, "fuzz");
    if (doc.contains("budget")) cfg.budget = get_field<std::uint64_t>(doc, "budget");
}

inline void check_config(const RunConfig& cfg) {
    if (cfg.n_values.empty()) throw ConfigError("at least one n is required");
    if (cfg.samples < 1) throw ConfigError("samples must be positive");
    if (cfg.jobs < 1) throw ConfigError("jobs must be positive");
    if (cfg.tau && !(*cfg.tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(cfg.fuzz >= 0.0)) throw ConfigError("fuzz must be nonnegative");
}

/// Echo of the resolved configuration; the seed is always present.
inline json config_to_json(const RunConfig& cfg) {
    json out;
    if (cfg.system) out["system"] = *cfg.system;
    if (cfg.system_file) out["system_file"] = *cfg.system_file;
    if (cfg.lambda) out["lambda"] = *cfg.lambda;
    if (cfg.p) out["p"] = *cfg.p;
    out["n_values"] = cfg.n_values;
    out["samples"] = cfg.samples;
    out["tau"] = cfg.tau ? json(*cfg.tau) : json(nullptr);
    out["seed"] = cfg.seed;
    if (cfg.quad_depth) out["quad_depth"] = *cfg.quad_depth;
    if (!cfg.lambda_grid.empty()) out["lambda_grid"] = cfg.lambda_grid;
    if (cfg.o_value) out["o_value"] = *cfg.o_value;
    if (cfg.x) out["x"] = *cfg.x;
    out["fuzz"] = cfg.fuzz;
    out["budget"] = cfg.budget;
    return out;
}

inline IfsSystem resolve_system(const RunConfig& cfg) {
    if (cfg.lambda) {
        try {
            return IfsSystem::bernoulli_convolution(*cfg.lambda);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.system) return system_from_json(*cfg.system);
    if (cfg.system_file) return load_system(*cfg.system_file);
    throw ConfigError("no system given: use --lambda, a \"system\" object or \"system_file\"");
}

inline ProbabilityVector resolve_probabilities(const RunConfig& cfg, const IfsSystem& sys) {
    if (!cfg.p) return ProbabilityVector::uniform(sys.alphabet_size());
    std::vector<double> probs = *cfg.p;
    // a single value p on a two-map system means (p, 1 - p)
    if (probs.size() == 1 && sys.alphabet_size() == 2) probs.push_back(1.0 - probs[0]);
    if (probs.size() != sys.alphabet_size()) {
        throw ConfigError("p has " + std::to_string(probs.size()) + " entries for " +
                          std::to_string(sys.alphabet_size()) + " maps");
    }
    try {
        return ProbabilityVector(std::move(probs));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

/// Explicit tau wins; biased p defaults to 4 / sqrt(n); uniform p is unfiltered.
inline TauSchedule resolve_tau(const RunConfig& cfg, const ProbabilityVector& p) {
    if (cfg.tau) return TauSchedule::fixed(*cfg.tau);
    if (!p.is_uniform()) return TauSchedule::clt_scaled(4.0);
    return TauSchedule::none();
}

// ---------------------------------------------------------------------------
// Result records

struct ResultRecord {
    std::string command;
    json config;
    json result;
    std::string csv_name;  // empty when the command has no table
    std::string csv;
    double duration_seconds = 0.0;

    [[nodiscard]] json to_json() const {
        return {{"schema_version", kSchemaVersion},
                {"command", command},
                {"config", config},
                {"result", result},
                {"metadata", {{"tool_version", kToolVersion},
                              {"duration_seconds", duration_seconds}}}};
    }
};

inline void write_record(const ResultRecord& rec, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir);
    const auto dir = std::filesystem::path(out_dir);
    {
        std::ofstream out(dir / "results.json");
        if (!out) throw ConfigError("cannot write results.json in " + out_dir);
        out << rec.to_json().dump(2) << '\n';
    }
    if (!rec.csv_name.empty()) {
        std::ofstream out(dir / rec.csv_name);
        if (!out) throw ConfigError("cannot write " + rec.csv_name + " in " + out_dir);
        out << rec.csv;
    }
}

class CsvWriter {
public:
    explicit CsvWriter(std::initializer_list<const char*> header) {
        bool first = true;
        for (const char* h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((write_cell(cells, first)), ...);
        out_ << '\n';
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    void write_cell(double v, bool& first) {
        sep(first);
        out_ << format_double(v);
    }
    template <class Int>
        requires std::is_integral_v<Int>
    void write_cell(Int v, bool& first) {
        sep(first);
        out_ << v;
    }
    void sep(bool& first) {
        if (!first) out_ << ',';
        first = false;
    }

    std::ostringstream out_;
};

inline json estimate_to_json(const OverlapEstimate& e) {
    return {{"n", e.n},
            {"N", e.samples},
            {"tau", e.tau ? json(*e.tau) : json(nullptr)},
            {"mean_log_beta", e.mean_log_beta},
            {"a_n", e.a_n},
            {"o_hat", e.o_hat},
            {"std_err", e.std_err},
            {"ci", {e.ci_lo, e.ci_hi}},
            {"lower_variant", e.lower_variant},
            {"upper_variant", e.upper_variant},
            {"flagged", e.flagged},
            {"non_generic", e.non_generic},
            {"fuzz", e.fuzz},
            {"coding_depth", e.coding_depth}};
}

inline json bound_to_json(const DimensionBound& b) {
    return {{"hd_bound_raw", b.t_zero},
            {"hd_bound_clamped", b.effective_bound},
            {"residual", b.residual}};
}

namespace detail {

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline EstimatorOptions estimator_options(const RunConfig& cfg, unsigned threads) {
    EstimatorOptions opts;
    opts.budget = cfg.budget;
    opts.threads = threads;
    return opts;
}

/// One estimate per n; exact quadrature when quad_depth is configured.
inline ConvergenceReport run_estimates(const RunConfig& cfg, const IfsSystem& sys,
                                       const ProbabilityVector& p, std::uint64_t seed,
                                       unsigned threads) {
    const auto tau = resolve_tau(cfg, p);
    const auto opts = estimator_options(cfg, threads);
    if (!cfg.quad_depth) {
        return convergence_scan(sys, p, cfg.n_values, cfg.samples, seed, tau, opts);
    }
    ConvergenceReport rep;
    std::vector<double> inv_n;
    std::vector<double> a;
    for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
        const int n = cfg.n_values[i];
        if (i > 0 && n <= cfg.n_values[i - 1]) {
            throw ConfigError("n values must be strictly increasing");
        }
        if (*cfg.quad_depth < n) throw ConfigError("quad_depth must be at least n");
        rep.estimates.push_back(estimate_overlap_exact(sys, p, n, *cfg.quad_depth, tau.at(n), opts));
        inv_n.push_back(1.0 / n);
        a.push_back(rep.estimates.back().a_n);
    }
    std::tie(rep.trend_intercept, rep.trend_slope) = fit_line(inv_n, a);
    return rep;
}

inline json scan_to_json(const ConvergenceReport& rep) {
    json ests = json::array();
    for (const auto& e : rep.estimates) ests.push_back(estimate_to_json(e));
    return {{"estimates", ests},
            {"trend_slope", rep.trend_slope},
            {"trend_intercept", rep.trend_intercept},
            {"headline", estimate_to_json(rep.headline())},
            {"headline_label", "finite-n estimate of o"}};
}

inline double clamp_overlap(double o) { return std::min(std::max(o, 1.0), 2.0); }

/// HD bound from an overlap value: closed form for S_lambda, pressure zero otherwise.
inline DimensionBound bound_for(const IfsSystem& sys, double o) {
    if (auto lambda = sys.bernoulli_lambda(); lambda && *lambda > 0.5) {
        return hd_bound_bernoulli_convolution(*lambda, clamp_overlap(o));
    }
    return pressure_zero(PressureParams::from_system(sys, std::log(std::max(o, 1.0))));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline ResultRecord cmd_estimate_overlap(const RunConfig& cfg) {
    detail::Stopwatch clock;
    check_config(cfg);
    const IfsSystem sys = resolve_system(cfg);
    const ProbabilityVector p = resolve_probabilities(cfg, sys);
    const auto rep = detail::run_estimates(cfg, sys, p, cfg.seed, cfg.jobs);

    CsvWriter csv({"n", "a_n", "o_hat", "ci_lo", "ci_hi", "lower", "upper"});
    for (const auto& e : rep.estimates) {
        csv.row(e.n, e.a_n, e.o_hat, e.ci_lo, e.ci_hi, e.lower_variant, e.upper_variant);
    }
    ResultRecord rec;
    rec.command = "estimate-overlap";
    rec.config = config_to_json(cfg);
    rec.result = detail::scan_to_json(rep);
    rec.result["system"] = system_to_json(sys);
    rec.result["p"] = p.probs();
    rec.result["seed"] = cfg.seed;
    rec.result["backend"] = cfg.quad_depth ? "exact" : "monte_carlo";
    rec.csv_name = "estimate_overlap.csv";
    rec.csv = csv.str();
    rec.duration_seconds = clock.seconds();
    return rec;
}

inline ResultRecord cmd_hd_bound(const RunConfig& cfg) {
    detail::Stopwatch clock;
    check_config(cfg);
    const IfsSystem sys = resolve_system(cfg);
    const ProbabilityVector p = resolve_probabilities(cfg, sys);

    ResultRecord rec;
    rec.command = "hd-bound";
    rec.config = config_to_json(cfg);
    rec.result["system"] = system_to_json(sys);
    rec.result["p"] = p.probs();
    rec.result["biased"] = !p.is_uniform();

    double o = 0.0;
    double o_lo = 0.0;
    double o_hi = 0.0;
    if (cfg.o_value) {
        o = o_lo = o_hi = *cfg.o_value;
        rec.result["o_source"] = "forced";
    } else {
        const auto rep = detail::run_estimates(cfg, sys, p, cfg.seed, cfg.jobs);
        const auto& h = rep.headline();
        o = h.o_hat;
        o_lo = h.ci_lo;
        o_hi = std::max(h.ci_hi, h.upper_variant);
        rec.result["o_source"] = "estimate";
        rec.result["estimate"] = detail::scan_to_json(rep);
        if (!p.is_uniform() && !cfg.tau && !cfg.quad_depth) {
            // tau sensitivity of the headline at half and double the default window
            json sens = json::array();
            for (double c : {2.0, 8.0}) {
                const int n = cfg.headline_n();
                const double tau = c / std::sqrt(static_cast<double>(n));
                const auto e = estimate_overlap_mc(sys, p, n, cfg.samples, tau, cfg.seed,
                                                   detail::estimator_options(cfg, cfg.jobs));
                sens.push_back({{"tau", tau},
                                {"o_hat", e.o_hat},
                                {"hd_bound_raw", detail::bound_for(sys, e.o_hat).t_zero}});
            }
            rec.result["tau_sensitivity"] = sens;
        }
    }
    const auto bound = detail::bound_for(sys, o);
    const auto bound_at_hi = detail::bound_for(sys, o_hi);
    const auto bound_at_lo = detail::bound_for(sys, o_lo);
    rec.result["o_value"] = o;
    rec.result["o_interval"] = {o_lo, o_hi};
    rec.result["bound"] = bound_to_json(bound);
    rec.result["bound_interval"] = {bound_at_hi.t_zero, bound_at_lo.t_zero};

    CsvWriter csv({"o_value", "o_lo", "o_hi", "hd_bound_raw", "hd_bound_clamped", "hd_bound_lo",
                   "hd_bound_hi"});
    csv.row(o, o_lo, o_hi, bound.t_zero, bound.effective_bound, bound_at_hi.t_zero,
            bound_at_lo.t_zero);
    rec.csv_name = "hd_bound.csv";
    rec.csv = csv.str();
    rec.duration_seconds = clock.seconds();
    return rec;
}

/// Per-entry seed, independent of how entries are scheduled.
inline std::uint64_t sweep_seed(std::uint64_t seed, std::size_t index) {
    return seed ^ mix64(static_cast<std::uint64_t>(index));
}

inline ResultRecord cmd_sweep_lambda(const RunConfig& cfg) {
    detail::Stopwatch clock;
    check_config(cfg);
    for (double l : cfg.lambda_grid) {
        if (!(l > 0.5 && l < 1.0)) {
            throw ConfigError("lambda grid value " + format_double(l) + " outside (1/2, 1)");
        }
    }
    const std::size_t m = cfg.lambda_grid.size();
    std::vector<OverlapEstimate> est(m);
    std::vector<DimensionBound> bounds(m);
    // entries are spread over the jobs; each estimate itself runs single-threaded
    detail::parallel_for(m, cfg.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RunConfig entry = cfg;
            entry.lambda = cfg.lambda_grid[i];
            const IfsSystem sys = resolve_system(entry);
            const ProbabilityVector p = resolve_probabilities(entry, sys);
            const int n = cfg.headline_n();
            est[i] = estimate_overlap_mc(sys, p, n, cfg.samples, resolve_tau(cfg, p).at(n),
                                         sweep_seed(cfg.seed, i),
                                         detail::estimator_options(cfg, 1));
            bounds[i] = detail::bound_for(sys, est[i].o_hat);
        }
    });

    CsvWriter csv({"lambda", "o_hat", "o_upper_variant", "hd_bound_raw", "hd_bound_clamped"});
    json rows = json::array();
    for (std::size_t i = 0; i < m; ++i) {
        csv.row(cfg.lambda_grid[i], est[i].o_hat, est[i].upper_variant, bounds[i].t_zero,
                bounds[i].effective_bound);
        json row = estimate_to_json(est[i]);
        row["lambda"] = cfg.lambda_grid[i];
        row["seed"] = sweep_seed(cfg.seed, i);
        row["bound"] = bound_to_json(bounds[i]);
        rows.push_back(row);
    }
    ResultRecord rec;
    rec.command = "sweep-lambda";
    rec.config = config_to_json(cfg);
    rec.result = {{"rows", rows}};
    rec.csv_name = "sweep_lambda.csv";
    rec.csv = csv.str();
    rec.duration_seconds = clock.seconds();
    return rec;
}

inline std::string profile_csv(const MultiplicityProfile& prof) {
    CsvWriter csv({"breakpoint_lo", "breakpoint_hi", "count"});
    for (std::size_t g = 0; g < prof.counts.size(); ++g) {
        csv.row(prof.breakpoints[g], prof.breakpoints[g + 1], prof.counts[g]);
    }
    return csv.str();
}

inline ResultRecord cmd_beta_profile(const RunConfig& cfg) {
    detail::Stopwatch clock;
    check_config(cfg);
    const IfsSystem sys = resolve_system(cfg);
    const int n = cfg.headline_n();
    const auto prof = multiplicity_profile(sys, n);
    ResultRecord rec;
    rec.command = "beta-profile";
    rec.config = config_to_json(cfg);
    rec.result = {{"system", system_to_json(sys)},
                  {"n", n},
                  {"gaps", prof.gaps()},
                  {"max_count", prof.max_count()},
                  {"weighted_length", prof.weighted_length()},
                  {"hull", {sys.hull().lo, sys.hull().hi}}};
    rec.csv_name = "beta_profile.csv";
    rec.csv = profile_csv(prof);
    rec.duration_seconds = clock.seconds();
    return rec;
}

inline ResultRecord cmd_validate(const RunConfig& cfg) {
    detail::Stopwatch clock;
    const IfsSystem sys = resolve_system(cfg);
    const auto rep = validate_system(sys);
    json pairs = json::array();
    for (const auto& [i, j] : rep.overlapping_pairs) pairs.push_back({i, j});
    ResultRecord rec;
    rec.command = "validate";
    rec.config = config_to_json(cfg);
    rec.result = {{"system", system_to_json(sys)},
                  {"hull", {sys.hull().lo, sys.hull().hi}},
                  {"ok", rep.ok()},
                  {"contractions_ok", rep.contractions_ok},
                  {"hull_invariant", rep.hull_invariant},
                  {"hull_minimal", rep.hull_minimal},
                  {"overlap", rep.overlap},
                  {"overlapping_pairs", pairs},
                  {"covers_hull", rep.covers_hull},
                  {"notes", rep.notes}};
    rec.duration_seconds = clock.seconds();
    return rec;
}

inline ResultRecord cmd_count_chains(const RunConfig& cfg) {
    detail::Stopwatch clock;
    check_config(cfg);
    if (!cfg.x) throw ConfigError("count-chains needs a query point x");
    const IfsSystem sys = resolve_system(cfg);
    const int n = cfg.headline_n();
    ResultRecord rec;
    rec.command = "count-chains";
    rec.config = config_to_json(cfg);
    const auto c = count_chains(sys, n, *cfg.x, cfg.fuzz, cfg.budget);
    rec.result = {{"system", system_to_json(sys)},
                  {"n", n},
                  {"x", *cfg.x},
                  {"fuzz", cfg.fuzz},
                  {"lower", c.lower},
                  {"upper", c.upper}};
    if (cfg.p || cfg.tau) {
        const ProbabilityVector p = resolve_probabilities(cfg, sys);
        const auto tau = resolve_tau(cfg, p).at(n);
        if (tau) {
            const auto g = count_chains_generic(sys, n, *cfg.x, cfg.fuzz, p, *tau, cfg.budget);
            rec.result["generic"] = {{"tau", *tau}, {"lower", g.lower}, {"upper", g.upper}};
        }
    }
    if (sys.alphabet_size() == 2 && n >= 1) {
        rec.result["by_symbol0_count"] = count_by_ones(sys, n, *cfg.x, cfg.fuzz, cfg.budget);
    }
    rec.duration_seconds = clock.seconds();
    return rec;
}

}  // namespace overlap_ifs
