#include "warptree/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "warptree/design.hpp"
#include "warptree/error.hpp"
#include "warptree/estimators.hpp"
#include "warptree/format.hpp"
#include "warptree/risk.hpp"

namespace warptree {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
    std::string command;
    std::string design = "uniform";
    std::string function = "sinusoid";
    double sigma = 0.1;
    double bound = 0.0;
    std::int64_t n = 1024;
    std::uint64_t seed = 1;
    double kappa = 1.0;
    double gamma = 1.0;
    double s_assumed = 1.0;
    std::string rules = "vertical";
    int reps = 20;
    std::string grid = "2^9..2^15";
    std::string out_dir = ".";
    std::string sample;
    std::string wavelet = "haar";
    int folds = 5;
    std::string kappa_grid = "0.25,0.5,0.75,1,1.5,2,3";
    bool cross_validate = false;
    bool self_test = false;
    int max_points = -1;
    bool design_given = false;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

std::int64_t parse_size(const std::string& text) {
    try {
        std::size_t used = 0;
        if (text.rfind("2^", 0) == 0) {
            const int e = std::stoi(text.substr(2), &used);
            if (used + 2 != text.size() || e < 0 || e > 40) throw std::invalid_argument(text);
            return std::int64_t{1} << e;
        }
        const long long value = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::logic_error&) {
        fail(ErrorCode::invalid_argument, "bad sample size '" + text + "'");
    }
}

/// "2^9..2^15" (every power in between) or a comma list.
std::vector<std::int64_t> parse_grid(const std::string& text) {
    std::vector<std::int64_t> grid;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const auto lo = parse_size(text.substr(0, dots)), hi = parse_size(text.substr(dots + 2));
        if (lo < 1 || hi < lo) fail(ErrorCode::invalid_argument, "bad grid range '" + text + "'");
        for (std::int64_t n = lo; n <= hi; n *= 2) grid.push_back(n);
    } else {
        for (const auto& item : split(text, ',')) grid.push_back(parse_size(item));
    }
    return grid;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> values;
    for (const auto& item : split(text, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            fail(ErrorCode::invalid_argument, "bad number '" + item + "'");
        }
    }
    if (values.empty()) fail(ErrorCode::invalid_argument, "empty list '" + text + "'");
    return values;
}

std::vector<Rule> parse_rules(const std::string& text) {
    std::vector<Rule> rules;
    for (const auto& item : split(text, ',')) rules.push_back(parse_rule(item));
    if (rules.empty()) fail(ErrorCode::invalid_argument, "no rule given");
    return rules;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out << text;
    if (!out.flush()) fail(ErrorCode::io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_text(path, doc.dump(2) + "\n"); }

fs::path prepare_out_dir(const RunConfig& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void validate_common(const RunConfig& cfg) {
    if (!(cfg.sigma >= 0.0)) fail(ErrorCode::invalid_argument, "sigma must be >= 0");
    if (!(cfg.kappa > 0.0)) fail(ErrorCode::invalid_argument, "kappa must be > 0");
    if (!(cfg.gamma > 0.0)) fail(ErrorCode::invalid_argument, "gamma must be > 0");
    if (!(cfg.s_assumed > 0.0)) fail(ErrorCode::invalid_argument, "s must be > 0");
    if (cfg.folds < 2) fail(ErrorCode::invalid_argument, "folds must be >= 2");
}

FitConfig fit_config(const RunConfig& cfg, Rule rule, const DesignCdf& design) {
    FitConfig fc;
    fc.kappa = cfg.kappa;
    fc.gamma = cfg.gamma;
    fc.s_assumed = cfg.s_assumed;
    fc.wavelet = make_wavelet(cfg.wavelet);
    fc.design = design;
    fc.rule = rule;
    fc.validate();
    return fc;
}

struct LoadedSample {
    Sample z;
    DesignCdf design = uniform_design();
    std::optional<TestFunction> truth;
};

/// Reads the sample and its sidecar; an explicit --design overrides the sidecar.
LoadedSample load_sample(const RunConfig& cfg) {
    const fs::path path = cfg.sample.empty() ? fs::path(cfg.out_dir) / "sample.csv" : fs::path(cfg.sample);
    LoadedSample loaded;
    loaded.z = read_sample_csv(path);
    if (loaded.z.size() == 0) fail(ErrorCode::empty_sample, path.string() + " has no rows");
    std::string design = cfg.design;
    const auto side = sidecar_path(path);
    if (fs::exists(side)) {
        std::ifstream in(side, std::ios::binary);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::parse, side.string() + ": " + e.what());
        }
        loaded.z.meta = meta_from_json(doc);
        if (loaded.z.meta.n != static_cast<std::int64_t>(loaded.z.size()))
            fail(ErrorCode::parse, side.string() + ": n does not match the CSV row count");
        if (!cfg.design_given) design = loaded.z.meta.design;
    }
    loaded.design = make_design(design);
    loaded.z.meta.design = design;
    const auto& names = function_names();
    if (std::find(names.begin(), names.end(), loaded.z.meta.function) != names.end())
        loaded.truth = make_function(loaded.z.meta.function, loaded.design);
    return loaded;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.n < 1) fail(ErrorCode::invalid_argument, "n must be >= 1");
    validate_common(cfg);
    const auto design = make_design(cfg.design);
    const auto f = make_function(cfg.function, design);
    const auto z = generate_sample(design, f, cfg.sigma, cfg.bound, cfg.n, cfg.seed);
    const auto dir = prepare_out_dir(cfg);
    const auto csv = cfg.sample.empty() ? dir / "sample.csv" : fs::path(cfg.sample);
    write_sample_csv(z, csv);
    write_json(sidecar_path(csv), meta_to_json(z.meta));
    out << "wrote " << csv.string() << " (n=" << z.size() << ")\n";
    return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
    validate_common(cfg);
    const auto rules = parse_rules(cfg.rules);
    if (rules.size() != 1) fail(ErrorCode::invalid_argument, "fit takes exactly one rule");
    const auto loaded = load_sample(cfg);
    const auto fc = fit_config(cfg, rules.front(), loaded.design);
    const auto est = fit(loaded.z, fc);
    const double risk = empirical_risk(est, loaded.z);

    nlohmann::json report = {{"n", est.meta.n},
                             {"lambda_n", est.meta.lambda_n},
                             {"j_star", est.meta.j_star},
                             {"retained", est.retained()},
                             {"tree_nodes", est.tree.size()},
                             {"rule", to_string(est.meta.rule)},
                             {"empirical_risk", risk}};
    if (loaded.truth) report["l2g_risk"] = std::pow(l2g_distance(*loaded.truth, est, loaded.design), 2);

    const auto dir = prepare_out_dir(cfg);
    write_json(dir / "estimator.json", estimator_to_json(est));
    write_json(dir / "tree.json", tree_to_json(est.tree));
    write_json(dir / "fit_report.json", report);
    out << "n=" << est.meta.n << "\n"
        << "lambda_n=" << format_double(est.meta.lambda_n) << "\n"
        << "j_star=" << est.meta.j_star << "\n"
        << "retained=" << est.retained() << "\n"
        << "tree_nodes=" << est.tree.size() << "\n"
        << "empirical_risk=" << format_double(risk) << "\n";
    return 0;
}

ExperimentConfig experiment_config(const RunConfig& cfg, Rule rule) {
    ExperimentConfig ec;
    ec.design = make_design(cfg.design);
    ec.function = make_function(cfg.function, ec.design);
    ec.sigma = cfg.sigma;
    ec.bound = cfg.bound;
    ec.fit = fit_config(cfg, rule, ec.design);
    ec.n_reps = cfg.reps;
    ec.base_seed = cfg.seed;
    ec.cross_validate = cfg.cross_validate;
    ec.kappa_grid = parse_doubles(cfg.kappa_grid);
    ec.folds = cfg.folds;
    return ec;
}

/// Fixture with risk exactly (ln n / n)^{2/3}.
int rates_self_test(const RunConfig& cfg, std::ostream& out) {
    const auto grid = parse_grid(cfg.grid);
    std::vector<RatePoint> points;
    for (auto n : grid) {
        const double x = std::log(static_cast<double>(n)) / static_cast<double>(n);
        points.push_back({n, std::pow(x, 2.0 / 3.0), 0.0});
    }
    const auto report = make_rate_report(points, 1.0);
    out << "self-test slope=" << format_double(report.fitted_slope) << "\n";
    if (std::abs(report.fitted_slope - 2.0 / 3.0) > 1e-6)
        fail(ErrorCode::invalid_argument, "self-test slope " + format_double(report.fitted_slope) + " != 2/3");
    out << "self-test PASS\n";
    return 0;
}

int cmd_rates(const RunConfig& cfg, std::ostream& out) {
    validate_common(cfg);
    if (cfg.self_test) return rates_self_test(cfg, out);
    if (cfg.reps < 2) fail(ErrorCode::invalid_argument, "reps must be >= 2");
    const auto grid = parse_grid(cfg.grid);
    if (grid.size() < 4) fail(ErrorCode::invalid_argument, "degenerate grid: need at least 4 sample sizes");
    for (auto n : grid)
        if (n < 4 || (n & (n - 1)) != 0) fail(ErrorCode::invalid_argument, "grid sizes must be powers of two");
    const auto rules = parse_rules(cfg.rules);
    std::vector<ExperimentConfig> configs;
    for (Rule rule : rules) configs.push_back(experiment_config(cfg, rule));
    const auto dir = prepare_out_dir(cfg);

    std::ostringstream risk_csv, plot_csv;
    risk_csv << "n,rule,kappa,gamma,mean_risk,std_err,n_reps,seed\n";
    plot_csv << "log_lognn,log_risk,rule\n";
    nlohmann::json reports = nlohmann::json::object();
    int computed = 0;
    for (std::size_t r = 0; r < rules.size(); ++r) {
        std::vector<RatePoint> points;
        for (auto n : grid) {
            auto ec = configs[r];
            ec.n = n;
            const auto hash = config_hash(ec);
            const auto checkpoint = dir / ("checkpoint_" + to_string(rules[r]) + "_n" + std::to_string(n) + ".json");
            std::optional<RiskResult> risk;
            if (fs::exists(checkpoint)) {
                try {
                    std::ifstream in(checkpoint, std::ios::binary);
                    const auto doc = nlohmann::json::parse(in);
                    auto saved = risk_from_json(doc);
                    if (saved.config_hash == hash) risk = saved;
                } catch (const std::exception&) {
                    // unreadable checkpoint: recompute
                }
            }
            if (!risk) {
                if (cfg.max_points >= 0 && computed >= cfg.max_points)
                    fail(ErrorCode::interrupted, "stopped after " + std::to_string(computed) + " new points");
                risk = mc_risk(ec);
                write_json(checkpoint, risk_to_json(*risk));
                ++computed;
            }
            if (risk->n_failed == risk->n_reps)
                fail(ErrorCode::sample_too_small, "every replicate failed at n=" + std::to_string(n) + ": " + risk->first_error);
            const double kappa = cfg.cross_validate ? risk->mean_kappa : cfg.kappa;
            risk_csv << n << ',' << to_string(rules[r]) << ',' << format_double(kappa) << ',' << format_double(cfg.gamma)
                     << ',' << format_double(risk->mean_sq_error) << ',' << format_double(risk->std_error) << ','
                     << risk->n_reps - risk->n_failed << ',' << cfg.seed << '\n';
            const double nn = static_cast<double>(n);
            plot_csv << format_double(std::log(std::log(nn) / nn)) << ',' << format_double(std::log(risk->mean_sq_error))
                     << ',' << to_string(rules[r]) << '\n';
            points.push_back({n, risk->mean_sq_error, risk->std_error});
        }
        const auto report = make_rate_report(points, cfg.s_assumed);
        reports[to_string(rules[r])] = rate_report_to_json(report);
        out << to_string(rules[r]) << " slope=" << format_double(report.fitted_slope)
            << " theoretical=" << format_double(report.theoretical_exponent) << "\n";
    }
    write_text(dir / "risk.csv", risk_csv.str());
    write_text(dir / "rates_plot.csv", plot_csv.str());
    write_json(dir / "rate_report.json", reports);
    return 0;
}

bool retained_subset(const WarpedEstimator& inner, const WarpedEstimator& outer) {
    return std::all_of(inner.terms.entries.begin(), inner.terms.entries.end(),
                       [&](const auto& entry) { return outer.terms.contains(entry.first); });
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
    validate_common(cfg);
    const auto loaded = load_sample(cfg);
    const std::vector<Rule> rules = {Rule::linear, Rule::hard, Rule::vertical, Rule::piecewise};
    std::vector<WarpedEstimator> fits;
    for (Rule rule : rules) fits.push_back(fit(loaded.z, fit_config(cfg, rule, loaded.design)));
    const bool contained = retained_subset(fits[1], fits[2]);

    std::ostringstream csv;
    csv << "rule,retained,tree_nodes,empirical_risk,l2g_risk,hard_subset_of_vertical\n";
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& est = fits[i];
        csv << to_string(rules[i]) << ',' << est.retained() << ',' << est.tree.size() << ','
            << format_double(empirical_risk(est, loaded.z)) << ',';
        if (loaded.truth) csv << format_double(std::pow(l2g_distance(*loaded.truth, est, loaded.design), 2));
        csv << ',' << (contained ? "true" : "false") << '\n';
    }
    const auto dir = prepare_out_dir(cfg);
    write_text(dir / "compare.csv", csv.str());
    out << csv.str();
    return 0;
}

int cmd_cv(const RunConfig& cfg, std::ostream& out) {
    validate_common(cfg);
    const auto rules = parse_rules(cfg.rules);
    if (rules.size() != 1) fail(ErrorCode::invalid_argument, "cv takes exactly one rule");
    const auto loaded = load_sample(cfg);
    const auto grid = parse_doubles(cfg.kappa_grid);
    for (double k : grid)
        if (!(k > 0.0)) fail(ErrorCode::invalid_argument, "kappa grid values must be > 0");
    const auto result = cv_kappa(loaded.z, grid, cfg.folds, fit_config(cfg, rules.front(), loaded.design), cfg.seed);
    std::ostringstream csv;
    csv << "kappa,cv_score\n";
    for (const auto& [kappa, score] : result.curve) csv << format_double(kappa) << ',' << format_double(score) << '\n';
    const auto dir = prepare_out_dir(cfg);
    write_text(dir / "cv_curve.csv", csv.str());
    out << csv.str() << "selected_kappa=" << format_double(result.kappa) << "\n";
    return 0;
}

std::string one_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Warped-wavelet regression with tree thresholding", "warptree"};
    app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
    app.require_subcommand(1, 1);
    app.fallthrough();

    auto* design_opt = app.add_option("--design", cfg.design, "Design distribution (uniform, power2, ...)");
    app.add_option("--function", cfg.function, "Regression function from the catalog");
    app.add_option("--sigma", cfg.sigma, "Noise standard deviation");
    app.add_option("--M", cfg.bound, "Bound on |y| (0 selects 2|f|_inf + 4 sigma)");
    app.add_option("--n", cfg.n, "Sample size");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--kappa", cfg.kappa, "Threshold constant");
    app.add_option("--gamma", cfg.gamma, "Finest-level exponent");
    app.add_option("--s", cfg.s_assumed, "Assumed smoothness");
    app.add_option("--rule", cfg.rules, "Rule or comma-separated rules");
    app.add_option("--reps", cfg.reps, "Monte Carlo replicates per sample size");
    app.add_option("--grid", cfg.grid, "Sample sizes: 2^a..2^b or a comma list");
    app.add_option("--out", cfg.out_dir, "Output directory");
    app.add_option("--sample", cfg.sample, "Sample CSV (default OUT/sample.csv)");
    app.add_option("--wavelet", cfg.wavelet, "haar or db4..db12");
    app.add_option("--folds", cfg.folds, "Cross-validation folds");
    app.add_option("--kappa-grid", cfg.kappa_grid, "Comma-separated kappa candidates");
    app.add_flag("--cv", cfg.cross_validate, "Select kappa by cross-validation in each replicate");
    app.add_flag("--self-test", cfg.self_test, "Replay the exact-power slope fixture");
    app.add_option("--max-points", cfg.max_points)->group("");

    for (const char* name : {"simulate", "fit", "rates", "compare", "cv"})
        app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "ERROR:invalid_argument:" << one_line(e.what()) << "\n";
        return 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.design_given = design_opt->count() > 0;

    try {
        if (cfg.command == "simulate") return cmd_simulate(cfg, out);
        if (cfg.command == "fit") return cmd_fit(cfg, out);
        if (cfg.command == "rates") return cmd_rates(cfg, out);
        if (cfg.command == "compare") return cmd_compare(cfg, out);
        return cmd_cv(cfg, out);
    } catch (const Error& e) {
        err << "ERROR:" << error_code_name(e.code()) << ':' << one_line(e.what()) << "\n";
    } catch (const std::exception& e) {
        err << "ERROR:internal:" << one_line(e.what()) << "\n";
    }
    return 1;
}

}  // namespace warptree
