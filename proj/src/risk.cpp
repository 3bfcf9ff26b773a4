#include "warptree/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "warptree/error.hpp"
#include "warptree/format.hpp"
#include "warptree/parallel.hpp"

namespace warptree {

namespace {

std::vector<double> estimator_breakpoints(const WarpedEstimator& est, const TestFunction& f, const DesignCdf& design) {
    std::vector<double> breaks;
    if (est.kind == WarpedEstimator::Kind::wavelet_expansion) {
        const int level = std::max(est.terms.max_level + 1, 0);
        const std::int64_t cells = std::int64_t{1} << level;
        for (std::int64_t m = 1; m < cells; ++m) breaks.push_back(std::ldexp(static_cast<double>(m), -level));
    } else {
        for (const auto& cell : est.partition.leaves()) breaks.push_back(design.cdf(interval(cell).left()));
    }
    for (double x : f.breakpoints()) breaks.push_back(design.cdf(x));
    for (double x : design.kinks()) breaks.push_back(design.cdf(x));
    return breaks;
}

// Welford accumulator; merged in replicate order.
struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double value) {
        count += 1.0;
        const double delta = value - mean;
        mean += delta / count;
        m2 += delta * (value - mean);
    }
    double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
    double std_error() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

void mix(std::uint64_t& hash, const std::string& text) {
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    hash ^= 0xff;
    hash *= 1099511628211ULL;
}

struct ReplicateOutcome {
    bool ok = false;
    double distance = 0.0;
    double kappa = 0.0;
    std::string error;
};

ReplicateOutcome run_replicate(const ExperimentConfig& cfg, std::size_t r) {
    ReplicateOutcome out;
    try {
        const auto seed = replicate_seed(cfg.base_seed, r);
        const auto z = generate_sample(cfg.design, cfg.function, cfg.sigma, cfg.bound, cfg.n, seed);
        FitConfig fit_cfg = cfg.fit;
        fit_cfg.design = cfg.design;
        if (cfg.cross_validate)
            fit_cfg.kappa = cv_kappa(z, cfg.kappa_grid, cfg.folds, fit_cfg, replicate_seed(seed, 0x5eed)).kappa;
        const auto est = fit(z, fit_cfg);
        out.distance = l2g_distance(cfg.function, est, cfg.design, cfg.quad);
        out.kappa = fit_cfg.kappa;
        out.ok = true;
    } catch (const Error& e) {
        out.error = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    return out;
}

std::vector<ReplicateOutcome> run_replicates(const ExperimentConfig& cfg, int n_reps) {
    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(n_reps));
    parallel_for(
        outcomes.size(), [&](std::size_t r) { outcomes[r] = run_replicate(cfg, r); },
        cfg.threads == 0 ? thread_budget() : cfg.threads);
    return outcomes;
}

}  // namespace

double l2g_distance(const TestFunction& f, const WarpedEstimator& est, const DesignCdf& design,
                    const QuadratureOptions& quad) {
    if (quad.order < 16) fail(ErrorCode::invalid_argument, "quadrature order must be >= 16");
    const auto integrand = [&](double u) {
        const double r = f(design.inverse(u)) - predict_warped(est, u);
        return r * r;
    };
    const double squared = integrate(integrand, 0.0, 1.0, estimator_breakpoints(est, f, design), quad);
    return std::sqrt(std::max(0.0, squared));
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t hash = 14695981039346656037ULL;
    mix(hash, cfg.design.name());
    mix(hash, cfg.function.name());
    mix(hash, format_double(cfg.sigma));
    mix(hash, format_double(cfg.bound));
    mix(hash, to_string(cfg.fit.rule));
    mix(hash, format_double(cfg.fit.kappa));
    mix(hash, format_double(cfg.fit.gamma));
    mix(hash, format_double(cfg.fit.s_assumed));
    mix(hash, cfg.fit.wavelet.name());
    mix(hash, cfg.fit.linear_levels ? std::to_string(*cfg.fit.linear_levels) : "-");
    mix(hash, std::to_string(cfg.n));
    mix(hash, std::to_string(cfg.n_reps));
    mix(hash, std::to_string(cfg.base_seed));
    mix(hash, cfg.cross_validate ? "cv" : "fixed");
    if (cfg.cross_validate) {
        for (double k : cfg.kappa_grid) mix(hash, format_double(k));
        mix(hash, std::to_string(cfg.folds));
    }
    mix(hash, std::to_string(cfg.quad.order));
    mix(hash, format_double(cfg.quad.tolerance));
    return hash;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
    std::uint64_t z = base_seed + replicate * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

nlohmann::json risk_to_json(const RiskResult& r) {
    return {{"mean_sq_error", r.mean_sq_error}, {"std_error", r.std_error}, {"n_reps", r.n_reps},
            {"n_failed", r.n_failed},           {"n_sample", r.n_sample},   {"rule", to_string(r.rule)},
            {"config_hash", r.config_hash},     {"mean_kappa", r.mean_kappa}, {"first_error", r.first_error}};
}

RiskResult risk_from_json(const nlohmann::json& doc) {
    try {
        RiskResult r;
        r.mean_sq_error = doc.at("mean_sq_error").get<double>();
        r.std_error = doc.at("std_error").get<double>();
        r.n_reps = doc.at("n_reps").get<int>();
        r.n_failed = doc.at("n_failed").get<int>();
        r.n_sample = doc.at("n_sample").get<std::int64_t>();
        r.rule = parse_rule(doc.at("rule").get<std::string>());
        r.config_hash = doc.at("config_hash").get<std::uint64_t>();
        r.mean_kappa = doc.at("mean_kappa").get<double>();
        r.first_error = doc.at("first_error").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("risk JSON: ") + e.what());
    }
}

RiskResult mc_risk(const ExperimentConfig& cfg) {
    if (cfg.n_reps < 2) fail(ErrorCode::invalid_argument, "mc_risk needs at least 2 replicates");
    cfg.fit.validate();
    const auto outcomes = run_replicates(cfg, cfg.n_reps);
    Moments risk, kappa;
    RiskResult result;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            if (result.n_failed++ == 0) result.first_error = o.error;
            continue;
        }
        risk.add(o.distance * o.distance);
        kappa.add(o.kappa);
    }
    result.mean_sq_error = risk.mean;
    result.std_error = risk.std_error();
    result.n_reps = cfg.n_reps;
    result.n_sample = cfg.n;
    result.rule = cfg.fit.rule;
    result.config_hash = config_hash(cfg);
    result.mean_kappa = kappa.mean;
    return result;
}

double log_log_slope(const std::vector<RatePoint>& points) {
    if (points.size() < 2) fail(ErrorCode::invalid_argument, "slope needs at least two points");
    std::vector<double> xs, ys;
    for (const auto& p : points) {
        if (p.n < 3 || !(p.mean_risk > 0.0)) fail(ErrorCode::invalid_argument, "degenerate rate point at n=" + std::to_string(p.n));
        const double n = static_cast<double>(p.n);
        xs.push_back(std::log(std::log(n) / n));
        ys.push_back(std::log(p.mean_risk));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) fail(ErrorCode::invalid_argument, "degenerate grid");
    return sxy / sxx;
}

RateReport make_rate_report(std::vector<RatePoint> points, double smoothness) {
    std::sort(points.begin(), points.end(), [](const RatePoint& a, const RatePoint& b) { return a.n < b.n; });
    RateReport report;
    report.fitted_slope = log_log_slope(points);
    report.theoretical_exponent = 2.0 * smoothness / (2.0 * smoothness + 1.0);
    report.points = std::move(points);
    return report;
}

nlohmann::json rate_report_to_json(const RateReport& report) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : report.points)
        points.push_back({{"n", p.n}, {"mean_risk", p.mean_risk}, {"std_error", p.std_error}});
    return {{"points", std::move(points)},
            {"fitted_slope", report.fitted_slope},
            {"theoretical_exponent", report.theoretical_exponent},
            {"band", {report.band_low, report.band_high}},
            {"within_band", report.within_band()}};
}

RateReport rate_experiment(const std::vector<std::int64_t>& grid, const ExperimentConfig& cfg) {
    if (grid.size() < 4) fail(ErrorCode::invalid_argument, "degenerate grid: need at least 4 sample sizes");
    for (auto n : grid)
        if (n < 4 || (n & (n - 1)) != 0) fail(ErrorCode::invalid_argument, "grid sizes must be powers of two");
    std::vector<RatePoint> points;
    for (auto n : grid) {
        ExperimentConfig point_cfg = cfg;
        point_cfg.n = n;
        const auto risk = mc_risk(point_cfg);
        points.push_back({n, risk.mean_sq_error, risk.std_error});
    }
    return make_rate_report(std::move(points), cfg.fit.s_assumed);
}

CvResult cv_kappa(const Sample& z, const std::vector<double>& kappa_grid, int folds, const FitConfig& cfg,
                  std::uint64_t seed) {
    if (kappa_grid.empty()) fail(ErrorCode::invalid_argument, "kappa grid is empty");
    if (folds < 2) fail(ErrorCode::invalid_argument, "cross-validation needs at least 2 folds");
    if (z.size() / static_cast<std::size_t>(folds) < 4)
        fail(ErrorCode::sample_too_small, "fold too small to fit (n/folds < 4)");

    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold_of(z.size());
    for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = static_cast<int>(i % folds);

    std::vector<Sample> train(folds), test(folds);
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (int f = 0; f < folds; ++f) {
            auto& target = fold_of[i] == f ? test[f] : train[f];
            target.x.push_back(z.x[i]);
            target.y.push_back(z.y[i]);
        }
    }

    CvResult result;
    double best = std::numeric_limits<double>::infinity();
    for (double kappa : kappa_grid) {
        FitConfig fold_cfg = cfg;
        fold_cfg.kappa = kappa;
        double score = 0.0;
        try {
            for (int f = 0; f < folds; ++f) {
                const auto est = fit(train[f], fold_cfg);
                for (std::size_t i = 0; i < test[f].size(); ++i) {
                    const double r = predict(est, test[f].x[i]) - test[f].y[i];
                    score += r * r;
                }
            }
            score /= static_cast<double>(z.size());
        } catch (const Error& e) {
            if (e.code() != ErrorCode::sample_too_small) throw;
            score = std::numeric_limits<double>::infinity();
        }
        result.curve.emplace_back(kappa, score);
        if (score < best || (score == best && kappa < result.kappa)) {
            best = score;
            result.kappa = kappa;
        }
    }
    if (!std::isfinite(best)) fail(ErrorCode::sample_too_small, "no kappa in the grid yields a usable threshold");
    return result;
}

ExcessProbability excess_probability(const ExperimentConfig& cfg, double eta, int n_reps) {
    if (!(eta >= 0.0)) fail(ErrorCode::invalid_argument, "eta must be >= 0");
    if (n_reps < 1) fail(ErrorCode::invalid_argument, "need at least one replicate");
    const auto outcomes = run_replicates(cfg, n_reps);
    int exceed = 0, used = 0;
    for (const auto& o : outcomes) {
        if (!o.ok) continue;
        ++used;
        exceed += o.distance > eta;
    }
    if (used == 0) fail(ErrorCode::invalid_argument, "every replicate failed: " + outcomes.front().error);
    ExcessProbability out;
    out.n_reps = used;
    out.fraction = static_cast<double>(exceed) / used;
    out.std_error = std::sqrt(out.fraction * (1.0 - out.fraction) / used);
    return out;
}

BiasVarianceSplit bias_variance_split(const TestFunction& f, const WarpedEstimator& est, const QuadratureOptions& quad) {
    if (est.kind != WarpedEstimator::Kind::wavelet_expansion)
        fail(ErrorCode::invalid_argument, "bias/variance split needs a wavelet-expansion estimator");
    // Projection of f onto the retained indices, with quadrature coefficients.
    WarpedEstimator projection = est;
    BiasVarianceSplit split;
    for (auto& [ix, value] : projection.terms.entries) {
        const double d = theoretical_wavelet_coeff(f, est.wavelet, est.design, ix, quad);
        const double delta = d - value;
        split.variance += delta * delta;
        value = d;
    }
    const double bias = l2g_distance(f, projection, est.design, quad);
    const double direct = l2g_distance(f, est, est.design, quad);
    split.bias = bias * bias;
    split.direct = direct * direct;
    return split;
}

}  // namespace warptree
