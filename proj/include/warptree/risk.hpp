#pragma once

// L2(G_X) risk, Monte Carlo replicate experiments, convergence-rate fits and
// cross-validated selection of the threshold constant kappa.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "warptree/design.hpp"
#include "warptree/estimators.hpp"
#include "warptree/quadrature.hpp"

namespace warptree {

/// sqrt( int (f - f_z)^2 dG_X ), integrated in the warped coordinate and split
/// at the estimator's cell boundaries and the jumps of f.
double l2g_distance(const TestFunction& f, const WarpedEstimator& est, const DesignCdf& design,
                    const QuadratureOptions& quad = {});

struct ExperimentConfig {
    DesignCdf design = uniform_design();
    TestFunction function = sinusoid_function();
    double sigma = 0.1;
    double bound = 0.0;  // <= 0: default_bound(function, sigma)
    FitConfig fit;
    std::int64_t n = 1024;
    int n_reps = 20;
    std::uint64_t base_seed = 1;
    /// Select kappa per replicate by K-fold CV over `kappa_grid`.
    bool cross_validate = false;
    std::vector<double> kappa_grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
    int folds = 5;
    QuadratureOptions quad;
    std::size_t threads = 0;  // 0: thread_budget()
};

/// Stable 64-bit hash of every field that influences the result.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// splitmix64 of (base + replicate), independent of scheduling.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate);

struct RiskResult {
    double mean_sq_error = 0.0;
    double std_error = 0.0;
    int n_reps = 0;
    int n_failed = 0;
    std::int64_t n_sample = 0;
    Rule rule = Rule::vertical;
    std::uint64_t config_hash = 0;
    double mean_kappa = 0.0;  // average kappa actually used
    std::string first_error;
};

nlohmann::json risk_to_json(const RiskResult& r);
RiskResult risk_from_json(const nlohmann::json& doc);

/// Mean and standard error of ||f - f_z||^2 over independent replicates.
RiskResult mc_risk(const ExperimentConfig& cfg);

struct RatePoint {
    std::int64_t n = 0;
    double mean_risk = 0.0;
    double std_error = 0.0;
};

struct RateReport {
    std::vector<RatePoint> points;
    double fitted_slope = 0.0;
    double theoretical_exponent = 0.0;  // 2s/(2s+1)
    double band_low = 0.45;
    double band_high = 0.95;

    bool within_band() const { return fitted_slope >= band_low && fitted_slope <= band_high; }
};

/// OLS slope of log(risk) against log(ln n / n).
double log_log_slope(const std::vector<RatePoint>& points);
RateReport make_rate_report(std::vector<RatePoint> points, double smoothness);
nlohmann::json rate_report_to_json(const RateReport& report);

/// Grid of >= 4 powers of two; cfg.n is overridden per point.
RateReport rate_experiment(const std::vector<std::int64_t>& grid, const ExperimentConfig& cfg);

struct CvResult {
    double kappa = 0.0;
    std::vector<std::pair<double, double>> curve;  // (kappa, mean held-out squared error)
};

/// K-fold CV over kappa_grid; ties go to the smallest kappa. Grid values whose
/// threshold is >= 1 on the training folds score +inf.
CvResult cv_kappa(const Sample& z, const std::vector<double>& kappa_grid, int folds, const FitConfig& cfg,
                  std::uint64_t seed);

struct ExcessProbability {
    double fraction = 0.0;
    double std_error = 0.0;
    int n_reps = 0;
};

/// Fraction of replicates with ||f - f_z|| > eta.
ExcessProbability excess_probability(const ExperimentConfig& cfg, double eta, int n_reps);

struct BiasVarianceSplit {
    double direct = 0.0;    // ||f - f_z||^2
    double bias = 0.0;      // e1 = ||f - Pi_Lambda f||^2
    double variance = 0.0;  // e2 = sum over retained indices of (d_I - d_I(z))^2
};

/// Wavelet-expansion estimators only.
BiasVarianceSplit bias_variance_split(const TestFunction& f, const WarpedEstimator& est,
                                      const QuadratureOptions& quad = {});

}  // namespace warptree
