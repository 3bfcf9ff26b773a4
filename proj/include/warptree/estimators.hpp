#pragma once

// Fitting procedures: uniform-level warped expansion, vertical (tree)
// thresholding, least squares on adaptive dyadic partitions, greedy tree
// growth, and the linear / hard-threshold baselines.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "warptree/coefficients.hpp"
#include "warptree/design.hpp"
#include "warptree/dyadic.hpp"
#include "warptree/wavelet.hpp"

namespace warptree {

enum class Rule { uniform, vertical, piecewise, piecewise_uniform, linear, hard };

std::string to_string(Rule rule);
/// Throws Error{catalog}.
Rule parse_rule(const std::string& name);

struct FitConfig {
    double kappa = 1.0;
    double gamma = 1.0;
    double s_assumed = 1.0;
    WaveletFamily wavelet = WaveletFamily::haar();
    DesignCdf design = uniform_design();
    Rule rule = Rule::vertical;
    /// Number of detail levels kept by the linear baseline; defaults to jstar_uniform(n, s).
    std::optional<int> linear_levels;

    void validate() const;
};

struct EstimatorMeta {
    std::int64_t n = 0;
    double kappa = 0.0;
    double gamma = 0.0;
    double lambda_n = 0.0;
    int j_star = 0;
    Rule rule = Rule::vertical;
    std::string design;
    std::string wavelet;
};

struct WarpedEstimator {
    enum class Kind { wavelet_expansion, piecewise_constant };

    Kind kind = Kind::wavelet_expansion;
    /// Wavelet kind: d_{j,k}(z) over the retained nodes plus (-1,0).
    /// Piecewise kind: s_I(z) over the partition cells.
    CoefficientMap terms;
    /// Piecewise kind only: G_n(I) per cell.
    std::map<DyadicIndex, double> masses;
    Partition partition;
    /// Tree actually selected (for the hard rule, the smallest tree holding the kept set).
    DyadicTree tree;
    EstimatorMeta meta;
    DesignCdf design = uniform_design();
    WaveletFamily wavelet = WaveletFamily::haar();

    std::size_t retained() const noexcept { return terms.entries.size(); }
};

std::string to_string(WarpedEstimator::Kind kind);

/// Deepest level whose coefficients are ever materialized.
inline constexpr int kMaxComputedLevel = 20;

/// kappa * sqrt(ln n / n).
double threshold_lambda(std::int64_t n, double kappa);
/// Largest j >= 0 with 2^j <= lambda^{-1/gamma}; Error{invalid_argument} past kMaxComputedLevel.
int jstar_adaptive(double lambda, double gamma);
/// Smallest j with 2^{j(1+2s)} >= n / ln n.
int jstar_uniform(std::int64_t n, double s);
/// A kappa for which lambda_n lies in (2^-gamma, 1), so j_star = 0 and every
/// thresholded rule collapses to the scaling term.
double kappa_collapse_proxy(std::int64_t n, double gamma);

/// Smallest proper tree holding every node with residual >= lambda.
DyadicTree threshold_tree(const ResidualMap& residuals, double lambda);

WarpedEstimator fit_uniform(const Sample& z, const FitConfig& cfg);
WarpedEstimator fit_adaptive_vertical(const Sample& z, const FitConfig& cfg);
WarpedEstimator fit_adaptive_piecewise(const Sample& z, const FitConfig& cfg);
/// Empirical least squares on the uniform partition of jstar_uniform(n, s) levels.
WarpedEstimator fit_piecewise_uniform(const Sample& z, const FitConfig& cfg);
/// cfg.rule in {linear, hard}.
WarpedEstimator baseline_fit(const Sample& z, const FitConfig& cfg);
/// Dispatch on cfg.rule.
WarpedEstimator fit(const Sample& z, const FitConfig& cfg);

/// Grows T_1 = {(0,0)} by repeatedly adding the outer leaf with the largest
/// vertical residual (ties: smallest (j,k)) until it has `size` nodes.
DyadicTree grow_greedy_tree(const CoefficientMap& wavelet, std::size_t size, int j_star);

double predict(const WarpedEstimator& est, double x);
/// Wavelet kind: evaluates at warped coordinate u = G(x) directly.
double predict_warped(const WarpedEstimator& est, double u);
/// (1/n) sum (f_z(x_i) - y_i)^2.
double empirical_risk(const WarpedEstimator& est, const Sample& z);

nlohmann::json estimator_to_json(const WarpedEstimator& est);
WarpedEstimator estimator_from_json(const nlohmann::json& doc);

}  // namespace warptree
