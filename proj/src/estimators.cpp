#include "warptree/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "warptree/error.hpp"

namespace warptree {

std::string to_string(Rule rule) {
    switch (rule) {
        case Rule::uniform: return "uniform";
        case Rule::vertical: return "vertical";
        case Rule::piecewise: return "piecewise";
        case Rule::piecewise_uniform: return "piecewise-uniform";
        case Rule::linear: return "linear";
        case Rule::hard: return "hard";
    }
    return "unknown";
}

Rule parse_rule(const std::string& name) {
    for (Rule rule : {Rule::uniform, Rule::vertical, Rule::piecewise, Rule::piecewise_uniform, Rule::linear, Rule::hard})
        if (to_string(rule) == name) return rule;
    fail(ErrorCode::catalog,
         "unknown rule '" + name + "'; valid: uniform, vertical, piecewise, piecewise-uniform, linear, hard");
}

std::string to_string(WarpedEstimator::Kind kind) {
    return kind == WarpedEstimator::Kind::wavelet_expansion ? "wavelet-expansion" : "piecewise-constant";
}

void FitConfig::validate() const {
    if (!(kappa > 0.0)) fail(ErrorCode::invalid_argument, "kappa must be > 0");
    if (!(gamma > 0.0)) fail(ErrorCode::invalid_argument, "gamma must be > 0");
    if ((rule == Rule::vertical || rule == Rule::hard) && gamma < 0.5)
        fail(ErrorCode::invalid_argument, "vertical thresholding requires gamma >= 1/2");
    if (!(s_assumed > 0.0)) fail(ErrorCode::invalid_argument, "assumed smoothness must be > 0");
    if (linear_levels && *linear_levels < 0) fail(ErrorCode::invalid_argument, "linear levels must be >= 0");
}

double threshold_lambda(std::int64_t n, double kappa) {
    if (n < 2) fail(ErrorCode::sample_too_small, "threshold needs n >= 2");
    if (!(kappa > 0.0)) fail(ErrorCode::invalid_argument, "kappa must be > 0");
    const double nn = static_cast<double>(n);
    return kappa * std::sqrt(std::log(nn) / nn);
}

namespace {

int largest_level_below(double lambda, double gamma) {
    if (!(lambda > 0.0)) fail(ErrorCode::invalid_argument, "threshold must be > 0");
    if (lambda >= 1.0) fail(ErrorCode::sample_too_small, "threshold lambda_n >= 1; sample too small for kappa");
    const double bound = std::pow(lambda, -1.0 / gamma);
    int j = 0;
    while (j <= kMaxComputedLevel && std::ldexp(1.0, j + 1) <= bound) ++j;
    if (j > kMaxComputedLevel)
        fail(ErrorCode::invalid_argument, "threshold too small: finest level would exceed " +
                                              std::to_string(kMaxComputedLevel) + "; raise kappa");
    return j;
}

}  // namespace

int jstar_adaptive(double lambda, double gamma) {
    if (!(gamma >= 0.5)) fail(ErrorCode::invalid_argument, "gamma must be >= 1/2");
    return largest_level_below(lambda, gamma);
}

int jstar_uniform(std::int64_t n, double s) {
    if (n < 3) fail(ErrorCode::sample_too_small, "uniform level needs n >= 3");
    if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "smoothness must be > 0");
    const double nn = static_cast<double>(n);
    const double target = nn / std::log(nn);
    int j = 0;
    while (j < 30 && std::pow(2.0, j * (1.0 + 2.0 * s)) < target) ++j;
    return j;
}

double kappa_collapse_proxy(std::int64_t n, double gamma) {
    const double target = 0.5 * (1.0 + std::pow(2.0, -gamma));
    return target / threshold_lambda(n, 1.0);
}

DyadicTree threshold_tree(const ResidualMap& residuals, double lambda) {
    IndexSet selected;
    for (const auto& [ix, nu] : residuals.entries)
        if (nu >= lambda) selected.insert(ix);
    return complete_to_tree(selected);
}

namespace {

EstimatorMeta make_meta(const Sample& z, const FitConfig& cfg, double lambda, int j_star) {
    return {static_cast<std::int64_t>(z.size()), cfg.kappa, cfg.gamma, lambda, j_star, cfg.rule,
            cfg.design.name(), cfg.wavelet.name()};
}

WarpedEstimator wavelet_estimator(const FitConfig& cfg, EstimatorMeta meta, const CoefficientMap& all,
                                  const IndexSet& kept, DyadicTree tree) {
    WarpedEstimator est;
    est.kind = WarpedEstimator::Kind::wavelet_expansion;
    est.terms.kind = CoefficientKind::wavelet_empirical;
    est.terms.entries[kScalingIndex] = all.at(kScalingIndex);
    int max_level = -1;
    for (const auto& ix : kept) {
        est.terms.entries[ix] = all.at(ix);
        max_level = std::max(max_level, ix.j);
    }
    est.terms.max_level = max_level;
    est.tree = std::move(tree);
    est.partition = outer_leaves(est.tree);
    est.meta = std::move(meta);
    est.design = cfg.design;
    est.wavelet = cfg.wavelet;
    return est;
}

WarpedEstimator piecewise_estimator(const Sample& z, const FitConfig& cfg, EstimatorMeta meta, DyadicTree tree) {
    WarpedEstimator est;
    est.kind = WarpedEstimator::Kind::piecewise_constant;
    est.partition = outer_leaves(tree);
    est.terms.kind = CoefficientKind::scaling_empirical;
    const int finest = std::max(tree.depth() + 1, 0);
    const auto scaling = empirical_scaling_coeffs(z, finest);
    const auto masses = empirical_measures(z, finest);
    for (const auto& cell : est.partition.leaves()) {
        est.terms.entries[cell] = scaling.at(cell);
        est.masses[cell] = masses.at(cell);
        est.terms.max_level = std::max(est.terms.max_level, cell.j);
    }
    est.tree = std::move(tree);
    est.meta = std::move(meta);
    est.design = cfg.design;
    est.wavelet = cfg.wavelet;
    return est;
}

void require_sample(const Sample& z) {
    if (z.size() == 0) fail(ErrorCode::empty_sample, "sample is empty");
}

}  // namespace

WarpedEstimator fit_uniform(const Sample& z, const FitConfig& cfg) {
    cfg.validate();
    require_sample(z);
    const auto n = static_cast<std::int64_t>(z.size());
    const int levels = jstar_uniform(n, cfg.s_assumed);
    const auto coeffs = empirical_wavelet_coeffs(z, cfg.wavelet, cfg.design, levels);
    auto tree = uniform_tree(levels);
    auto meta = make_meta(z, cfg, threshold_lambda(n, cfg.kappa), levels);
    return wavelet_estimator(cfg, std::move(meta), coeffs, tree.nodes(), tree);
}

WarpedEstimator fit_adaptive_vertical(const Sample& z, const FitConfig& cfg) {
    cfg.validate();
    require_sample(z);
    const auto n = static_cast<std::int64_t>(z.size());
    const double lambda = threshold_lambda(n, cfg.kappa);
    const int j_star = jstar_adaptive(lambda, cfg.gamma);
    const auto coeffs = empirical_wavelet_coeffs(z, cfg.wavelet, cfg.design, j_star);
    auto tree = threshold_tree(vertical_residuals(coeffs, j_star), lambda);
    return wavelet_estimator(cfg, make_meta(z, cfg, lambda, j_star), coeffs, tree.nodes(), tree);
}

WarpedEstimator fit_adaptive_piecewise(const Sample& z, const FitConfig& cfg) {
    cfg.validate();
    require_sample(z);
    const auto n = static_cast<std::int64_t>(z.size());
    const double lambda = threshold_lambda(n, cfg.kappa);
    const int j_star = largest_level_below(lambda, cfg.gamma);
    const auto scaling = empirical_scaling_coeffs(z, j_star);
    auto tree = threshold_tree(piecewise_residuals(scaling, j_star), lambda);
    return piecewise_estimator(z, cfg, make_meta(z, cfg, lambda, j_star), std::move(tree));
}

WarpedEstimator fit_piecewise_uniform(const Sample& z, const FitConfig& cfg) {
    cfg.validate();
    require_sample(z);
    const auto n = static_cast<std::int64_t>(z.size());
    const int levels = jstar_uniform(n, cfg.s_assumed);
    return piecewise_estimator(z, cfg, make_meta(z, cfg, threshold_lambda(n, cfg.kappa), levels), uniform_tree(levels));
}

WarpedEstimator baseline_fit(const Sample& z, const FitConfig& cfg) {
    cfg.validate();
    require_sample(z);
    const auto n = static_cast<std::int64_t>(z.size());
    const double lambda = threshold_lambda(n, cfg.kappa);
    if (cfg.rule == Rule::linear) {
        const int levels = cfg.linear_levels.value_or(jstar_uniform(n, cfg.s_assumed));
        const auto coeffs = empirical_wavelet_coeffs(z, cfg.wavelet, cfg.design, levels);
        auto tree = uniform_tree(levels);
        return wavelet_estimator(cfg, make_meta(z, cfg, lambda, levels), coeffs, tree.nodes(), tree);
    }
    if (cfg.rule != Rule::hard) fail(ErrorCode::invalid_argument, "baseline_fit needs rule linear or hard");
    const int j_star = jstar_adaptive(lambda, cfg.gamma);
    const auto coeffs = empirical_wavelet_coeffs(z, cfg.wavelet, cfg.design, j_star);
    IndexSet kept;
    for (const auto& [ix, d] : coeffs.entries)
        if (ix.j >= 0 && std::abs(d) >= lambda) kept.insert(ix);
    return wavelet_estimator(cfg, make_meta(z, cfg, lambda, j_star), coeffs, kept, complete_to_tree(kept));
}

WarpedEstimator fit(const Sample& z, const FitConfig& cfg) {
    switch (cfg.rule) {
        case Rule::uniform: return fit_uniform(z, cfg);
        case Rule::vertical: return fit_adaptive_vertical(z, cfg);
        case Rule::piecewise: return fit_adaptive_piecewise(z, cfg);
        case Rule::piecewise_uniform: return fit_piecewise_uniform(z, cfg);
        case Rule::linear:
        case Rule::hard: return baseline_fit(z, cfg);
    }
    fail(ErrorCode::invalid_argument, "unknown rule");
}

DyadicTree grow_greedy_tree(const CoefficientMap& wavelet, std::size_t size, int j_star) {
    if (size < 1) fail(ErrorCode::invalid_argument, "tree size must be >= 1");
    if (j_star < 1) fail(ErrorCode::invalid_argument, "greedy growth needs j_star >= 1");
    const std::size_t available = (std::size_t{1} << j_star) - 1;
    if (size > available)
        fail(ErrorCode::invalid_argument, "requested " + std::to_string(size) + " nodes but only " +
                                              std::to_string(available) + " exist below level " + std::to_string(j_star));
    const auto residuals = vertical_residuals(wavelet, j_star);
    IndexSet nodes{kRootIndex};
    IndexSet leaves;
    auto add_children = [&](const DyadicIndex& ix) {
        if (ix.j + 1 >= j_star) return;
        auto [left, right] = children(ix);
        leaves.insert(left);
        leaves.insert(right);
    };
    add_children(kRootIndex);
    while (nodes.size() < size) {
        auto best = leaves.begin();
        for (auto it = leaves.begin(); it != leaves.end(); ++it)
            if (residuals.at(*it) > residuals.at(*best)) best = it;
        const DyadicIndex chosen = *best;
        leaves.erase(best);
        nodes.insert(chosen);
        add_children(chosen);
    }
    return DyadicTree(std::move(nodes));
}

double predict_warped(const WarpedEstimator& est, double u) {
    if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::domain, "prediction point outside [0,1]");
    if (est.kind == WarpedEstimator::Kind::piecewise_constant) return predict(est, est.design.inverse(u));
    double acc = 0.0;
    if (est.wavelet.kind() == WaveletFamily::Kind::haar) {
        for (int j = -1; j <= est.terms.max_level; ++j) {
            const DyadicIndex ix{j, j < 0 ? 0 : cell_of(u, j)};
            auto it = est.terms.entries.find(ix);
            if (it != est.terms.entries.end()) acc += it->second * est.wavelet.psi(ix, u);
        }
        return acc;
    }
    for (const auto& [ix, d] : est.terms.entries) acc += d * est.wavelet.psi(ix, u);
    return acc;
}

double predict(const WarpedEstimator& est, double x) {
    if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::domain, "prediction point outside [0,1]");
    if (est.kind == WarpedEstimator::Kind::wavelet_expansion) return predict_warped(est, est.design.cdf(x));
    const auto& cell = est.partition.leaf_containing(x);
    const double mass = est.masses.at(cell);
    return mass > 0.0 ? est.terms.at(cell) / std::sqrt(mass) : 0.0;
}

double empirical_risk(const WarpedEstimator& est, const Sample& z) {
    require_sample(z);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double r = predict(est, z.x[i]) - z.y[i];
        acc += r * r;
    }
    return acc / static_cast<double>(z.size());
}

nlohmann::json estimator_to_json(const WarpedEstimator& est) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [ix, value] : est.terms.entries) {
        nlohmann::json term{{"j", ix.j}, {"k", ix.k}, {"value", value}};
        if (est.kind == WarpedEstimator::Kind::piecewise_constant) term["mass"] = est.masses.at(ix);
        terms.push_back(std::move(term));
    }
    const auto& m = est.meta;
    return {{"kind", to_string(est.kind)},
            {"meta",
             {{"n", m.n},
              {"kappa", m.kappa},
              {"gamma", m.gamma},
              {"lambda_n", m.lambda_n},
              {"j_star", m.j_star},
              {"rule", to_string(m.rule)},
              {"design", m.design},
              {"wavelet", m.wavelet}}},
            {"terms", std::move(terms)},
            {"tree", tree_to_json(est.tree)}};
}

WarpedEstimator estimator_from_json(const nlohmann::json& doc) {
    try {
        WarpedEstimator est;
        const auto kind = doc.at("kind").get<std::string>();
        if (kind == "wavelet-expansion") est.kind = WarpedEstimator::Kind::wavelet_expansion;
        else if (kind == "piecewise-constant") est.kind = WarpedEstimator::Kind::piecewise_constant;
        else fail(ErrorCode::parse, "unknown estimator kind '" + kind + "'");

        const auto& m = doc.at("meta");
        est.meta = {m.at("n").get<std::int64_t>(), m.at("kappa").get<double>(),      m.at("gamma").get<double>(),
                    m.at("lambda_n").get<double>(), m.at("j_star").get<int>(),       parse_rule(m.at("rule").get<std::string>()),
                    m.at("design").get<std::string>(), m.at("wavelet").get<std::string>()};
        est.design = make_design(est.meta.design);
        est.wavelet = make_wavelet(est.meta.wavelet);
        est.terms.kind = est.kind == WarpedEstimator::Kind::wavelet_expansion ? CoefficientKind::wavelet_empirical
                                                                             : CoefficientKind::scaling_empirical;
        std::vector<DyadicIndex> cells;
        for (const auto& term : doc.at("terms")) {
            const DyadicIndex ix{term.at("j").get<int>(), term.at("k").get<std::int64_t>()};
            require_valid(ix);
            est.terms.entries[ix] = term.at("value").get<double>();
            est.terms.max_level = std::max(est.terms.max_level, ix.j);
            if (est.kind == WarpedEstimator::Kind::piecewise_constant) {
                est.masses[ix] = term.at("mass").get<double>();
                cells.push_back(ix);
            }
        }
        est.tree = tree_from_json(doc.at("tree"));
        est.partition = est.kind == WarpedEstimator::Kind::piecewise_constant ? Partition(std::move(cells))
                                                                              : outer_leaves(est.tree);
        if (est.kind == WarpedEstimator::Kind::piecewise_constant && !est.partition.tiles_unit_interval())
            fail(ErrorCode::parse, "piecewise estimator cells do not tile [0,1]");
        return est;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("estimator JSON: ") + e.what());
    }
}

}  // namespace warptree
