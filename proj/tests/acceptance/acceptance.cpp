// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "warptree/coefficients.hpp"
#include "warptree/estimators.hpp"
#include "warptree/format.hpp"
#include "warptree/parallel.hpp"
#include "warptree/quadrature.hpp"
#include "warptree/risk.hpp"

using namespace warptree;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << detail << std::endl;
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void run_criterion(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, title, ok, detail);
    } catch (const std::exception& e) {
        report(id, title, false, std::string("exception: ") + e.what());
    }
}

std::vector<DyadicIndex> haar_basis(int max_level) {
    std::vector<DyadicIndex> basis{kScalingIndex};
    for (int j = 0; j <= max_level; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) basis.push_back({j, k});
    return basis;
}

std::pair<bool, std::string> orthonormality() {
    const auto start = Clock::now();
    const auto haar = WaveletFamily::haar();
    const int max_level = 5;
    const auto basis = haar_basis(max_level);
    double worst = 0.0;
    for (const auto& name : design_names()) {
        const auto d = make_design(name);
        // x-space breakpoints: preimages of the finest dyadic grid plus density kinks
        std::vector<double> breaks = d.kinks();
        const int cells = 1 << (max_level + 1);
        for (int m = 1; m < cells; ++m) breaks.push_back(d.inverse(static_cast<double>(m) / cells));
        for (std::size_t a = 0; a < basis.size(); ++a) {
            for (std::size_t b = a; b < basis.size(); ++b) {
                const double g = integrate(
                    [&](double x) { return haar.warped(basis[a], d, x) * haar.warped(basis[b], d, x) * d.density(x); },
                    0.0, 1.0, breaks, {16, 1e-13});
                worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-8 && elapsed < 10.0,
            "max |Gram - I| = " + fmt(worst) + " over " + std::to_string(basis.size()) + " functions x 5 designs, " +
                fmt(elapsed, 3) + " s"};
}

std::pair<bool, std::string> cardinality() {
    std::mt19937_64 rng(2024);
    int bad = 0;
    std::size_t largest = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        // random growth by outer leaves, levels 0..9
        IndexSet nodes;
        const std::size_t target = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
        while (nodes.size() < target) {
            std::vector<DyadicIndex> frontier;
            const auto current = outer_leaves(DyadicTree(nodes));
            for (const auto& leaf : current.leaves())
                if (leaf.j <= 9) frontier.push_back(leaf);
            if (frontier.empty()) break;
            nodes.insert(frontier[std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng)]);
        }
        const DyadicTree tree(nodes);
        const auto partition = outer_leaves(tree);
        if (tree.depth() > 9 || partition.size() != tree.size() + 1 || !partition.tiles_unit_interval()) ++bad;
        largest = std::max(largest, tree.size());
    }
    return {bad == 0, std::to_string(bad) + " violations in 1000 trees (largest " + std::to_string(largest) + " nodes)"};
}

Sample two_point() {
    Sample z;
    z.x = {0.25, 0.75};
    z.y = {2.0, 4.0};
    z.meta.n = 2;
    z.meta.design = "uniform";
    return z;
}

std::pair<bool, std::string> hand_values() {
    const auto z = two_point();
    const auto haar = WaveletFamily::haar();
    const double s_left = empirical_scaling_coeff(z, {1, 0});
    const double nu_root = piecewise_residual(empirical_scaling_coeffs(z, 1), {0, 0});
    const double d00 = empirical_wavelet_coeff(z, haar, uniform_design(), {0, 0});
    const double nu00 = vertical_residual(empirical_wavelet_coeffs(z, haar, uniform_design(), 2), {0, 0}, 2);
    auto round5 = [](double v) { return std::round(v * 1e5) / 1e5; };
    const bool ok = round5(s_left) == round5(1.41421) && round5(nu_root) == 1.0 && round5(d00) == -1.0 &&
                    round5(nu00) == round5(3.31662) && std::abs(nu00 - std::sqrt(11.0)) < 1e-12;
    return {ok, "s=" + fmt(s_left) + " nu_root=" + fmt(nu_root) + " d00=" + fmt(d00) + " nu00=" + fmt(nu00)};
}

/// Threshold inside [lo, hi] that is farthest (in log ratio) from every value.
double threshold_in_gap(std::vector<double> values, double lo, double hi) {
    values.push_back(lo);
    values.push_back(hi);
    std::sort(values.begin(), values.end());
    double best = std::sqrt(lo * hi), best_margin = -1.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double a = std::max(values[i - 1], lo), b = std::min(values[i], hi);
        if (!(a > 0.0) || b <= a) continue;
        const double margin = std::log(b / a);
        if (margin > best_margin) {
            best_margin = margin;
            best = std::sqrt(a * b);
        }
    }
    return best;
}

std::pair<bool, std::string> oracle_equivalence() {
    const auto start = Clock::now();
    const std::int64_t n = 1 << 16;
    const auto haar = WaveletFamily::haar();
    const double unit_lambda = threshold_lambda(n, 1.0);
    const int j_star = jstar_adaptive(unit_lambda, 1.0);
    // lambda range that keeps the same j_star
    const double lo = std::ldexp(1.0, -(j_star + 1)) * 1.0001, hi = std::ldexp(1.0, -j_star);
    int mismatches = 0;
    double tightest = std::numeric_limits<double>::infinity();
    std::ostringstream bad;
    for (const auto& dname : design_names()) {
        const auto d = make_design(dname);
        for (const char* fname : {"sinusoid", "step", "warped_sinusoid"}) {
            const auto f = make_function(fname, d);
            const auto theory = vertical_residuals(theoretical_wavelet_coeffs(f, haar, d, j_star), j_star);
            std::vector<double> values;
            for (const auto& [ix, nu] : theory.entries) values.push_back(nu);
            const double lambda = threshold_in_gap(values, lo, hi);
            for (double v : values) tightest = std::min(tightest, std::abs(std::log(v / lambda)));

            FitConfig cfg;
            cfg.design = d;
            cfg.rule = Rule::vertical;
            cfg.kappa = lambda / unit_lambda;
            const auto est = fit(stratified_sample(d, f, n), cfg);
            const auto oracle = threshold_tree(theory, lambda);
            if (est.meta.j_star != j_star || !(est.tree == oracle)) {
                ++mismatches;
                bad << ' ' << dname << '/' << fname << '(' << est.tree.size() << " vs " << oracle.size() << ')';
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {mismatches == 0 && elapsed < 120.0,
            std::to_string(15 - mismatches) + "/15 trees equal, j_star=" + std::to_string(j_star) +
                ", min log-gap " + fmt(tightest, 3) + ", " + fmt(elapsed, 3) + " s" + bad.str()};
}

std::pair<bool, std::string> rate_check() {
    const auto start = Clock::now();
    ExperimentConfig cfg;
    cfg.design = uniform_design();
    cfg.function = sinusoid_function();
    cfg.sigma = 0.1;
    cfg.fit.rule = Rule::vertical;
    cfg.n_reps = 20;
    cfg.base_seed = 1;
    cfg.cross_validate = true;
    std::vector<std::int64_t> grid;
    for (int e = 9; e <= 15; ++e) grid.push_back(std::int64_t{1} << e);
    const auto rates = rate_experiment(grid, cfg);
    const double elapsed = seconds_since(start);
    return {rates.within_band() && elapsed < 600.0,
            "slope " + fmt(rates.fitted_slope, 4) + " (theory " + fmt(rates.theoretical_exponent, 4) +
                ", band [0.45, 0.95]), " + fmt(elapsed, 3) + " s"};
}

std::pair<bool, std::string> adaptive_dominance() {
    ExperimentConfig cfg;
    cfg.function = step_function();
    cfg.sigma = 0.1;
    cfg.n = 1 << 12;
    cfg.n_reps = 20;
    cfg.base_seed = 7;
    cfg.fit.s_assumed = 1.0;
    cfg.fit.rule = Rule::vertical;
    const auto vertical = mc_risk(cfg);
    cfg.fit.rule = Rule::uniform;
    const auto uniform = mc_risk(cfg);
    const double se = std::hypot(vertical.std_error, uniform.std_error);
    const double gap = uniform.mean_sq_error - vertical.mean_sq_error;
    return {gap > se && vertical.n_failed == 0 && uniform.n_failed == 0,
            "vertical " + fmt(vertical.mean_sq_error) + " vs uniform " + fmt(uniform.mean_sq_error) + ", gap " +
                fmt(gap) + " > combined SE " + fmt(se)};
}

std::pair<bool, std::string> containment() {
    std::mt19937_64 rng(99);
    const auto designs = design_names();
    const auto functions = function_names();
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = make_design(designs[trial % designs.size()]);
        const auto f = make_function(functions[(trial / designs.size()) % functions.size()], d);
        const std::int64_t n = std::uniform_int_distribution<std::int64_t>(64, 4096)(rng);
        const double sigma = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
        FitConfig cfg;
        cfg.design = d;
        cfg.kappa = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
        const auto z = generate_sample(d, f, sigma, 0.0, n, 1000 + trial);
        cfg.rule = Rule::hard;
        const auto hard = fit(z, cfg);
        cfg.rule = Rule::vertical;
        const auto vertical = fit(z, cfg);
        for (const auto& [ix, value] : hard.terms.entries)
            if (!vertical.terms.contains(ix)) {
                ++violations;
                break;
            }
    }
    return {violations == 0, std::to_string(violations) + " of 200 samples violate containment"};
}

std::pair<bool, std::string> bias_variance() {
    double worst = 0.0;
    for (const auto& dname : design_names()) {
        const auto d = make_design(dname);
        for (const char* fname : {"sinusoid", "step", "warped_sinusoid"}) {
            const auto f = make_function(fname, d);
            FitConfig cfg;
            cfg.design = d;
            cfg.rule = Rule::uniform;
            for (std::int64_t n : {256, 1024}) {
                const auto split = bias_variance_split(f, fit(stratified_sample(d, f, n), cfg));
                worst = std::max(worst, std::abs(split.direct - (split.bias + split.variance)));
            }
        }
    }

    // Noisy replicates: mean direct risk against mean e1 + e2.
    const auto d = power_design(2);
    const auto f = sinusoid_function();
    FitConfig cfg;
    cfg.design = d;
    cfg.rule = Rule::uniform;
    const int reps = 1000;
    std::vector<double> direct(reps), sum(reps);
    parallel_for(reps, [&](std::size_t r) {
        const auto est = fit(generate_sample(d, f, 0.3, 0.0, 1024, replicate_seed(31, r)), cfg);
        const auto split = bias_variance_split(f, est);
        direct[r] = split.direct;
        sum[r] = split.bias + split.variance;
    });
    double mean_direct = 0.0, mean_sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        mean_direct += direct[r] / reps;
        mean_sum += sum[r] / reps;
    }
    double var = 0.0;
    for (double v : direct) var += (v - mean_direct) * (v - mean_direct);
    const double se = std::sqrt(var / (reps - 1) / reps);
    const double noisy_gap = std::abs(mean_direct - mean_sum);
    return {worst <= 1e-8 && noisy_gap <= 2.0 * se,
            "noiseless max |direct - (e1+e2)| = " + fmt(worst) + "; noisy mean " + fmt(mean_direct) + " vs " +
                fmt(mean_sum) + " (2 SE = " + fmt(2.0 * se) + ")"};
}

double energy(const IndexSet& nodes, const CoefficientMap& coeffs) {
    double e = 0.0;
    for (const auto& ix : nodes) e += coeffs.at(ix) * coeffs.at(ix);
    return e;
}

/// Every proper subtree rooted at `root` within levels < depth.
std::vector<IndexSet> enumerate_subtrees(const DyadicIndex& root, int depth) {
    if (root.j >= depth) return {};
    const auto [left, right] = children(root);
    auto lefts = enumerate_subtrees(left, depth), rights = enumerate_subtrees(right, depth);
    lefts.insert(lefts.begin(), IndexSet{});
    rights.insert(rights.begin(), IndexSet{});
    std::vector<IndexSet> out;
    for (const auto& l : lefts)
        for (const auto& r : rights) {
            IndexSet s{root};
            s.insert(l.begin(), l.end());
            s.insert(r.begin(), r.end());
            out.push_back(std::move(s));
        }
    return out;
}

std::pair<bool, std::string> greedy_oracle() {
    const int depth = 4;
    const auto trees = enumerate_subtrees({0, 0}, depth);
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> gauss;
    double worst = 1.0, mean_ratio = 0.0;
    int count = 0, below = 0, maps_below = 0;
    for (int map = 0; map < 50; ++map) {
        bool map_below = false;
        CoefficientMap coeffs{{}, CoefficientKind::wavelet_empirical, depth - 1};
        for (int j = 0; j < depth; ++j)
            for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
                coeffs.entries[{j, k}] = gauss(rng) * std::ldexp(1.0, -j);
        std::vector<double> best(16, 0.0);
        for (const auto& t : trees) best[t.size()] = std::max(best[t.size()], energy(t, coeffs));
        for (std::size_t size = 1; size < best.size(); ++size) {
            const double greedy = energy(grow_greedy_tree(coeffs, size, depth).nodes(), coeffs);
            const double ratio = best[size] > 0.0 ? greedy / best[size] : 1.0;
            worst = std::min(worst, ratio);
            mean_ratio += ratio;
            ++count;
            below += ratio < 0.9;
            map_below = map_below || ratio < 0.9;
        }
        maps_below += map_below;
    }
    return {below == 0, std::to_string(trees.size()) + " trees enumerated; greedy/optimum min " + fmt(worst, 4) +
                            ", mean " + fmt(mean_ratio / count, 4) + ", " + std::to_string(below) + "/" +
                            std::to_string(count) + " (map, size) pairs below 0.9 in " + std::to_string(maps_below) +
                            "/50 maps"};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Runs inside `base` so printed paths are relative; returns the exit status,
/// stdout and every file written under OUT, in name order.
std::string run_and_capture(const std::string& args, const fs::path& base, const std::string& out,
                            const std::string& env) {
    const auto log = base / (out + ".stdout");
    const std::string cmd = "cd \"" + base.string() + "\" && " + env + " \"" WARPTREE_CLI_PATH "\" " + args +
                            " --out " + out + " >\"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::string blob = "status=" + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + "\n" + slurp(log);
    std::vector<fs::path> files;
    if (fs::exists(base / out))
        for (const auto& entry : fs::directory_iterator(base / out)) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) blob += "== " + file.filename().string() + "\n" + slurp(file);
    return blob;
}

std::pair<bool, std::string> determinism() {
    const auto root = fs::temp_directory_path() / ("warptree_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "simulate --design power3 --function step --sigma 0.2 --n 2000 --seed 17"},
        {"fit", "fit --rule vertical --kappa 0.6"},
        {"fit_piecewise", "fit --rule piecewise --kappa 0.6"},
        {"compare", "compare --kappa 0.6"},
        {"cv", "cv --kappa-grid 0.25,0.5,1,2"},
        {"rates", "rates --design power3 --function step --rule vertical,hard --grid 2^6..2^9 --reps 6 --seed 3 --cv"},
    };
    int differing = 0;
    std::string bad;
    for (const char* env : {"", "WARPTREE_THREADS=1", "WARPTREE_THREADS=8"}) {
        for (int pass = 0; pass < 2; ++pass) {
            const std::string tag = std::string(*env ? env + 17 : "default") + "_" + std::to_string(pass);
            const auto base = root / tag;
            fs::create_directories(base);
            for (const auto& [name, args] : commands) {
                const auto blob = run_and_capture(name == "simulate" ? args : args + " --sample simulate/sample.csv",
                                                  base, name, env);
                const auto reference_path = root / ("reference_" + name);
                if (!fs::exists(reference_path)) {
                    std::ofstream(reference_path, std::ios::binary) << blob;
                    if (blob.rfind("status=0\n", 0) != 0) {
                        ++differing;
                        bad += " " + name + " failed";
                    }
                } else if (slurp(reference_path) != blob) {
                    ++differing;
                    bad += " " + name + "@" + tag;
                }
            }
        }
    }
    fs::remove_all(root);
    return {differing == 0, std::to_string(commands.size()) + " commands x 2 runs x {unset, 1, 8} threads, " +
                                std::to_string(differing) + " differences" + bad};
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

    if (wanted(1)) run_criterion(1, "warped orthonormality", orthonormality);
    if (wanted(2)) run_criterion(2, "partition cardinality", cardinality);
    if (wanted(3)) run_criterion(3, "hand-value fixtures", hand_values);
    if (wanted(4)) run_criterion(4, "oracle tree equivalence", oracle_equivalence);
    if (wanted(5)) run_criterion(5, "rate exponent", rate_check);
    if (wanted(6)) run_criterion(6, "adaptive dominance", adaptive_dominance);
    if (wanted(7)) run_criterion(7, "hard within vertical", containment);
    if (wanted(8)) run_criterion(8, "bias/variance split", bias_variance);
    if (wanted(9)) run_criterion(9, "greedy vs exhaustive", greedy_oracle);
    if (wanted(10)) run_criterion(10, "CLI determinism", determinism);
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
