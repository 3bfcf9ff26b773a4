#include "warptree/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "warptree/error.hpp"
#include "warptree/format.hpp"

namespace warptree {

namespace {

void require_nonempty(const Sample& z) {
    if (z.size() == 0) fail(ErrorCode::empty_sample, "sample is empty");
}

void require_tree_index(const DyadicIndex& ix) {
    require_valid(ix);
    if (ix.j < 0) fail(ErrorCode::invalid_argument, "scaling index has no cell: " + to_string(ix));
}

bool in_cell(double x, const DyadicIndex& ix) { return cell_of(x, ix.j) == ix.k; }

/// Breakpoints of f o G^{-1} in the warped coordinate.
std::vector<double> warped_breakpoints(const TestFunction& f, const DesignCdf& design) {
    std::vector<double> out;
    for (double x : f.breakpoints()) out.push_back(design.cdf(x));
    for (double x : design.kinks()) out.push_back(design.cdf(x));
    return out;
}

}  // namespace

std::string to_string(CoefficientKind kind) {
    switch (kind) {
        case CoefficientKind::scaling_empirical: return "scaling-empirical";
        case CoefficientKind::scaling_theoretical: return "scaling-theoretical";
        case CoefficientKind::wavelet_empirical: return "wavelet-empirical";
        case CoefficientKind::wavelet_theoretical: return "wavelet-theoretical";
    }
    return "unknown";
}

double CoefficientMap::at(const DyadicIndex& ix) const {
    auto it = entries.find(ix);
    if (it == entries.end()) fail(ErrorCode::missing_coefficient, "missing coefficient " + to_string(ix));
    return it->second;
}

double ResidualMap::at(const DyadicIndex& ix) const {
    auto it = entries.find(ix);
    if (it == entries.end()) fail(ErrorCode::missing_coefficient, "missing residual " + to_string(ix));
    return it->second;
}

std::vector<double> warped_coordinates(const Sample& z, const DesignCdf& design) {
    std::vector<double> u(z.size());
    std::transform(z.x.begin(), z.x.end(), u.begin(), [&](double x) { return design.cdf(x); });
    return u;
}

double empirical_measure(const Sample& z, const DyadicIndex& ix) {
    require_nonempty(z);
    require_tree_index(ix);
    std::size_t count = 0;
    for (double x : z.x) count += in_cell(x, ix);
    return static_cast<double>(count) / static_cast<double>(z.size());
}

double empirical_scaling_coeff(const Sample& z, const DyadicIndex& ix) {
    const double mass = empirical_measure(z, ix);
    if (mass == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (in_cell(z.x[i], ix)) acc += z.y[i];
    return acc / static_cast<double>(z.size()) / std::sqrt(mass);
}

double theoretical_scaling_coeff(const TestFunction& f, const DesignCdf& design, const DyadicIndex& ix,
                                 const QuadratureOptions& quad) {
    require_tree_index(ix);
    const auto cell = interval(ix);
    const double lo = design.cdf(cell.left()), hi = design.cdf(cell.right());
    const double mass = hi - lo;
    if (mass <= 0.0) return 0.0;
    const double integral =
        integrate([&](double u) { return f(design.inverse(u)); }, lo, hi, warped_breakpoints(f, design), quad);
    return integral / std::sqrt(mass);
}

double piecewise_residual(const CoefficientMap& scaling, const DyadicIndex& ix) {
    require_tree_index(ix);
    auto [left, right] = children(ix);
    const double s = scaling.at(ix), a = scaling.at(left), b = scaling.at(right);
    return std::sqrt(std::max(0.0, a * a + b * b - s * s));
}

double empirical_wavelet_coeff(const Sample& z, const WaveletFamily& w, const DesignCdf& design, const DyadicIndex& ix) {
    require_nonempty(z);
    require_valid(ix);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double value = w.warped(ix, design, z.x[i]);
        if (value != 0.0) acc += z.y[i] * value;
    }
    return acc / static_cast<double>(z.size());
}

double theoretical_wavelet_coeff(const TestFunction& f, const WaveletFamily& w, const DesignCdf& design,
                                 const DyadicIndex& ix, const QuadratureOptions& quad) {
    require_valid(ix);
    auto breaks = warped_breakpoints(f, design);
    const auto own = w.breakpoints(ix);
    breaks.insert(breaks.end(), own.begin(), own.end());
    double lo = 0.0, hi = 1.0;
    if (w.kind() == WaveletFamily::Kind::haar && ix.j >= 0) {
        const auto cell = interval(ix);
        lo = cell.left();
        hi = cell.right();
    }
    return integrate([&](double u) { return f(design.inverse(u)) * w.psi(ix, u); }, lo, hi, std::move(breaks), quad);
}

double vertical_residual(const CoefficientMap& wavelet, const DyadicIndex& ix, int j_star) {
    require_tree_index(ix);
    if (ix.j >= j_star) fail(ErrorCode::invalid_argument, "node " + to_string(ix) + " not below truncation level");
    // nu^2 = d^2 + nu_left^2 + nu_right^2
    auto energy = [&](auto&& self, const DyadicIndex& node) -> double {
        const double d = wavelet.at(node);
        if (node.j + 1 >= j_star) return d * d;
        auto [left, right] = children(node);
        return d * d + self(self, left) + self(self, right);
    };
    return std::sqrt(energy(energy, ix));
}

std::map<DyadicIndex, double> empirical_measures(const Sample& z, int max_level) {
    require_nonempty(z);
    std::map<DyadicIndex, std::size_t> counts;
    for (int j = 0; j <= max_level; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) counts[{j, k}] = 0;
    for (double x : z.x)
        for (int j = 0; j <= max_level; ++j) ++counts[{j, cell_of(x, j)}];
    std::map<DyadicIndex, double> out;
    for (const auto& [ix, count] : counts) out[ix] = static_cast<double>(count) / static_cast<double>(z.size());
    return out;
}

CoefficientMap empirical_scaling_coeffs(const Sample& z, int max_level) {
    require_nonempty(z);
    const auto masses = empirical_measures(z, max_level);
    std::map<DyadicIndex, double> sums;
    for (const auto& [ix, mass] : masses) sums[ix] = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (int j = 0; j <= max_level; ++j) sums[{j, cell_of(z.x[i], j)}] += z.y[i];
    CoefficientMap out{{}, CoefficientKind::scaling_empirical, max_level};
    const double n = static_cast<double>(z.size());
    for (const auto& [ix, sum] : sums) {
        const double mass = masses.at(ix);
        out.entries[ix] = mass == 0.0 ? 0.0 : sum / n / std::sqrt(mass);
    }
    return out;
}

CoefficientMap theoretical_scaling_coeffs(const TestFunction& f, const DesignCdf& design, int max_level,
                                          const QuadratureOptions& quad) {
    CoefficientMap out{{}, CoefficientKind::scaling_theoretical, max_level};
    for (int j = 0; j <= max_level; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
            out.entries[{j, k}] = theoretical_scaling_coeff(f, design, {j, k}, quad);
    return out;
}

CoefficientMap empirical_wavelet_coeffs(const std::vector<double>& warped, const std::vector<double>& y,
                                        const WaveletFamily& w, int j_star) {
    if (warped.empty()) fail(ErrorCode::empty_sample, "sample is empty");
    if (j_star < 0 || j_star > 30) fail(ErrorCode::invalid_argument, "truncation level out of range");
    std::vector<std::vector<double>> sums(j_star);
    for (int j = 0; j < j_star; ++j) sums[j].assign(std::size_t{1} << j, 0.0);
    double scaling_sum = 0.0;
    std::vector<std::int64_t> positions;
    for (std::size_t i = 0; i < warped.size(); ++i) {
        const double u = warped[i];
        const double scaling_value = w.psi(kScalingIndex, u);
        if (scaling_value != 0.0) scaling_sum += y[i] * scaling_value;
        for (int j = 0; j < j_star; ++j) {
            w.active_positions(j, u, positions);
            for (auto k : positions) {
                const double value = w.psi({j, k}, u);
                if (value != 0.0) sums[j][k] += y[i] * value;
            }
        }
    }
    const double n = static_cast<double>(warped.size());
    CoefficientMap out{{}, CoefficientKind::wavelet_empirical, j_star - 1};
    out.entries[kScalingIndex] = scaling_sum / n;
    for (int j = 0; j < j_star; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) out.entries[{j, k}] = sums[j][k] / n;
    return out;
}

CoefficientMap empirical_wavelet_coeffs(const Sample& z, const WaveletFamily& w, const DesignCdf& design, int j_star) {
    require_nonempty(z);
    return empirical_wavelet_coeffs(warped_coordinates(z, design), z.y, w, j_star);
}

CoefficientMap theoretical_wavelet_coeffs(const TestFunction& f, const WaveletFamily& w, const DesignCdf& design,
                                          int j_star, const QuadratureOptions& quad) {
    CoefficientMap out{{}, CoefficientKind::wavelet_theoretical, j_star - 1};
    out.entries[kScalingIndex] = theoretical_wavelet_coeff(f, w, design, kScalingIndex, quad);
    for (int j = 0; j < j_star; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k)
            out.entries[{j, k}] = theoretical_wavelet_coeff(f, w, design, {j, k}, quad);
    return out;
}

ResidualMap vertical_residuals(const CoefficientMap& wavelet, int j_star) {
    ResidualMap out{{}, ResidualKind::vertical, j_star};
    std::map<DyadicIndex, double> energy;
    for (int j = j_star - 1; j >= 0; --j) {
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) {
            const DyadicIndex ix{j, k};
            const double d = wavelet.at(ix);
            double e = d * d;
            if (j + 1 < j_star) {
                auto [left, right] = children(ix);
                e = d * d + energy.at(left) + energy.at(right);
            }
            energy[ix] = e;
            out.entries[ix] = std::sqrt(e);
        }
    }
    return out;
}

ResidualMap piecewise_residuals(const CoefficientMap& scaling, int j_star) {
    ResidualMap out{{}, ResidualKind::piecewise, j_star};
    for (int j = 0; j < j_star; ++j)
        for (std::int64_t k = 0; k < (std::int64_t{1} << j); ++k) out.entries[{j, k}] = piecewise_residual(scaling, {j, k});
    return out;
}

void write_coefficients_csv(const CoefficientMap& coeffs, std::ostream& out) {
    out << "j,k,value,kind\n";
    for (const auto& [ix, value] : coeffs.entries)
        out << ix.j << ',' << ix.k << ',' << format_double(value) << ',' << to_string(coeffs.kind) << '\n';
}

}  // namespace warptree
