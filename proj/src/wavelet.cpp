#include "warptree/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "warptree/error.hpp"

namespace warptree {

namespace {

using Complex = std::complex<double>;

// Durand-Kerner on a real polynomial given by ascending coefficients.
std::vector<Complex> polynomial_roots(const std::vector<double>& coeffs) {
    const int degree = static_cast<int>(coeffs.size()) - 1;
    std::vector<Complex> roots(degree);
    if (degree <= 0) return roots;
    const double lead = coeffs.back();
    const Complex seed(0.4, 0.9);
    for (int i = 0; i < degree; ++i) roots[i] = std::pow(seed, i);
    auto eval = [&](Complex z) {
        Complex acc = 0.0;
        for (int i = degree; i >= 0; --i) acc = acc * z + coeffs[i] / lead;
        return acc;
    };
    for (int iter = 0; iter < 2000; ++iter) {
        double change = 0.0;
        for (int i = 0; i < degree; ++i) {
            Complex denom = 1.0;
            for (int m = 0; m < degree; ++m)
                if (m != i) denom *= roots[i] - roots[m];
            const Complex step = eval(roots[i]) / denom;
            roots[i] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-15) break;
    }
    return roots;
}

double binomial(int n, int k) {
    double out = 1.0;
    for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
    return out;
}

}  // namespace

std::vector<double> daubechies_filter(int taps) {
    if (taps < 2 || taps % 2 != 0 || taps > 20) fail(ErrorCode::invalid_argument, "Daubechies filter needs an even tap count");
    const int moments = taps / 2;
    // |m0|^2 = cos^{2p}(w/2) P(sin^2(w/2)), P(y) = sum_k C(p-1+k, k) y^k
    std::vector<double> p_coeffs(moments);
    for (int k = 0; k < moments; ++k) p_coeffs[k] = binomial(moments - 1 + k, k);

    std::vector<Complex> poly{1.0};
    auto multiply = [&](Complex root) {
        std::vector<Complex> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= root * poly[i];
        }
        poly = std::move(next);
    };
    for (int i = 0; i < moments; ++i) multiply(-1.0);
    for (Complex y : polynomial_roots(p_coeffs)) {
        // y = (2 - z - 1/z)/4  <=>  z^2 - (2 - 4y) z + 1 = 0
        const Complex b = 2.0 - 4.0 * y;
        const Complex disc = std::sqrt(b * b - 4.0);
        Complex z = (b + disc) / 2.0;
        if (std::abs(z) < 1.0) z = (b - disc) / 2.0;
        multiply(z);
    }
    std::vector<double> filter(poly.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) sum += filter[i] = poly[i].real();
    for (double& h : filter) h *= std::sqrt(2.0) / sum;
    return filter;
}

WaveletFamily WaveletFamily::haar() {
    WaveletFamily w;
    w.kind_ = Kind::haar;
    w.name_ = "haar";
    w.filter_ = {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    return w;
}

WaveletFamily WaveletFamily::daubechies(int taps, int cascade_depth) {
    if (taps < 4 || taps > 12 || taps % 2 != 0) fail(ErrorCode::invalid_argument, "Daubechies taps must be 4..12, even");
    if (cascade_depth < 4 || cascade_depth > 20) fail(ErrorCode::invalid_argument, "cascade depth must be 4..20");
    WaveletFamily w;
    w.kind_ = Kind::daubechies;
    w.name_ = "db" + std::to_string(taps);
    w.filter_ = daubechies_filter(taps);
    w.cascade_depth_ = cascade_depth;

    const auto& h = w.filter_;
    const int length = taps - 1;  // support [0, length]
    const std::int64_t res = std::int64_t{1} << cascade_depth;
    const std::int64_t points = length * res + 1;

    // phi at the integers: eigenvector of A_{n,m} = sqrt2 h_{2n-m} for eigenvalue 1, sum = 1.
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(taps + 1, taps);
    for (int n = 0; n < taps; ++n) {
        for (int m = 0; m < taps; ++m) {
            const int idx = 2 * n - m;
            if (idx >= 0 && idx < taps) system(n, m) = std::sqrt(2.0) * h[idx];
        }
        system(n, n) -= 1.0;
    }
    system.row(taps).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(taps + 1);
    rhs(taps) = 1.0;
    const Eigen::VectorXd integer_values = system.colPivHouseholderQr().solve(rhs);

    auto tables = std::make_shared<Tables>();
    auto& phi = tables->phi;
    phi.assign(points, 0.0);
    for (int n = 0; n <= length; ++n) phi[n * res] = integer_values(n);
    for (int r = 1; r <= cascade_depth; ++r) {
        const std::int64_t stride = res >> r;
        for (std::int64_t i = stride; i < points; i += 2 * stride) {
            double acc = 0.0;
            for (int k = 0; k < taps; ++k) {
                const std::int64_t src = 2 * i - k * res;
                if (src >= 0 && src < points) acc += h[k] * phi[src];
            }
            phi[i] = std::sqrt(2.0) * acc;
        }
    }
    auto& psi = tables->psi;
    psi.assign(points, 0.0);
    for (std::int64_t i = 0; i < points; ++i) {
        double acc = 0.0;
        for (int k = 0; k < taps; ++k) {
            const double g = (k % 2 == 0 ? 1.0 : -1.0) * h[taps - 1 - k];
            const std::int64_t src = 2 * i - k * res;
            if (src >= 0 && src < points) acc += g * phi[src];
        }
        psi[i] = std::sqrt(2.0) * acc;
    }
    w.tables_ = std::move(tables);
    return w;
}

double WaveletFamily::lookup(const std::vector<double>& table, double t) const {
    const double scaled = std::ldexp(t, cascade_depth_);
    const double last = static_cast<double>(table.size() - 1);
    if (!(scaled >= 0.0 && scaled <= last)) return 0.0;
    const auto lo = static_cast<std::size_t>(std::floor(scaled));
    if (lo + 1 >= table.size()) return table.back();
    const double frac = scaled - static_cast<double>(lo);
    return table[lo] + frac * (table[lo + 1] - table[lo]);
}

double WaveletFamily::mother(double t) const {
    if (kind_ == Kind::haar) {
        if (t >= 0.0 && t < 0.5) return 1.0;
        if (t >= 0.5 && t < 1.0) return -1.0;
        return 0.0;
    }
    return lookup(tables_->psi, t);
}

double WaveletFamily::scaling(double t) const {
    if (kind_ == Kind::haar) return (t >= 0.0 && t < 1.0) ? 1.0 : 0.0;
    return lookup(tables_->phi, t);
}

double WaveletFamily::psi(const DyadicIndex& ix, double u) const {
    require_valid(ix);
    if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::domain, "wavelet argument outside [0,1]");
    if (kind_ == Kind::haar) {
        if (ix.j < 0) return 1.0;
        if (cell_of(u, ix.j) != ix.k) return 0.0;
        const double t = std::ldexp(u, ix.j) - static_cast<double>(ix.k);
        const double amplitude = std::sqrt(std::ldexp(1.0, ix.j));
        return t < 0.5 ? amplitude : -amplitude;
    }
    const int j = std::max(ix.j, 0);
    const double scale = std::ldexp(1.0, j);
    const double base = scale * u - static_cast<double>(ix.k);
    const double length = support_length();
    // periodization: sum over shifts m with base + scale*m in [0, length]
    const auto m_lo = static_cast<std::int64_t>(std::ceil(-base / scale));
    const auto m_hi = static_cast<std::int64_t>(std::floor((length - base) / scale));
    double acc = 0.0;
    for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const double t = base + scale * static_cast<double>(m);
        acc += ix.j < 0 ? scaling(t) : mother(t);
    }
    return ix.j < 0 ? acc : std::sqrt(scale) * acc;
}

void WaveletFamily::active_positions(int j, double u, std::vector<std::int64_t>& out) const {
    out.clear();
    const std::int64_t cells = std::int64_t{1} << j;
    const std::int64_t home = cell_of(u, j);
    if (kind_ == Kind::haar) {
        out.push_back(home);
        return;
    }
    for (int r = 0; r < support_length(); ++r) {
        const std::int64_t k = ((home - r) % cells + cells) % cells;
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
}

std::vector<double> WaveletFamily::breakpoints(const DyadicIndex& ix) const {
    require_valid(ix);
    if (ix.j < 0) return {};
    const double scale = std::ldexp(1.0, ix.j);
    if (kind_ == Kind::haar) {
        const double k = static_cast<double>(ix.k);
        return {k / scale, (k + 0.5) / scale, (k + 1.0) / scale};
    }
    std::vector<double> out;
    for (int i = 0; i <= support_length(); ++i) {
        const double t = std::fmod((static_cast<double>(ix.k) + i) / scale, 1.0);
        out.push_back(t);
    }
    return out;
}

std::vector<std::pair<double, double>> WaveletFamily::mother_table() const {
    if (kind_ == Kind::haar) return {{0.0, 1.0}, {0.5, -1.0}, {1.0, 0.0}};
    std::vector<std::pair<double, double>> out;
    const auto& psi = tables_->psi;
    out.reserve(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) out.emplace_back(std::ldexp(static_cast<double>(i), -cascade_depth_), psi[i]);
    return out;
}

WaveletFamily make_wavelet(const std::string& name) {
    if (name == "haar") return WaveletFamily::haar();
    if (name.size() > 2 && name.rfind("db", 0) == 0) {
        int taps = 0;
        try {
            taps = std::stoi(name.substr(2));
        } catch (...) {
            fail(ErrorCode::catalog, "unknown wavelet '" + name + "'");
        }
        if (taps >= 4 && taps <= 12 && taps % 2 == 0) return WaveletFamily::daubechies(taps);
    }
    fail(ErrorCode::catalog, "unknown wavelet '" + name + "'; valid: haar, db4, db6, db8, db10, db12");
}

}  // namespace warptree
