#pragma once

// Periodized compactly supported wavelets on [0,1] and their warped versions
// psi_{j,k}(G(x)). Haar is evaluated in closed form; Daubechies families are
// tabulated by the cascade algorithm.

#include <memory>
#include <string>
#include <vector>

#include "warptree/design.hpp"
#include "warptree/dyadic.hpp"

namespace warptree {

class WaveletFamily {
public:
    enum class Kind { haar, daubechies };

    static WaveletFamily haar();
    /// `taps` in {4, 6, 8, 10, 12}; mother/scaling tabulated at spacing 2^-cascade_depth.
    static WaveletFamily daubechies(int taps, int cascade_depth = 14);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    const std::vector<double>& filter() const noexcept { return filter_; }
    int cascade_depth() const noexcept { return cascade_depth_; }
    /// Support of mother and scaling function is [0, support_length()].
    int support_length() const noexcept { return static_cast<int>(filter_.size()) - 1; }

    double mother(double t) const;
    double scaling(double t) const;

    /// Periodized psi_{j,k}(u), u in [0,1]; j == -1 is the periodized scaling
    /// function phi_{0,0}. Haar uses half-open cells with the last cell
    /// right-closed.
    double psi(const DyadicIndex& ix, double u) const;
    double warped(const DyadicIndex& ix, const DesignCdf& design, double x) const {
        return psi(ix, design.cdf(x));
    }

    /// Positions k at level j >= 0 whose psi_{j,k} may be nonzero at u.
    void active_positions(int j, double u, std::vector<std::int64_t>& out) const;

    /// Points of [0,1] where psi_{j,k} or its derivative may jump.
    std::vector<double> breakpoints(const DyadicIndex& ix) const;

    /// Tabulated (t, psi(t)) pairs; Haar yields its three breakpoints.
    std::vector<std::pair<double, double>> mother_table() const;

private:
    struct Tables {
        std::vector<double> phi;
        std::vector<double> psi;
    };

    WaveletFamily() = default;
    double lookup(const std::vector<double>& table, double t) const;

    Kind kind_ = Kind::haar;
    std::string name_;
    std::vector<double> filter_;
    int cascade_depth_ = 0;
    std::shared_ptr<const Tables> tables_;
};

/// Daubechies low-pass filter with `taps` coefficients (sum sqrt(2)),
/// minimum-phase root selection.
std::vector<double> daubechies_filter(int taps);

/// "haar" or "db4".."db12".
WaveletFamily make_wavelet(const std::string& name);

}  // namespace warptree
