#pragma once

// Empirical and theoretical (quadrature) scaling / wavelet coefficients, and
// the two residual statistics driving tree selection:
//   piecewise  nu_I  = sqrt(sum_{J in C(I)} s_J^2 - s_I^2)
//   vertical   nu_jk = sqrt(sum over the subtree of I_jk of d_lm^2)

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "warptree/design.hpp"
#include "warptree/dyadic.hpp"
#include "warptree/quadrature.hpp"
#include "warptree/wavelet.hpp"

namespace warptree {

enum class CoefficientKind { scaling_empirical, scaling_theoretical, wavelet_empirical, wavelet_theoretical };
std::string to_string(CoefficientKind kind);

struct CoefficientMap {
    std::map<DyadicIndex, double> entries;
    CoefficientKind kind = CoefficientKind::wavelet_empirical;
    int max_level = -1;

    bool contains(const DyadicIndex& ix) const { return entries.count(ix) != 0; }
    /// Throws Error{missing_coefficient}.
    double at(const DyadicIndex& ix) const;
};

enum class ResidualKind { piecewise, vertical };

struct ResidualMap {
    std::map<DyadicIndex, double> entries;
    ResidualKind kind = ResidualKind::vertical;
    int truncation_level = 0;  // J*: levels j < J* carry residuals

    double at(const DyadicIndex& ix) const;
};

/// G(x_i) for every sample point.
std::vector<double> warped_coordinates(const Sample& z, const DesignCdf& design);

double empirical_measure(const Sample& z, const DyadicIndex& ix);
/// s_I(z) = (1/n) sum y_i 1_I(x_i) / sqrt(G_n(I)); 0 on empty cells.
double empirical_scaling_coeff(const Sample& z, const DyadicIndex& ix);
/// s_I = int_I f dG / sqrt(G(I)); 0 when G(I) = 0.
double theoretical_scaling_coeff(const TestFunction& f, const DesignCdf& design, const DyadicIndex& ix,
                                 const QuadratureOptions& quad = {});
/// Requires entries for ix and both children.
double piecewise_residual(const CoefficientMap& scaling, const DyadicIndex& ix);

/// d_I(z) = (1/n) sum y_i psi_I(G(x_i)).
double empirical_wavelet_coeff(const Sample& z, const WaveletFamily& w, const DesignCdf& design, const DyadicIndex& ix);
/// d_I = int_0^1 f(G^{-1}(u)) psi_I(u) du.
double theoretical_wavelet_coeff(const TestFunction& f, const WaveletFamily& w, const DesignCdf& design,
                                 const DyadicIndex& ix, const QuadratureOptions& quad = {});
/// Subtree energy over levels ix.j .. j_star-1, the node itself included.
double vertical_residual(const CoefficientMap& wavelet, const DyadicIndex& ix, int j_star);

// Bulk builders over full levels.

/// G_n(I) for all I at levels 0..max_level.
std::map<DyadicIndex, double> empirical_measures(const Sample& z, int max_level);
/// s_I(z) for all I at levels 0..max_level.
CoefficientMap empirical_scaling_coeffs(const Sample& z, int max_level);
CoefficientMap theoretical_scaling_coeffs(const TestFunction& f, const DesignCdf& design, int max_level,
                                          const QuadratureOptions& quad = {});
/// (-1,0) and every (j,k) with j < j_star.
CoefficientMap empirical_wavelet_coeffs(const Sample& z, const WaveletFamily& w, const DesignCdf& design, int j_star);
CoefficientMap empirical_wavelet_coeffs(const std::vector<double>& warped, const std::vector<double>& y,
                                        const WaveletFamily& w, int j_star);
CoefficientMap theoretical_wavelet_coeffs(const TestFunction& f, const WaveletFamily& w, const DesignCdf& design,
                                          int j_star, const QuadratureOptions& quad = {});

/// nu_{j,k} for all j < j_star.
ResidualMap vertical_residuals(const CoefficientMap& wavelet, int j_star);
/// nu_I for all I with level < j_star; needs scaling coefficients through j_star.
ResidualMap piecewise_residuals(const CoefficientMap& scaling, int j_star);

/// CSV `j,k,value,kind` ordered by (j,k).
void write_coefficients_csv(const CoefficientMap& coeffs, std::ostream& out);

}  // namespace warptree
