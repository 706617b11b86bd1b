#pragma once

#include <complex>

#include "elliptic_lab/spectra.hpp"

namespace ell {

// Uniform law on the ellipse with semi-axes 1+|rho|, 1-|rho|, rotated by
// Arg(rho)/2 for complex rho. Real rho uses the signed-axis form directly.
class EllipticLaw {
public:
    explicit EllipticLaw(Complex rho);
    explicit EllipticLaw(double rho) : EllipticLaw(Complex(rho, 0.0)) {}

    Complex rho() const { return rho_; }
    bool is_real() const { return rho_.imag() == 0.0; }
    double theta() const { return std::arg(rho_); }
    double abs_rho() const { return std::abs(rho_); }
    // (1+|rho|, 1-|rho|)
    std::pair<double, double> semi_axes() const { return {1.0 + abs_rho(), 1.0 - abs_rho()}; }
    double area() const;
    double density() const { return 1.0 / area(); }

    // Membership in the (rotated) ellipse with both semi-axes scaled by inflation.
    bool contains(Complex z, double inflation = 1.0) const;

    // F_rho(x, y): normalized area of E_rho intersect {Re <= x, Im <= y}.
    // Real rho only; adaptive quadrature, absolute tolerance ~1e-9.
    double cdf(double x, double y) const;

private:
    Complex rho_;
};

// Sup over a grid x grid lattice of corners spanning the padded bounding box
// of |F_emp(x,y) - F_rho(x,y)|. Complex rho is rejected; rotate first.
double discrepancy(const EmpiricalMeasure2D& mu, const EllipticLaw& law, int grid);

// Same Kolmogorov-style statistic between two empirical measures.
double empirical_discrepancy(const EmpiricalMeasure2D& a, const EmpiricalMeasure2D& b,
                             int grid, double pad = 0.2);

// Fraction of points inside the inflated ellipse.
double inside_fraction(const EmpiricalMeasure2D& mu, const EllipticLaw& law,
                       double inflation = 1.0);

// Rotate a sample by e^{-i theta/2} so a complex-rho law becomes real-rho.
std::pair<EmpiricalMeasure2D, EllipticLaw> rotate_to_real_frame(const EmpiricalMeasure2D& mu,
                                                                const EllipticLaw& law);

// Scatter + ellipse overlay as a standalone SVG file.
void write_scatter_svg(const std::string& path, const EmpiricalMeasure2D& mu,
                       const EllipticLaw& law, double inflation = 1.0);

// CDF table over a grid, rows "x,y,F".
void write_cdf_csv(const std::string& path, const EllipticLaw& law, int grid);

}  // namespace ell
