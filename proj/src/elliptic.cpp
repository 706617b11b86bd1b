#include "elliptic_lab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "elliptic_lab/quadrature.hpp"
#include "elliptic_lab/svg.hpp"

namespace ell {

EllipticLaw::EllipticLaw(Complex rho) : rho_(rho) {
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("elliptic law: |rho| must be < 1");
}

double EllipticLaw::area() const {
    const double r = abs_rho();
    return M_PI * (1.0 - r * r);
}

bool EllipticLaw::contains(Complex z, double inflation) const {
    if (!(inflation > 0.0)) throw std::invalid_argument("contains: inflation must be > 0");
    double xr, yr, a, b;
    if (is_real()) {
        const double rho = rho_.real();
        xr = z.real();
        yr = z.imag();
        a = 1.0 + rho;
        b = 1.0 - rho;
    } else {
        // Long axis along e^{i theta/2}: test e^{-i theta/2} z against E_{|rho|}.
        const double half = 0.5 * theta();
        const double c = std::cos(half), s = std::sin(half);
        xr = z.real() * c + z.imag() * s;
        yr = -z.real() * s + z.imag() * c;
        a = 1.0 + abs_rho();
        b = 1.0 - abs_rho();
    }
    a *= inflation;
    b *= inflation;
    const double u = xr / a, v = yr / b;
    return u * u + v * v <= 1.0;
}

double EllipticLaw::cdf(double x, double y) const {
    if (!is_real())
        throw std::invalid_argument("cdf: defined for real rho only (rotate the sample first)");
    const double rho = rho_.real();
    const double a = 1.0 + rho, b = 1.0 - rho;
    if (x <= -a || y <= -b) return 0.0;
    const double hi = std::min(x, a);
    // Half-chord at abscissa t, and the clipped chord length below y.
    auto half_chord = [&](double t) {
        const double arg = 1.0 - (t / a) * (t / a);
        return b * std::sqrt(std::max(0.0, arg));
    };
    auto clipped = [&](double t) {
        const double h = half_chord(t);
        return std::max(0.0, std::min(y, h) + h);
    };
    // Kinks where the horizontal line y meets the ellipse boundary.
    std::vector<double> splits;
    if (std::abs(y) < b) {
        const double t = a * std::sqrt(1.0 - (y / b) * (y / b));
        splits = {-t, t};
    }
    const double raw = adaptive_simpson_split(clipped, -a, hi, splits, 1e-10 * area());
    return std::clamp(raw / area(), 0.0, 1.0);
}

double discrepancy(const EmpiricalMeasure2D& mu, const EllipticLaw& law, int grid) {
    if (grid < 2) throw std::invalid_argument("discrepancy: grid must be >= 2");
    if (!law.is_real())
        throw std::invalid_argument(
            "discrepancy: complex rho unsupported; rotate_to_real_frame first");
    const double half = (1.0 + law.abs_rho()) + 0.2;
    double worst = 0.0;
    for (int ix = 0; ix < grid; ++ix) {
        const double x = -half + 2.0 * half * ix / (grid - 1);
        for (int iy = 0; iy < grid; ++iy) {
            const double y = -half + 2.0 * half * iy / (grid - 1);
            const double femp = esd_eval(mu.points, x, y);
            const double flaw = law.cdf(x, y);
            worst = std::max(worst, std::abs(femp - flaw));
        }
    }
    return worst;
}

double empirical_discrepancy(const EmpiricalMeasure2D& a, const EmpiricalMeasure2D& b,
                             int grid, double pad) {
    if (grid < 2) throw std::invalid_argument("empirical_discrepancy: grid must be >= 2");
    double lo_x = 0, hi_x = 0, lo_y = 0, hi_y = 0;
    for (const auto& m : {a, b})
        for (const Complex& p : m.points) {
            lo_x = std::min(lo_x, p.real());
            hi_x = std::max(hi_x, p.real());
            lo_y = std::min(lo_y, p.imag());
            hi_y = std::max(hi_y, p.imag());
        }
    lo_x -= pad;
    hi_x += pad;
    lo_y -= pad;
    hi_y += pad;
    double worst = 0.0;
    for (int ix = 0; ix < grid; ++ix) {
        const double x = lo_x + (hi_x - lo_x) * ix / (grid - 1);
        for (int iy = 0; iy < grid; ++iy) {
            const double y = lo_y + (hi_y - lo_y) * iy / (grid - 1);
            worst = std::max(worst, std::abs(esd_eval(a.points, x, y) - esd_eval(b.points, x, y)));
        }
    }
    return worst;
}

double inside_fraction(const EmpiricalMeasure2D& mu, const EllipticLaw& law, double inflation) {
    if (mu.points.empty()) return 0.0;
    std::size_t inside = 0;
    for (const Complex& p : mu.points)
        if (law.contains(p, inflation)) ++inside;
    return static_cast<double>(inside) / static_cast<double>(mu.points.size());
}

std::pair<EmpiricalMeasure2D, EllipticLaw> rotate_to_real_frame(const EmpiricalMeasure2D& mu,
                                                                const EllipticLaw& law) {
    const Complex phase = std::polar(1.0, -0.5 * law.theta());
    EmpiricalMeasure2D rotated;
    rotated.points.reserve(mu.points.size());
    for (const Complex& p : mu.points) rotated.points.push_back(phase * p);
    return {std::move(rotated), EllipticLaw(law.abs_rho())};
}

void write_scatter_svg(const std::string& path, const EmpiricalMeasure2D& mu,
                       const EllipticLaw& law, double inflation) {
    SvgCanvas canvas(640, 640);
    const double half = (1.0 + law.abs_rho()) * 1.35;
    canvas.set_view(-half, half, -half, half);
    canvas.axes();
    const auto [a, b] = law.semi_axes();
    canvas.ellipse(0.0, 0.0, a * inflation, b * inflation, 0.5 * law.theta(), "#1f77b4");
    for (const Complex& p : mu.points) canvas.point(p.real(), p.imag(), "#d62728");
    canvas.save(path);
}

void write_cdf_csv(const std::string& path, const EllipticLaw& law, int grid) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "x,y,F\n";
    f.precision(12);
    const double half = (1.0 + law.abs_rho()) + 0.2;
    for (int ix = 0; ix < grid; ++ix) {
        const double x = -half + 2.0 * half * ix / (grid - 1);
        for (int iy = 0; iy < grid; ++iy) {
            const double y = -half + 2.0 * half * iy / (grid - 1);
            f << x << "," << y << "," << law.cdf(x, y) << "\n";
        }
    }
}

}  // namespace ell
