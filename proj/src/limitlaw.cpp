#include "elliptic_lab/limitlaw.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "elliptic_lab/parallel.hpp"

namespace ell {

ComplexMatrix hermitized_block(const ComplexMatrix& x, Complex z) {
    const Eigen::Index n = x.rows();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    ComplexMatrix y = scale * x;
    y.diagonal().array() -= z;
    ComplexMatrix v = ComplexMatrix::Zero(2 * n, 2 * n);
    v.topRightCorner(n, n) = y;
    v.bottomLeftCorner(n, n) = y.adjoint();
    return v;
}

double log_potential(const EmpiricalMeasure1D& nu) {
    if (nu.points.empty()) throw std::invalid_argument("log_potential: empty measure");
    double total = 0.0;
    for (double s : nu.points) {
        if (!(s > 0.0)) throw std::runtime_error("log_potential: singular matrix (sigma <= 0)");
        total += std::log(s);
    }
    return -total / static_cast<double>(nu.points.size());
}

IntegrabilityDiag uniform_integrability_diag(const EmpiricalMeasure1D& nu, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("uniform_integrability_diag: p must be > 0");
    double mp = 0.0, mneg = 0.0;
    for (double s : nu.points) {
        if (!(s > 0.0))
            throw std::runtime_error("uniform_integrability_diag: sigma <= 0 in measure");
        mp += std::pow(s, p);
        mneg += std::pow(s, -p);
    }
    const double n = static_cast<double>(nu.points.size());
    return {mp / n, mneg / n};
}

std::vector<int> small_sigma_profile(const std::vector<double>& sv_desc, double c0,
                                     double gamma) {
    const int n = static_cast<int>(sv_desc.size());
    std::vector<int> violations;
    if (n < 2) return violations;
    const int i_lo = static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 1.0 - gamma)));
    for (int i = std::max(1, i_lo); i <= n - 1; ++i) {
        const double sigma = sv_desc[static_cast<std::size_t>(n - i - 1)];  // sigma_{n-i}
        if (sigma < c0 * static_cast<double>(i) / static_cast<double>(n)) violations.push_back(i);
    }
    return violations;
}

StuTriple empirical_stu(const ComplexMatrix& x, Complex z, Complex alpha) {
    if (!(alpha.imag() > 0.0))
        throw std::invalid_argument("empirical_stu: Im(alpha) must be > 0");
    const Eigen::Index n = x.rows();
    ComplexMatrix shifted = hermitized_block(x, z);
    shifted.diagonal().array() -= alpha;
    Eigen::PartialPivLU<ComplexMatrix> lu(shifted);
    const ComplexMatrix r = lu.inverse();
    if (!r.allFinite()) throw std::runtime_error("empirical_stu: resolvent solve failed");
    Complex s = r.trace() / static_cast<double>(2 * n);
    Complex t{0, 0}, u{0, 0};
    for (Eigen::Index i = 0; i < n; ++i) {
        t += r(i + n, i);
        u += r(i, i + n);
    }
    t /= static_cast<double>(n);
    u /= static_cast<double>(n);
    return {s, t, u};
}

namespace {

using Vec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3cd;

// Noiseless self-consistent system; F = 0 at the solution.
Vec3 system_defect(double rho, Complex z, Complex alpha, Complex s, Complex t, Complex u) {
    const Complex zb = std::conj(z);
    Vec3 f;
    f(0) = s * s + alpha * s + 1.0 + 0.5 * rho * (t * t + u * u) + 0.5 * z * t + 0.5 * zb * u;
    f(1) = (alpha + s) * t + rho * s * u + zb * s;
    f(2) = (alpha + s) * u + rho * s * t + z * s;
    return f;
}

Mat3 system_jacobian(double rho, Complex z, Complex alpha, Complex s, Complex t, Complex u) {
    const Complex zb = std::conj(z);
    Mat3 j;
    j(0, 0) = 2.0 * s + alpha;
    j(0, 1) = rho * t + 0.5 * z;
    j(0, 2) = rho * u + 0.5 * zb;
    j(1, 0) = t + rho * u + zb;
    j(1, 1) = alpha + s;
    j(1, 2) = rho * s;
    j(2, 0) = u + rho * t + z;
    j(2, 1) = rho * s;
    j(2, 2) = alpha + s;
    return j;
}

struct NewtonResult {
    bool converged;
    Complex s, t, u;
    double residual;
};

NewtonResult newton_solve(double rho, Complex z, Complex alpha, Complex s, Complex t, Complex u,
                          int max_iter = 60, double tol = 1e-13) {
    double res = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Vec3 f = system_defect(rho, z, alpha, s, t, u);
        res = f.cwiseAbs().maxCoeff();
        if (res <= tol) return {true, s, t, u, res};
        const Mat3 j = system_jacobian(rho, z, alpha, s, t, u);
        const Vec3 step = j.fullPivLu().solve(f);
        if (!step.allFinite()) return {false, s, t, u, res};
        s -= step(0);
        t -= step(1);
        u -= step(2);
    }
    res = system_defect(rho, z, alpha, s, t, u).cwiseAbs().maxCoeff();
    return {res <= tol, s, t, u, res};
}

}  // namespace

StieltjesState solve_stu_system(double rho, Complex z, Complex alpha) {
    if (!(alpha.imag() > 0.0))
        throw std::invalid_argument("solve_stu_system: Im(alpha) must be > 0");
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("solve_stu_system: |rho| must be < 1");

    const double im_target = alpha.imag();
    const double im_start = std::max(100.0, 2.0 * im_target);
    double im = im_start;
    Complex cur_alpha(alpha.real(), im);
    // Resolvent-expansion seed, exact as Im(alpha) -> infinity.
    Complex s = -1.0 / cur_alpha, t{0, 0}, u{0, 0};
    {
        const NewtonResult warm = newton_solve(rho, z, cur_alpha, s, t, u);
        if (!warm.converged || warm.s.imag() <= 0.0)
            throw std::runtime_error("solve_stu_system: seed solve failed");
        s = warm.s;
        t = warm.t;
        u = warm.u;
    }

    // Walk Im(alpha) down geometrically; on failure bisect the step.
    int bisections = 0;
    const int bisection_cap = 60;
    while (im > im_target) {
        double next = std::max(im_target, 0.7 * im);
        while (true) {
            const Complex trial_alpha(alpha.real(), next);
            const NewtonResult r = newton_solve(rho, z, trial_alpha, s, t, u);
            if (r.converged && r.s.imag() > 0.0) {
                s = r.s;
                t = r.t;
                u = r.u;
                im = next;
                break;
            }
            if (++bisections > bisection_cap)
                throw std::runtime_error(
                    "solve_stu_system: homotopy failed to reach target Im(alpha)");
            next = 0.5 * (im + next);
            if (next >= im)
                throw std::runtime_error("solve_stu_system: homotopy step collapsed");
        }
    }

    const NewtonResult fin = newton_solve(rho, z, alpha, s, t, u, 100, 1e-13);
    const double res = system_defect(rho, z, alpha, fin.s, fin.t, fin.u).cwiseAbs().maxCoeff();
    if (!fin.converged || res > 1e-12)
        throw std::runtime_error("solve_stu_system: residual above 1e-12 at target");
    if (fin.s.imag() <= 0.0)
        throw std::runtime_error("solve_stu_system: left the Im(s) > 0 branch");
    return {alpha, z, fin.s, fin.t, fin.u, res};
}

NuZ nu_z_density(double rho, Complex z, const std::vector<double>& grid, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("nu_z_density: epsilon must be > 0");
    NuZ out;
    out.z = z;
    out.grid = grid;
    out.density.resize(grid.size());
    // Evaluate on |x| and mirror: the symmetrized density is even by construction.
    std::vector<double> mags(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) mags[k] = std::abs(grid[k]);
    parallel_for(grid.size(), [&](std::size_t k) {
        const StieltjesState st = solve_stu_system(rho, z, Complex(mags[k], epsilon));
        out.density[k] = std::max(0.0, st.s.imag() / M_PI);
    });
    return out;
}

PotentialMatch potential_match(const ComplexMatrix& x, std::optional<double> rho, Complex z,
                               double epsilon, double grid_step) {
    PotentialMatch out;
    ComplexMatrix shifted = x / std::sqrt(static_cast<double>(x.rows()));
    shifted.diagonal().array() -= z;
    out.u_emp = log_potential(singular_measure(shifted));
    if (!rho.has_value()) {
        out.empirical_only = true;
        return out;
    }
    // -int_0^inf log(x) dnu_z = -2 int_0^inf log(x) density(x) dx; midpoint grid
    // dodges the log singularity and the density is finite there.
    const double hi = std::abs(z) + 3.5;
    std::vector<double> grid;
    for (double xm = 0.5 * grid_step; xm < hi; xm += grid_step) grid.push_back(xm);
    const NuZ dens = nu_z_density(*rho, z, grid, epsilon);
    double integral = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        integral += std::log(grid[k]) * dens.density[k] * grid_step;
    out.u_limit = -2.0 * integral;
    out.gap = std::abs(out.u_emp - out.u_limit);
    return out;
}

namespace {

// Atomic CDF (right-continuous), equal weights.
double step_cdf(const std::vector<double>& sorted, double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

// Candidate evaluation points for the sandwich check at a given eps: all shift
// breakpoints plus midpoints between consecutive ones (H is piecewise constant).
bool sandwich_ok(const std::vector<double>& fa, const std::vector<double>& gb, double eps) {
    std::vector<double> pts;
    pts.reserve(2 * (fa.size() + gb.size()) + 8);
    for (double a : fa) {
        pts.push_back(a + eps);
        pts.push_back(a - eps);
    }
    pts.insert(pts.end(), gb.begin(), gb.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<double> candidates = pts;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        candidates.push_back(0.5 * (pts[i] + pts[i + 1]));
    for (double x : candidates) {
        const double g = step_cdf(gb, x);
        if (step_cdf(fa, x - eps) - eps > g + 1e-15) return false;
        if (g > step_cdf(fa, x + eps) + eps + 1e-15) return false;
    }
    return true;
}

}  // namespace

double levy_distance(const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b) {
    std::vector<double> fa = a.points, gb = b.points;
    std::sort(fa.begin(), fa.end());
    std::sort(gb.begin(), gb.end());
    if (fa.empty() || gb.empty()) throw std::invalid_argument("levy_distance: empty measure");
    double lo = 0.0, hi = 1.0;
    {
        // Widen hi if the supports are far apart.
        const double spread = std::max(std::abs(fa.back() - gb.front()),
                                       std::abs(gb.back() - fa.front()));
        hi = std::max(1.0, spread) + 1.0;
    }
    if (sandwich_ok(fa, gb, 0.0)) return 0.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sandwich_ok(fa, gb, mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double levy_distance(const EmpiricalMeasure1D& a, const std::function<double(double)>& cdf_b,
                     double lo_x, double hi_x) {
    std::vector<double> fa = a.points;
    std::sort(fa.begin(), fa.end());
    if (fa.empty()) throw std::invalid_argument("levy_distance: empty measure");
    auto ok = [&](double eps) {
        std::vector<double> pts;
        for (double v : fa) {
            pts.push_back(v + eps);
            pts.push_back(v - eps);
            pts.push_back(v);
        }
        pts.push_back(lo_x);
        pts.push_back(hi_x);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        std::vector<double> candidates = pts;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            candidates.push_back(0.5 * (pts[i] + pts[i + 1]));
        for (double x : candidates) {
            const double g = cdf_b(x);
            if (step_cdf(fa, x - eps) - eps > g + 1e-12) return false;
            if (g > step_cdf(fa, x + eps) + eps + 1e-12) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 1.0 + std::max(std::abs(hi_x), std::abs(lo_x));
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

VarianceProbe variance_scaling_probe(const EnsembleSpec& spec, Complex z, Complex alpha,
                                     std::size_t trials, int jobs) {
    if (alpha.imag() == 0.0)
        throw std::invalid_argument("variance_scaling_probe: Im(alpha) must be nonzero");
    auto sample_variance = [&](int n) {
        std::vector<Complex> vals(trials);
        parallel_for(
            trials,
            [&](std::size_t tr) {
                EnsembleSpec s = spec;
                s.n = n;
                s.seed = RandomStream(spec.seed).derive(static_cast<std::uint64_t>(n), tr)
                             .next_u64();
                const ComplexMatrix x = generate(s);
                ComplexMatrix r = x / std::sqrt(static_cast<double>(n));
                r.diagonal().array() -= z;
                // tr (R^*R - alpha)^{-1} from the singular values.
                const std::vector<double> sv = singular_values(r);
                Complex trace{0, 0};
                for (double sig : sv) trace += 1.0 / (sig * sig - alpha);
                vals[tr] = trace / static_cast<double>(n);
            },
            jobs);
        Complex mean{0, 0};
        for (const Complex& v : vals) mean += v;
        mean /= static_cast<double>(trials);
        double var = 0.0;
        for (const Complex& v : vals) var += std::norm(v - mean);
        return var / static_cast<double>(trials > 1 ? trials - 1 : 1);
    };
    VarianceProbe probe{};
    probe.var_n = sample_variance(spec.n);
    probe.var_2n = sample_variance(2 * spec.n);
    probe.ratio = (probe.var_2n > 0.0) ? probe.var_n / probe.var_2n
                                       : std::numeric_limits<double>::infinity();
    return probe;
}

MomentMatchReport moments_match(const AtomPairSpec& a, const AtomPairSpec& b, int k,
                                double tol) {
    MomentMatchReport rep{true, 0.0, 0, 0, 0, 0};
    for (int i = 0; i <= k; ++i)
        for (int j = 0; i + j <= k; ++j)
            for (int l = 0; i + j + l <= k; ++l)
                for (int m = 0; i + j + l + m <= k; ++m) {
                    if (i + j + l + m == 0) continue;
                    const double defect =
                        std::abs(pair_moment(a, i, j, l, m) - pair_moment(b, i, j, l, m));
                    if (defect > rep.max_defect) {
                        rep.max_defect = defect;
                        rep.worst_i = i;
                        rep.worst_j = j;
                        rep.worst_l = l;
                        rep.worst_m = m;
                    }
                }
    rep.match = rep.max_defect <= tol;
    return rep;
}

void write_nu_z_csv(const std::string& path, double rho, const NuZ& nu) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "rho,z_re,z_im,x,density\n";
    f.precision(12);
    for (std::size_t k = 0; k < nu.grid.size(); ++k)
        f << rho << "," << nu.z.real() << "," << nu.z.imag() << "," << nu.grid[k] << ","
          << nu.density[k] << "\n";
}

}  // namespace ell
