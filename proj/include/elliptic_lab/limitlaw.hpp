#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "elliptic_lab/spectra.hpp"

namespace ell {

// Solver state for the self-consistent resolvent system at spectral parameter
// alpha (Im alpha > 0) and shift z.
struct StieltjesState {
    Complex alpha;
    Complex z;
    Complex s;
    Complex t;
    Complex u;
    double residual = 0.0;  // max abs of the three equation defects
};

// Symmetrized singular-value density of the shifted ensemble at z, recovered
// by Stieltjes inversion of the solved system.
struct NuZ {
    Complex z;
    std::vector<double> grid;
    std::vector<double> density;  // even in x, integrates to ~1
};

// 2n x 2n Hermitian block [[0, X/sqrt(n) - zI], [X^*/sqrt(n) - conj(z)I, 0]].
ComplexMatrix hermitized_block(const ComplexMatrix& x, Complex z);

// -(1/n) sum log sigma_i. Throws on a nonpositive singular value.
double log_potential(const EmpiricalMeasure1D& nu);

struct IntegrabilityDiag {
    double moment_p;
    double moment_neg_p;
};

// (int s^p dnu, int s^{-p} dnu): the uniform-integrability diagnostics.
IntegrabilityDiag uniform_integrability_diag(const EmpiricalMeasure1D& nu, double p);

// Indices i in [n^{1-gamma}, n-1] violating sigma_{n-i} >= c0 * i / n.
// Input sorted descending.
std::vector<int> small_sigma_profile(const std::vector<double>& sv_desc, double c0,
                                     double gamma);

struct StuTriple {
    Complex s;
    Complex t;
    Complex u;
};

// Resolvent traces of the Hermitized block: s = tr(R)/(2n), t = (1/n) sum
// R_{i+n,i}, u = (1/n) sum R_{i,i+n}, with R = (V(z) - alpha I)^{-1} by dense LU.
StuTriple empirical_stu(const ComplexMatrix& x, Complex z, Complex alpha);

// Newton + vertical homotopy in Im(alpha) from the resolvent-expansion seed at
// Im = 100 down to the target; keeps the Im(s) > 0 branch, residual <= 1e-12.
StieltjesState solve_stu_system(double rho, Complex z, Complex alpha);

// Stieltjes inversion density(x) = Im(s(x + i eps))/pi on the given abscissae.
NuZ nu_z_density(double rho, Complex z, const std::vector<double>& grid, double epsilon = 1e-3);

struct PotentialMatch {
    double u_emp = 0.0;
    double u_limit = 0.0;
    double gap = 0.0;
    bool empirical_only = false;
};

// Compare the empirical log potential of X/sqrt(n) - zI against the limit
// -int_0^infty log(x) dnu_z(x) evaluated from the solved density. A missing
// rho switches to empirical-only mode.
PotentialMatch potential_match(const ComplexMatrix& x, std::optional<double> rho, Complex z,
                               double epsilon = 1e-3, double grid_step = 1e-2);

// Levy distance between two atomic measures (equal-weight point sets).
double levy_distance(const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b);
// Levy distance between an atomic measure and a continuous CDF.
double levy_distance(const EmpiricalMeasure1D& a, const std::function<double(double)>& cdf_b,
                     double lo, double hi);

struct VarianceProbe {
    double var_n;
    double var_2n;
    double ratio;  // var_n / var_2n
};

// Sample variance of (1/n) tr (R^*R - alpha)^{-1} at sizes n and 2n.
VarianceProbe variance_scaling_probe(const EnsembleSpec& spec, Complex z, Complex alpha,
                                     std::size_t trials, int jobs = 0);

struct MomentMatchReport {
    bool match;
    double max_defect;
    int worst_i = 0, worst_j = 0, worst_l = 0, worst_m = 0;
};

// Mixed-moment agreement up to total order k (exact computation both sides).
MomentMatchReport moments_match(const AtomPairSpec& a, const AtomPairSpec& b, int k,
                                double tol = 1e-9);

void write_nu_z_csv(const std::string& path, double rho, const NuZ& nu);

}  // namespace ell
