#pragma once

#include <optional>
#include <vector>

#include "elliptic_lab/atoms.hpp"
#include "elliptic_lab/ensemble.hpp"

namespace ell {

// Generalized arithmetic progression: image of the integer box
// {k : lower_i <= k_i <= upper_i} under k -> g0 + sum k_i g_i.
struct GapProgression {
    Complex g0{0, 0};
    std::vector<Complex> generators;
    std::vector<long> lower;
    std::vector<long> upper;

    static GapProgression symmetric(std::vector<Complex> gens, std::vector<long> dims);
    void validate() const;
    int rank() const { return static_cast<int>(generators.size()); }
    bool is_symmetric() const;
    // product of (upper_i - lower_i + 1)
    unsigned long long box_cardinality() const;
};

struct GapEnumeration {
    std::vector<Complex> elements;  // distinct, sorted lexicographically by (re, im)
    bool proper = false;            // |image| == |box|
    std::size_t size = 0;           // |image|
};

// Expand the box through the affine map; cap 1e7 box points.
GapEnumeration gap_enumerate(const GapProgression& q);

struct DeltaCloseResult {
    bool close = false;
    bool exact = true;  // false when the lattice-rounding heuristic was used
};

// Is a within distance delta of some element of Q? Exact by enumeration when
// feasible, otherwise a least-squares rounding heuristic (flagged).
DeltaCloseResult delta_close(const GapProgression& q, Complex a, double delta);

// Small-ball query: gamma = sup_a P(|sum a_i (x_i+f_i) (+ sum b_i (x'_i+f'_i)) - a| <= beta).
struct SmallBallQuery {
    std::vector<Complex> a;
    std::optional<std::vector<Complex>> b;        // mixing form
    std::optional<std::vector<Complex>> shifts_f;
    std::optional<std::vector<Complex>> shifts_fp;
    std::optional<ScalarAtomSpec> scalar_atom;    // exactly one atom law set
    std::optional<AtomPairSpec> pair_atom;
    double beta = 1.0;

    void validate() const;
};

struct SmallBallExactResult {
    double gamma = 0.0;
    // False only when the distinct-atom cloud exceeded the 2D sweep cap and the
    // atom-centered 2-approximation was used.
    bool sup_exact = true;
};

// Exact enumeration of the value cloud (support^n capped at 1e7) and exact
// max-mass ball cover (sliding window in 1D, angular sweep in 2D).
SmallBallExactResult small_ball_exact(const SmallBallQuery& q);

struct SmallBallMcResult {
    double gamma_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;  // Wilson interval
};

// Monte Carlo estimate; the center-sup is approximated by the histogram mode
// over a beta-grid, a lower bound on the true sup.
SmallBallMcResult small_ball_mc(const SmallBallQuery& q, std::size_t trials,
                                std::uint64_t seed = 1);

struct ForwardGapResult {
    double gamma_hat = 0.0;
    double floor = 0.0;  // c / (|Q| sqrt(n))
    bool above_floor = false;
    std::vector<Complex> coefficients;
};

// Draw coefficients from Q (plus an optional perturbation of radius <= beta),
// then estimate the concentration gamma of the induced linear form.
ForwardGapResult forward_gap_concentration(const GapProgression& q, int n,
                                           const ScalarAtomSpec& atom, double beta,
                                           std::size_t trials, std::uint64_t seed = 1,
                                           double perturb = 0.0, double floor_c = 0.1);

// MC estimate for the bilinear form sum a_ij (x_i+f_i)(x'_j+f'_j).
SmallBallMcResult bilinear_small_ball(const Eigen::MatrixXcd& a, const AtomPairSpec& pair,
                                      const std::vector<Complex>& f,
                                      const std::vector<Complex>& fp, double beta,
                                      std::size_t trials, std::uint64_t seed = 1,
                                      bool auto_normalize = false);

struct DecouplingResult {
    double gamma = 0.0;            // full mixed form, sup over centers
    double gamma_decoupled = 0.0;  // P(|sum A_U(ij) v_i w_j| <= K beta sqrt(log n))
    bool ok = false;               // gamma_decoupled >= c * gamma^4
    bool exact = false;
};

// Statement-level check of the decoupling inequality. U indexes the rows/cols
// kept on one side; exact enumeration is used when the pair support allows it.
DecouplingResult decoupling_check(const Eigen::MatrixXcd& a, const std::vector<int>& u_set,
                                  const AtomPairSpec& pair, const std::vector<Complex>& b,
                                  const std::vector<Complex>& bp, double beta,
                                  std::size_t trials, std::uint64_t seed = 1,
                                  double c = 1e-3, double radius_k = 10.0);

struct DistExperimentResult {
    double failure_rate = 0.0;   // P(dist(R, H) <= 0.5 sqrt(n - d))
    double mean_dist_sq = 0.0;
    double se_dist_sq = 0.0;     // standard error of the mean
    std::size_t trials = 0;
};

// Distance of a random (shifted, mixed-atom) vector to a random d-dimensional
// subspace; coordinate_subspace swaps in span(e_1..e_d) for the exact-mean check.
DistExperimentResult dist_subspace_experiment(int n, int d, const ScalarAtomSpec& atom_a,
                                              const ScalarAtomSpec& atom_b, int split,
                                              const std::vector<Complex>& shift,
                                              std::size_t trials, std::uint64_t seed = 1,
                                              bool coordinate_subspace = false,
                                              double gamma = 0.5);

struct CofactorIdentityResult {
    Complex lhs;        // det M
    Complex rhs;        // m11 det A - v^T adj(A) u
    double defect = 0.0;
    bool exact_zero = false;
};

// det(M) = m11 det(A) - v^T adj(A) u for M = [[m11, v^T], [u, A]], verified in
// exact Gaussian-integer arithmetic over a common dyadic scale.
CofactorIdentityResult cofactor_bilinear_identity(const ComplexMatrix& m);

}  // namespace ell
