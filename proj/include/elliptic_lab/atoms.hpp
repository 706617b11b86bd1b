#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "elliptic_lab/rng.hpp"

namespace ell {

using Complex = std::complex<double>;

// One atom of a finite-support pair law: the value (xi1, xi2) and its probability.
struct PairAtom {
    Complex xi1;
    Complex xi2;
    double prob;
};

enum class PairKind { GaussianReal, GaussianComplex, DiscreteMix, CustomFinite };

// Distribution over C^2 realizing a (mu,rho)-family member: mean zero, unit
// variance, E(Re xi_i)^2 = mu, E(Im xi_i)^2 = 1-mu, E[Re xi1 Re xi2] = mu*rho,
// E[Im xi1 Im xi2] = -(1-mu)*rho, mixed Re/Im moments zero.
struct AtomPairSpec {
    PairKind kind = PairKind::GaussianReal;
    double mu = 1.0;
    double rho = 0.0;
    // DiscreteMix: xi1 = c1*psi1 + c1p*psi2, xi2 = c2*psi1 + c2p*psi2 with psi_i
    // i.i.d. Bernoulli +-1; stored as (c1, c1p, c2, c2p).
    std::optional<std::array<double, 4>> mix_coeffs;
    std::vector<PairAtom> support;  // CustomFinite only

    static AtomPairSpec gaussian_real(double rho);
    static AtomPairSpec gaussian_complex(double mu, double rho);
    // Default coefficients (1, 0, rho, sqrt(1-rho^2)): minimal-support exact
    // (1,rho)-family member.
    static AtomPairSpec discrete_mix(double rho);
    static AtomPairSpec discrete_mix(double rho, const std::array<double, 4>& coeffs);
    static AtomPairSpec custom_finite(double mu, double rho, std::vector<PairAtom> support);

    void validate() const;  // throws std::invalid_argument
    bool is_finite_support() const {
        return kind == PairKind::DiscreteMix || kind == PairKind::CustomFinite;
    }
    // Expanded support with probabilities; empty for Gaussian kinds.
    std::vector<PairAtom> finite_support() const;
};

// One draw (xi1, xi2).
std::pair<Complex, Complex> sample_pair(const AtomPairSpec& spec, RandomStream& rng);

// Exact 4x4 covariance of (Re xi1, Im xi1, Re xi2, Im xi2). Analytic for
// Gaussian kinds, exact finite sum otherwise.
Eigen::Matrix4d pair_covariance(const AtomPairSpec& spec);

// Exact mixed moment E[Re(xi1)^i Im(xi1)^j Re(xi2)^l Im(xi2)^m]. Finite kinds
// by enumeration; Gaussian kinds by Wick pairing over the covariance.
double pair_moment(const AtomPairSpec& spec, int i, int j, int l, int m);

// Axis-aligned rectangle in the ratio plane omega1/omega2.
struct RatioRect {
    double re_lo = 0, re_hi = 0, im_lo = 0, im_hi = 0;
};

// Empirical witness for the two-region ratio-separation property of the
// difference pair (omega1, omega2) = ((xi1-xi1')/2, (xi2-xi2')/2).
struct SeparationWitness {
    bool found = false;
    double delta = 0.0;  // min P((omega1,omega2) in R_i)
    double alpha = 0.0;  // ratio separation between the two regions
    double c0 = 0.0, C0 = 0.0;  // annulus bounds c0 < |omega_i| < C0
    RatioRect region1, region2;
};

SeparationWitness separation_witness(const AtomPairSpec& spec, std::size_t trials,
                                     std::uint64_t seed = 1, int grid_k = 12,
                                     double delta_floor = 0.01);

// Same law retargeted to a new rho (Gaussian kinds and default DiscreteMix).
AtomPairSpec with_rho(const AtomPairSpec& spec, double rho);

enum class ScalarKind { Bernoulli, ModifiedBernoulli, GaussianReal, CustomFinite };

struct ScalarAtom {
    Complex value;
    double prob;
};

// Scalar atom law for diagonal entries and linear-form coefficients.
struct ScalarAtomSpec {
    ScalarKind kind = ScalarKind::Bernoulli;
    double mu = 1.0;  // ModifiedBernoulli: +-1 w.p. mu/2 each, 0 w.p. 1-mu
    std::vector<ScalarAtom> support;  // CustomFinite only

    static ScalarAtomSpec bernoulli() { return {ScalarKind::Bernoulli, 1.0, {}}; }
    static ScalarAtomSpec modified_bernoulli(double mu);
    static ScalarAtomSpec gaussian_real() { return {ScalarKind::GaussianReal, 1.0, {}}; }
    static ScalarAtomSpec custom_finite(std::vector<ScalarAtom> support);

    void validate() const;
    bool is_finite_support() const { return kind != ScalarKind::GaussianReal; }
    std::vector<ScalarAtom> finite_support() const;
    Complex mean() const;
    double variance() const;  // E|x - Ex|^2
    Complex sample(RandomStream& rng) const;
};

void to_json(nlohmann::json& j, const AtomPairSpec& spec);
void from_json(const nlohmann::json& j, AtomPairSpec& spec);
void to_json(nlohmann::json& j, const ScalarAtomSpec& spec);
void from_json(const nlohmann::json& j, ScalarAtomSpec& spec);

}  // namespace ell
