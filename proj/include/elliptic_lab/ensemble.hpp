#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>
#include "json.hpp"

#include "elliptic_lab/atoms.hpp"

namespace ell {

// Dense complex n x n matrix, the working representation everywhere.
using ComplexMatrix = Eigen::MatrixXcd;

enum class PerturbKind { Zero, LowRank, EntryBounded };

// Deterministic perturbation F_n. LowRank builds magnitude * n * sum_k u_k v_k^*
// with orthonormal factors, so (1/n^2)||F||_2^2 = magnitude^2 * rank; EntryBounded
// fills entries from [-n^alpha, n^alpha]. Both are fixed functions of (spec, n).
struct PerturbationSpec {
    PerturbKind kind = PerturbKind::Zero;
    int rank = 1;            // LowRank
    double magnitude = 1.0;  // LowRank factor scale
    double alpha = 0.5;      // EntryBounded exponent

    static PerturbationSpec zero() { return {}; }
    static PerturbationSpec low_rank(int rank, double magnitude = 1.0);
    static PerturbationSpec entry_bounded(double alpha);
    void validate() const;
};

// Condition-C0 recipe: i.i.d. diagonal, transpose-pairs (x_ij, x_ji) i.i.d.
// copies of the atom pair, everything independent across cells.
struct EnsembleSpec {
    int n = 1;
    AtomPairSpec pair;
    ScalarAtomSpec diagonal;
    PerturbationSpec perturbation;
    std::uint64_t seed = 0;

    static EnsembleSpec make(int n, AtomPairSpec pair, std::uint64_t seed,
                             PerturbationSpec perturbation = PerturbationSpec::zero());
    void validate() const;
    EnsembleSpec with_seed(std::uint64_t s) const {
        EnsembleSpec c = *this;
        c.seed = s;
        return c;
    }
};

// Diagonal law matching the pair's flavor: standardized real part of xi1.
ScalarAtomSpec default_diagonal(const AtomPairSpec& pair);

// One draw of M_n = F_n + X_n. Deterministic given spec.seed; cells are keyed
// by (seed, i, j) so generation order is irrelevant.
ComplexMatrix generate(const EnsembleSpec& spec);

// F_n alone (no randomness from the trial seed).
ComplexMatrix build_perturbation(const PerturbationSpec& spec, int n);

// Hilbert-Schmidt norm sqrt(sum |a_ij|^2) = sqrt(tr A^* A).
double hs_norm(const ComplexMatrix& a);

// Truncate-and-standardize per the Hermitization truncation step: zero the
// diagonal, replace off-diagonal x by (x 1_{|x|<=n^delta} - m)/s with m, s the
// truncated mean/sd of the entry's marginal law.
ComplexMatrix truncate_standardize(const ComplexMatrix& a, const AtomPairSpec& pair,
                                   double delta);

// Truncated mean and sd of one marginal (exact for finite support, adaptive
// quadrature for Gaussian marginals); results cached per (law, threshold).
struct TruncatedMoments {
    Complex mean;
    double sd;
};
TruncatedMoments truncated_moments(const AtomPairSpec& pair, int which, double threshold);

// Binary matrix file: header (magic, version, layout, n) then row-major
// little-endian f64 (re, im) pairs; JSON sidecar <path>.json with the spec.
void save_matrix(const std::string& path, const ComplexMatrix& a);
void save_matrix(const std::string& path, const ComplexMatrix& a, const EnsembleSpec& spec);
ComplexMatrix load_matrix(const std::string& path);

void to_json(nlohmann::json& j, const PerturbationSpec& spec);
void from_json(const nlohmann::json& j, PerturbationSpec& spec);
void to_json(nlohmann::json& j, const EnsembleSpec& spec);
void from_json(const nlohmann::json& j, EnsembleSpec& spec);

}  // namespace ell
