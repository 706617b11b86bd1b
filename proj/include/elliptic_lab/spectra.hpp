#pragma once

#include <string>
#include <vector>

#include "elliptic_lab/ensemble.hpp"

namespace ell {

// Weighted point measure on C, weight 1/n each.
struct EmpiricalMeasure2D {
    std::vector<Complex> points;
};

// Point measure on R, points sorted ascending, weight 1/n each.
struct EmpiricalMeasure1D {
    std::vector<double> points;
};

struct SpectralData {
    std::vector<Complex> eigenvalues;        // length n
    std::vector<double> singular_values;     // sorted descending
};

// All n eigenvalues via dense Schur (real path for exactly-real input).
// Backward stable: each lambda is exact for A+E with ||E|| <= c n u ||A||.
std::vector<Complex> eigenvalues(const ComplexMatrix& a);

// Full singular spectrum, sorted descending, via bidiagonalization-based SVD.
std::vector<double> singular_values(const ComplexMatrix& a);

SpectralData compute_spectral_data(const ComplexMatrix& a);

// ESD value: fraction of eigenvalues with Re <= x and Im <= y.
double esd_eval(const std::vector<Complex>& eigs, double x, double y);

// Eigenvalue measure of A/sqrt(n) and singular-value measure of A/sqrt(n) - zI.
std::pair<EmpiricalMeasure2D, EmpiricalMeasure1D> scaled_measures(const ComplexMatrix& a,
                                                                  Complex z);

EmpiricalMeasure2D eigen_measure(const ComplexMatrix& a_scaled);
EmpiricalMeasure1D singular_measure(const ComplexMatrix& a_scaled);

// CSV export: "re,im" rows for eigenvalues, "sigma" rows for singular values.
void write_eigenvalues_csv(const std::string& path, const std::vector<Complex>& eigs);
void write_singular_values_csv(const std::string& path, const std::vector<double>& sv);

}  // namespace ell
