#pragma once

#include <optional>
#include <vector>

#include "elliptic_lab/ensemble.hpp"

namespace ell {

struct TailPoint {
    double t;
    double p;      // empirical P(sigma_n(M_n) <= t)
    double ci_lo;  // Wilson interval
    double ci_hi;
};

struct TailReport {
    EnsembleSpec spec;
    std::vector<TailPoint> points;            // thresholds ascending
    std::optional<double> fitted_exponent;    // slope of log p vs log t
    std::size_t trials = 0;
    std::size_t failures = 0;                 // spectrum computations that threw
};

// Least-singular-value tail experiment: per trial generate M_n = F_n + X_n,
// compute sigma_n, tabulate P(sigma_n <= t) over the thresholds.
TailReport lsv_tail(const EnsembleSpec& spec, std::vector<double> thresholds,
                    std::size_t trials, int jobs = 0);

struct SingularityRate {
    double rate;        // fraction of trials with sigma_n <= 1e-12 sigma_1
    std::size_t trials;
};

// Exact/near singularity frequency for discrete-atom ensembles.
SingularityRate singularity_rate(const EnsembleSpec& spec, std::size_t trials, int jobs = 0);

// CSV: "t,p,ci_lo,ci_hi" rows.
void write_tail_csv(const std::string& path, const TailReport& report);

}  // namespace ell
