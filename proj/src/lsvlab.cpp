#include "elliptic_lab/lsvlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "elliptic_lab/parallel.hpp"
#include "elliptic_lab/spectra.hpp"
#include "elliptic_lab/stats.hpp"

namespace ell {

namespace {

struct ExtremeSigmas {
    double smallest;
    double largest;
    bool ok;
};

std::vector<ExtremeSigmas> collect_sigmas(const EnsembleSpec& spec, std::size_t trials,
                                          int jobs) {
    std::vector<ExtremeSigmas> out(trials, {0.0, 0.0, false});
    parallel_for(
        trials,
        [&](std::size_t t) {
            EnsembleSpec s = spec;
            s.seed = RandomStream(spec.seed).derive(t).next_u64();
            try {
                const ComplexMatrix m = generate(s);
                const std::vector<double> sv = singular_values(m);
                out[t] = {sv.back(), sv.front(), true};
            } catch (const std::exception&) {
                out[t].ok = false;
            }
        },
        jobs);
    return out;
}

}  // namespace

TailReport lsv_tail(const EnsembleSpec& spec, std::vector<double> thresholds,
                    std::size_t trials, int jobs) {
    spec.validate();
    if (trials < 100) throw std::invalid_argument("lsv_tail: need at least 100 trials");
    if (thresholds.empty()) throw std::invalid_argument("lsv_tail: empty threshold list");
    std::sort(thresholds.begin(), thresholds.end());

    const auto sigmas = collect_sigmas(spec, trials, jobs);
    TailReport report;
    report.spec = spec;
    report.trials = trials;
    std::vector<double> smallest;
    smallest.reserve(trials);
    for (const auto& s : sigmas) {
        if (s.ok)
            smallest.push_back(s.smallest);
        else
            ++report.failures;
    }
    const std::size_t good = smallest.size();
    if (good == 0) throw std::runtime_error("lsv_tail: all spectrum computations failed");

    for (double t : thresholds) {
        const std::size_t hits = static_cast<std::size_t>(
            std::count_if(smallest.begin(), smallest.end(), [&](double s) { return s <= t; }));
        const auto [lo, hi] = wilson_interval(hits, good);
        report.points.push_back({t, static_cast<double>(hits) / static_cast<double>(good), lo, hi});
    }

    // Slope of log p over log t where the tail is resolved.
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : report.points)
        if (p.p > 0.0 && p.p < 1.0) pts.emplace_back(std::log(p.t), std::log(p.p));
    if (pts.size() >= 2) {
        double mx = 0, my = 0;
        for (const auto& [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxx = 0, sxy = 0;
        for (const auto& [x, y] : pts) {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if (sxx > 0) report.fitted_exponent = sxy / sxx;
    }
    return report;
}

SingularityRate singularity_rate(const EnsembleSpec& spec, std::size_t trials, int jobs) {
    spec.validate();
    if (!spec.pair.is_finite_support() && spec.pair.kind != PairKind::GaussianReal &&
        spec.pair.kind != PairKind::GaussianComplex)
        throw std::invalid_argument("singularity_rate: unknown atom kind");
    const auto sigmas = collect_sigmas(spec, trials, jobs);
    std::size_t singular = 0, good = 0;
    for (const auto& s : sigmas) {
        if (!s.ok) continue;
        ++good;
        if (s.smallest <= 1e-12 * s.largest) ++singular;
    }
    if (good == 0) throw std::runtime_error("singularity_rate: all spectrum computations failed");
    return {static_cast<double>(singular) / static_cast<double>(good), good};
}

void write_tail_csv(const std::string& path, const TailReport& report) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "t,p,ci_lo,ci_hi\n";
    f.precision(12);
    for (const auto& p : report.points)
        f << p.t << "," << p.p << "," << p.ci_lo << "," << p.ci_hi << "\n";
}

}  // namespace ell
