#include "elliptic_lab/anticonc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

#include "elliptic_lab/exact.hpp"
#include "elliptic_lab/stats.hpp"

namespace ell {

namespace {

constexpr double kBoxCap = 1e7;

struct WeightedValue {
    Complex v;
    double p;
};

}  // namespace

GapProgression GapProgression::symmetric(std::vector<Complex> gens, std::vector<long> dims) {
    GapProgression q;
    q.generators = std::move(gens);
    for (long d : dims) {
        q.lower.push_back(-d);
        q.upper.push_back(d);
    }
    q.validate();
    return q;
}

void GapProgression::validate() const {
    if (generators.size() != lower.size() || generators.size() != upper.size())
        throw std::invalid_argument("gap: generators and dimensions must have equal length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (lower[i] > upper[i])
            throw std::invalid_argument("gap: lower dimension exceeds upper dimension");
}

bool GapProgression::is_symmetric() const {
    if (g0 != Complex(0, 0)) return false;
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (lower[i] != -upper[i]) return false;
    return true;
}

unsigned long long GapProgression::box_cardinality() const {
    unsigned long long card = 1;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        const unsigned long long span =
            static_cast<unsigned long long>(upper[i] - lower[i]) + 1ull;
        if (span != 0 && card > static_cast<unsigned long long>(kBoxCap) * 10ull / span)
            return static_cast<unsigned long long>(kBoxCap) * 10ull;  // saturate
        card *= span;
    }
    return card;
}

namespace {

// Sort lexicographically and merge points within a relative tolerance.
std::vector<Complex> merged_distinct(std::vector<Complex> pts, double rel_tol = 1e-9) {
    double scale = 1.0;
    for (const Complex& p : pts)
        scale = std::max({scale, std::abs(p.real()), std::abs(p.imag())});
    const double tol = rel_tol * scale;
    std::sort(pts.begin(), pts.end(), [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    std::vector<Complex> out;
    for (const Complex& p : pts) {
        bool dup = false;
        // Only nearby trailing points can collide after the sort.
        for (std::size_t k = out.size(); k-- > 0;) {
            if (p.real() - out[k].real() > tol) break;
            if (std::abs(p.imag() - out[k].imag()) <= tol) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(p);
    }
    return out;
}

template <class Visit>
void visit_box(const GapProgression& q, Visit&& visit) {
    const std::size_t r = q.generators.size();
    std::vector<long> k(r);
    for (std::size_t i = 0; i < r; ++i) k[i] = q.lower[i];
    while (true) {
        Complex v = q.g0;
        for (std::size_t i = 0; i < r; ++i) v += static_cast<double>(k[i]) * q.generators[i];
        visit(v);
        std::size_t pos = 0;
        while (pos < r) {
            if (k[pos] < q.upper[pos]) {
                ++k[pos];
                for (std::size_t j = 0; j < pos; ++j) k[j] = q.lower[j];
                break;
            }
            ++pos;
        }
        if (pos == r) break;
        if (r == 0) break;
    }
}

}  // namespace

GapEnumeration gap_enumerate(const GapProgression& q) {
    q.validate();
    const unsigned long long card = q.box_cardinality();
    if (static_cast<double>(card) > kBoxCap)
        throw std::invalid_argument("gap_enumerate: box cardinality exceeds cap");
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(card));
    visit_box(q, [&](Complex v) { pts.push_back(v); });
    GapEnumeration out;
    out.elements = merged_distinct(std::move(pts));
    out.size = out.elements.size();
    out.proper = (out.size == static_cast<std::size_t>(card));
    return out;
}

DeltaCloseResult delta_close(const GapProgression& q, Complex a, double delta) {
    q.validate();
    if (static_cast<double>(q.box_cardinality()) <= kBoxCap) {
        double best = std::abs(a - q.g0);
        visit_box(q, [&](Complex v) { best = std::min(best, std::abs(a - v)); });
        return {best <= delta, true};
    }
    // Heuristic: real least squares for the box coordinates, rounded and clamped.
    const int r = q.rank();
    Eigen::MatrixXd g(2, r);
    for (int i = 0; i < r; ++i) {
        g(0, i) = q.generators[static_cast<std::size_t>(i)].real();
        g(1, i) = q.generators[static_cast<std::size_t>(i)].imag();
    }
    Eigen::Vector2d target(a.real() - q.g0.real(), a.imag() - q.g0.imag());
    const Eigen::VectorXd k = g.colPivHouseholderQr().solve(target);
    Complex v = q.g0;
    for (int i = 0; i < r; ++i) {
        const long ki = std::clamp(static_cast<long>(std::llround(k(i))),
                                   q.lower[static_cast<std::size_t>(i)],
                                   q.upper[static_cast<std::size_t>(i)]);
        v += static_cast<double>(ki) * q.generators[static_cast<std::size_t>(i)];
    }
    return {std::abs(a - v) <= delta, false};
}

void SmallBallQuery::validate() const {
    if (a.empty()) throw std::invalid_argument("small ball: empty coefficient list");
    if (!(beta > 0.0)) throw std::invalid_argument("small ball: beta must be > 0");
    if (scalar_atom.has_value() == pair_atom.has_value())
        throw std::invalid_argument("small ball: exactly one atom law must be set");
    if (b && !pair_atom)
        throw std::invalid_argument("small ball: mixing form requires a pair atom law");
    if (b && b->size() != a.size())
        throw std::invalid_argument("small ball: coefficient lists must have equal length");
    if (shifts_f && shifts_f->size() != a.size())
        throw std::invalid_argument("small ball: shift list length mismatch");
    if (shifts_fp && shifts_fp->size() != a.size())
        throw std::invalid_argument("small ball: shift list length mismatch");
    if (scalar_atom) scalar_atom->validate();
    if (pair_atom) pair_atom->validate();
}

namespace {

// Per-coordinate value options for the (possibly mixing) linear form.
std::vector<std::vector<WeightedValue>> query_options(const SmallBallQuery& q) {
    const std::size_t n = q.a.size();
    std::vector<std::vector<WeightedValue>> options(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex fi = q.shifts_f ? (*q.shifts_f)[i] : Complex(0, 0);
        const Complex fpi = q.shifts_fp ? (*q.shifts_fp)[i] : Complex(0, 0);
        if (q.scalar_atom) {
            if (!q.scalar_atom->is_finite_support())
                throw std::invalid_argument("small_ball_exact: atoms must have finite support");
            for (const auto& s : q.scalar_atom->finite_support())
                options[i].push_back({q.a[i] * (s.value + fi), s.prob});
        } else {
            const auto support = q.pair_atom->finite_support();
            if (support.empty())
                throw std::invalid_argument("small_ball_exact: atoms must have finite support");
            if (q.b) {
                for (const auto& s : support)
                    options[i].push_back(
                        {q.a[i] * (s.xi1 + fi) + (*q.b)[i] * (s.xi2 + fpi), s.prob});
            } else {
                // Marginal of xi1; combine equal xi1 atoms.
                std::map<std::pair<double, double>, double> marg;
                for (const auto& s : support)
                    marg[{s.xi1.real(), s.xi1.imag()}] += s.prob;
                for (const auto& [v, p] : marg)
                    options[i].push_back({q.a[i] * (Complex(v.first, v.second) + fi), p});
            }
        }
    }
    return options;
}

double options_cardinality(const std::vector<std::vector<WeightedValue>>& options) {
    double card = 1.0;
    for (const auto& o : options) card *= static_cast<double>(o.size());
    return card;
}

void enumerate_cloud(const std::vector<std::vector<WeightedValue>>& options,
                     std::vector<WeightedValue>& out) {
    const std::size_t n = options.size();
    std::vector<Complex> partial_sum(n + 1, Complex(0, 0));
    std::vector<double> partial_prob(n + 1, 1.0);
    auto rec = [&](auto&& self, std::size_t d) -> void {
        if (d == n) {
            out.push_back({partial_sum[n], partial_prob[n]});
            return;
        }
        for (const auto& opt : options[d]) {
            partial_sum[d + 1] = partial_sum[d] + opt.v;
            partial_prob[d + 1] = partial_prob[d] * opt.p;
            self(self, d + 1);
        }
    };
    rec(rec, 0);
}

// Collapse near-duplicate values, summing probabilities.
std::vector<WeightedValue> merge_cloud(std::vector<WeightedValue> cloud) {
    double scale = 1.0;
    for (const auto& wv : cloud)
        scale = std::max({scale, std::abs(wv.v.real()), std::abs(wv.v.imag())});
    const double tol = 1e-9 * scale;
    std::sort(cloud.begin(), cloud.end(), [](const WeightedValue& x, const WeightedValue& y) {
        return x.v.real() != y.v.real() ? x.v.real() < y.v.real() : x.v.imag() < y.v.imag();
    });
    std::vector<WeightedValue> out;
    for (const auto& wv : cloud) {
        bool merged = false;
        for (std::size_t k = out.size(); k-- > 0;) {
            if (wv.v.real() - out[k].v.real() > tol) break;
            if (std::abs(wv.v.imag() - out[k].v.imag()) <= tol) {
                out[k].p += wv.p;
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(wv);
    }
    return out;
}

bool cloud_is_real(const std::vector<WeightedValue>& cloud) {
    double scale = 1.0;
    for (const auto& wv : cloud) scale = std::max(scale, std::abs(wv.v));
    for (const auto& wv : cloud)
        if (std::abs(wv.v.imag()) > 1e-12 * scale) return false;
    return true;
}

// Exact max mass of a closed interval of length 2*beta (1D two-pointer).
double max_interval_mass(const std::vector<WeightedValue>& cloud, double beta) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(cloud.size());
    for (const auto& wv : cloud) pts.emplace_back(wv.v.real(), wv.p);
    std::sort(pts.begin(), pts.end());
    double best = 0.0, window = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) window -= pts[i - 1].second;
        if (j < i) {
            j = i;
            window = 0.0;
        }
        while (j < pts.size() && pts[j].first <= pts[i].first + 2.0 * beta) {
            window += pts[j].second;
            ++j;
        }
        best = std::max(best, window);
    }
    return best;
}

// Exact max mass of a closed disk of radius beta: angular sweep anchored at
// each atom (an optimal disk can be translated to touch one).
double max_disk_mass(const std::vector<WeightedValue>& cloud, double beta) {
    double best = 0.0;
    const std::size_t m = cloud.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Complex p = cloud[i].v;
        double base = cloud[i].p;
        // Events: arcs of center angles theta (centers p + beta e^{i theta})
        // for which the neighbor q is also covered.
        std::vector<std::pair<double, double>> events;  // (angle, +/- weight)
        for (std::size_t k = 0; k < m; ++k) {
            if (k == i) continue;
            const double d = std::abs(cloud[k].v - p);
            if (d > 2.0 * beta) continue;
            if (d <= 1e-15) {
                base += cloud[k].p;
                continue;
            }
            const double mid = std::arg(cloud[k].v - p);
            const double half = std::acos(std::min(1.0, d / (2.0 * beta)));
            double lo = mid - half, hi = mid + half;
            auto push = [&](double l, double h, double w) {
                events.emplace_back(l, w);
                events.emplace_back(h, -w);
            };
            if (lo < -M_PI) {
                push(lo + 2.0 * M_PI, M_PI, cloud[k].p);
                push(-M_PI, hi, cloud[k].p);
            } else if (hi > M_PI) {
                push(lo, M_PI, cloud[k].p);
                push(-M_PI, hi - 2.0 * M_PI, cloud[k].p);
            } else {
                push(lo, hi, cloud[k].p);
            }
        }
        std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return a.second > b.second;  // opens before closes: closed disk
        });
        double running = 0.0, peak = 0.0;
        for (const auto& [ang, w] : events) {
            running += w;
            peak = std::max(peak, running);
        }
        best = std::max(best, base + peak);
    }
    return best;
}

constexpr std::size_t kDiskSweepCap = 3000;

SmallBallExactResult cloud_sup_ball(std::vector<WeightedValue> cloud, double beta) {
    cloud = merge_cloud(std::move(cloud));
    SmallBallExactResult out;
    if (cloud_is_real(cloud)) {
        out.gamma = max_interval_mass(cloud, beta);
        return out;
    }
    if (cloud.size() <= kDiskSweepCap) {
        out.gamma = max_disk_mass(cloud, beta);
        return out;
    }
    // 2-approximation: centers restricted to atoms.
    out.sup_exact = false;
    double best = 0.0;
    for (const auto& c : cloud) {
        double mass = 0.0;
        for (const auto& q : cloud)
            if (std::abs(q.v - c.v) <= beta) mass += q.p;
        best = std::max(best, mass);
    }
    out.gamma = best;
    return out;
}

}  // namespace

SmallBallExactResult small_ball_exact(const SmallBallQuery& q) {
    q.validate();
    const auto options = query_options(q);
    if (options_cardinality(options) > kBoxCap)
        throw std::invalid_argument("small_ball_exact: support too large, use small_ball_mc");
    std::vector<WeightedValue> cloud;
    cloud.reserve(static_cast<std::size_t>(options_cardinality(options)));
    enumerate_cloud(options, cloud);
    return cloud_sup_ball(std::move(cloud), q.beta);
}

namespace {

Complex draw_query_value(const SmallBallQuery& q, RandomStream& rng) {
    const std::size_t n = q.a.size();
    Complex sum{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const Complex fi = q.shifts_f ? (*q.shifts_f)[i] : Complex(0, 0);
        if (q.scalar_atom) {
            sum += q.a[i] * (q.scalar_atom->sample(rng) + fi);
        } else {
            const auto [x1, x2] = sample_pair(*q.pair_atom, rng);
            sum += q.a[i] * (x1 + fi);
            if (q.b) {
                const Complex fpi = q.shifts_fp ? (*q.shifts_fp)[i] : Complex(0, 0);
                sum += (*q.b)[i] * (x2 + fpi);
            }
        }
    }
    return sum;
}

// Histogram mode over a beta-grid: a cell fits inside a beta-ball, so the mode
// frequency lower-bounds the center-sup.
SmallBallMcResult histogram_mode_gamma(const std::vector<Complex>& values, double beta) {
    std::map<std::pair<long long, long long>, std::size_t> cells;
    std::size_t mode = 0;
    for (const Complex& v : values) {
        const long long cx = static_cast<long long>(std::floor(v.real() / beta));
        const long long cy = static_cast<long long>(std::floor(v.imag() / beta));
        mode = std::max(mode, ++cells[{cx, cy}]);
    }
    SmallBallMcResult out;
    out.gamma_hat = static_cast<double>(mode) / static_cast<double>(values.size());
    std::tie(out.ci_lo, out.ci_hi) = wilson_interval(mode, values.size());
    return out;
}

}  // namespace

SmallBallMcResult small_ball_mc(const SmallBallQuery& q, std::size_t trials,
                                std::uint64_t seed) {
    q.validate();
    if (trials < 1000)
        throw std::invalid_argument("small_ball_mc: need at least 1e3 trials");
    std::vector<Complex> values(trials);
    RandomStream root(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        RandomStream rng = root.derive(t);
        values[t] = draw_query_value(q, rng);
    }
    return histogram_mode_gamma(values, q.beta);
}

ForwardGapResult forward_gap_concentration(const GapProgression& q, int n,
                                           const ScalarAtomSpec& atom, double beta,
                                           std::size_t trials, std::uint64_t seed,
                                           double perturb, double floor_c) {
    q.validate();
    atom.validate();
    const GapEnumeration en = gap_enumerate(q);
    RandomStream rng = RandomStream(seed).derive(0x6a70);
    ForwardGapResult out;
    out.coefficients.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Complex c = en.elements[rng.index(en.elements.size())];
        if (perturb > 0.0) {
            const double r = perturb * std::sqrt(rng.uniform());
            const double ang = rng.uniform(0.0, 2.0 * M_PI);
            c += std::polar(r, ang);
        }
        out.coefficients.push_back(c);
    }
    SmallBallQuery query;
    query.a = out.coefficients;
    query.scalar_atom = atom;
    query.beta = beta;
    if (atom.is_finite_support() &&
        std::pow(static_cast<double>(atom.finite_support().size()), n) <= kBoxCap) {
        out.gamma_hat = small_ball_exact(query).gamma;
    } else {
        out.gamma_hat = small_ball_mc(query, trials, seed).gamma_hat;
    }
    out.floor = floor_c / (static_cast<double>(en.size) * std::sqrt(static_cast<double>(n)));
    out.above_floor = out.gamma_hat >= out.floor;
    return out;
}

namespace {

Complex bilinear_value(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& x,
                       const Eigen::VectorXcd& xp) {
    return (x.transpose() * a * xp).value();
}

}  // namespace

SmallBallMcResult bilinear_small_ball(const Eigen::MatrixXcd& a, const AtomPairSpec& pair,
                                      const std::vector<Complex>& f,
                                      const std::vector<Complex>& fp, double beta,
                                      std::size_t trials, std::uint64_t seed,
                                      bool auto_normalize) {
    pair.validate();
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("bilinear_small_ball: matrix must be square");
    if (!f.empty() && static_cast<Eigen::Index>(f.size()) != n)
        throw std::invalid_argument("bilinear_small_ball: shift length mismatch");
    if (!fp.empty() && static_cast<Eigen::Index>(fp.size()) != n)
        throw std::invalid_argument("bilinear_small_ball: shift length mismatch");
    Eigen::MatrixXcd coeff = a;
    const double norm = coeff.norm();
    if (std::abs(norm - 1.0) > 1e-9 && norm > 0.0) {
        if (!auto_normalize)
            throw std::invalid_argument(
                "bilinear_small_ball: coefficients must satisfy sum |a_ij|^2 = 1 "
                "(pass auto_normalize)");
        coeff /= norm;
    }
    Eigen::VectorXcd fv = Eigen::VectorXcd::Zero(n), fpv = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < n && !f.empty(); ++i) fv(i) = f[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < n && !fp.empty(); ++i) fpv(i) = fp[static_cast<std::size_t>(i)];

    std::vector<Complex> values(trials);
    RandomStream root(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        RandomStream rng = root.derive(t);
        Eigen::VectorXcd x(n), xp(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto [x1, x2] = sample_pair(pair, rng);
            x(i) = x1 + fv(i);
            xp(i) = x2 + fpv(i);
        }
        values[t] = bilinear_value(coeff, x, xp);
    }
    return histogram_mode_gamma(values, beta);
}

namespace {

// Enumerate assignments of per-coordinate (x_i, x'_i) options, maintaining the
// bilinear value incrementally; visit(value, prob) at every leaf.
struct PairOption {
    Complex x, xp;
    double p;
};

// Enumerate per-coordinate (x_i, x'_i) assignments, maintaining the bilinear
// value through per-depth partial row/column dots (no undo, no drift chain).
template <class Visit>
void enumerate_bilinear(const Eigen::MatrixXcd& a,
                        const std::vector<std::vector<PairOption>>& options,
                        const Eigen::VectorXcd& b, const Eigen::VectorXcd& bp, Visit&& visit) {
    const int n = static_cast<int>(options.size());
    std::vector<Complex> value_at(static_cast<std::size_t>(n) + 1, Complex(0, 0));
    std::vector<double> prob_at(static_cast<std::size_t>(n) + 1, 1.0);
    // row_at[d](k) = sum_{j < d} a(k, j) x'_j ; col_at[d](k) = sum_{i < d} a(i, k) x_i
    std::vector<Eigen::VectorXcd> row_at(static_cast<std::size_t>(n) + 1,
                                         Eigen::VectorXcd::Zero(n));
    std::vector<Eigen::VectorXcd> col_at(static_cast<std::size_t>(n) + 1,
                                         Eigen::VectorXcd::Zero(n));
    auto rec = [&](auto&& self, int d) -> void {
        if (d == n) {
            visit(value_at[static_cast<std::size_t>(n)], prob_at[static_cast<std::size_t>(n)]);
            return;
        }
        const std::size_t du = static_cast<std::size_t>(d);
        for (const PairOption& o : options[du]) {
            value_at[du + 1] = value_at[du] + o.x * row_at[du](d) + o.xp * col_at[du](d) +
                               a(d, d) * o.x * o.xp + b(d) * o.x + bp(d) * o.xp;
            prob_at[du + 1] = prob_at[du] * o.p;
            row_at[du + 1] = row_at[du] + a.col(d) * o.xp;
            col_at[du + 1] = col_at[du] + a.row(d).transpose() * o.x;
            self(self, d + 1);
        }
    };
    rec(rec, 0);
}

std::vector<PairOption> difference_pair_options(const AtomPairSpec& pair) {
    const auto sup = pair.finite_support();
    std::map<std::pair<std::pair<double, double>, std::pair<double, double>>, double> merged;
    for (const auto& s : sup)
        for (const auto& t : sup) {
            const Complex v = s.xi1 - t.xi1, w = s.xi2 - t.xi2;
            merged[{{v.real(), v.imag()}, {w.real(), w.imag()}}] += s.prob * t.prob;
        }
    std::vector<PairOption> out;
    for (const auto& [key, p] : merged)
        out.push_back({Complex(key.first.first, key.first.second),
                       Complex(key.second.first, key.second.second), p});
    return out;
}

Eigen::MatrixXcd masked_decoupled(const Eigen::MatrixXcd& a, const std::vector<bool>& in_u) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXcd au = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool iu = in_u[static_cast<std::size_t>(i)];
            const bool ju = in_u[static_cast<std::size_t>(j)];
            if (iu != ju) au(i, j) = a(i, j);
        }
    return au;
}

}  // namespace

DecouplingResult decoupling_check(const Eigen::MatrixXcd& a, const std::vector<int>& u_set,
                                  const AtomPairSpec& pair, const std::vector<Complex>& b,
                                  const std::vector<Complex>& bp, double beta,
                                  std::size_t trials, std::uint64_t seed, double c,
                                  double radius_k) {
    pair.validate();
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n) throw std::invalid_argument("decoupling_check: matrix must be square");
    std::vector<bool> in_u(static_cast<std::size_t>(n), false);
    for (int i : u_set) {
        if (i < 0 || i >= n) throw std::invalid_argument("decoupling_check: U index out of range");
        in_u[static_cast<std::size_t>(i)] = true;
    }
    const std::size_t u_count = static_cast<std::size_t>(std::count(in_u.begin(), in_u.end(), true));
    if (u_count == 0 || u_count == static_cast<std::size_t>(n))
        throw std::invalid_argument("decoupling_check: U and its complement must be nonempty");

    Eigen::VectorXcd bv = Eigen::VectorXcd::Zero(n), bpv = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n && !b.empty(); ++i) bv(i) = b[static_cast<std::size_t>(i)];
    for (int i = 0; i < n && !bp.empty(); ++i) bpv(i) = bp[static_cast<std::size_t>(i)];

    const Eigen::MatrixXcd au = masked_decoupled(a, in_u);
    const double radius = radius_k * beta * std::sqrt(std::log(std::max(2.0, double(n))));

    DecouplingResult out;
    const auto support = pair.finite_support();
    const bool exact_full =
        !support.empty() && std::pow(double(support.size()), n) <= 2e6;
    const auto diff_options = support.empty() ? std::vector<PairOption>{}
                                              : difference_pair_options(pair);
    const bool exact_dec =
        !diff_options.empty() && std::pow(double(diff_options.size()), n) <= 6e7;

    if (exact_full && exact_dec) {
        out.exact = true;
        // Full mixed form: collect the value cloud, exact sup-ball.
        std::vector<std::vector<PairOption>> full_opts(
            static_cast<std::size_t>(n),
            [&] {
                std::vector<PairOption> o;
                for (const auto& s : support) o.push_back({s.xi1, s.xi2, s.prob});
                return o;
            }());
        std::vector<WeightedValue> cloud;
        enumerate_bilinear(a, full_opts, bv, bpv,
                           [&](Complex v, double p) { cloud.push_back({v, p}); });
        out.gamma = cloud_sup_ball(std::move(cloud), beta).gamma;
        // Decoupled form in differenced variables: count mass near zero.
        std::vector<std::vector<PairOption>> dec_opts(static_cast<std::size_t>(n), diff_options);
        double mass = 0.0;
        enumerate_bilinear(au, dec_opts, Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(n),
                           [&](Complex v, double p) {
                               if (std::abs(v) <= radius) mass += p;
                           });
        out.gamma_decoupled = mass;
    } else {
        RandomStream root(seed);
        std::vector<Complex> full_values(trials);
        std::size_t dec_hits = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            RandomStream rng = root.derive(t);
            Eigen::VectorXcd x(n), xp(n), v(n), w(n);
            for (int i = 0; i < n; ++i) {
                const auto [x1, x2] = sample_pair(pair, rng);
                x(i) = x1;
                xp(i) = x2;
            }
            // (v_i, w_i) i.i.d. copies of (xi1 - xi1', xi2 - xi2').
            for (int i = 0; i < n; ++i) {
                const auto [y1, y2] = sample_pair(pair, rng);
                v(i) = x(i) - y1;
                w(i) = xp(i) - y2;
            }
            full_values[t] = (x.transpose() * a * xp).value() + (bv.transpose() * x).value() +
                             (bpv.transpose() * xp).value();
            const Complex dec = (v.transpose() * au * w).value();
            if (std::abs(dec) <= radius) ++dec_hits;
        }
        out.gamma = histogram_mode_gamma(full_values, beta).gamma_hat;
        out.gamma_decoupled = static_cast<double>(dec_hits) / static_cast<double>(trials);
    }
    out.ok = out.gamma_decoupled >= c * std::pow(out.gamma, 4.0);
    return out;
}

DistExperimentResult dist_subspace_experiment(int n, int d, const ScalarAtomSpec& atom_a,
                                              const ScalarAtomSpec& atom_b, int split,
                                              const std::vector<Complex>& shift,
                                              std::size_t trials, std::uint64_t seed,
                                              bool coordinate_subspace, double gamma) {
    atom_a.validate();
    atom_b.validate();
    if (n < 2) throw std::invalid_argument("dist_subspace_experiment: n must be >= 2");
    const double dim_cap = static_cast<double>(n) - std::pow(static_cast<double>(n), 1.0 - gamma);
    if (d < 1 || static_cast<double>(d) > dim_cap)
        throw std::invalid_argument(
            "dist_subspace_experiment: need 1 <= d <= n - n^{1-gamma}");
    if (!shift.empty() && static_cast<int>(shift.size()) != n)
        throw std::invalid_argument("dist_subspace_experiment: shift length mismatch");
    if (split < 0 || split > n)
        throw std::invalid_argument("dist_subspace_experiment: split out of range");

    const double threshold = 0.5 * std::sqrt(static_cast<double>(n - d));
    std::size_t failures = 0;
    double sum_d2 = 0.0, sum_d4 = 0.0;
    RandomStream root(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        RandomStream rng = root.derive(t);
        Eigen::VectorXcd r(n);
        for (int i = 0; i < n; ++i) {
            const ScalarAtomSpec& law = (i < split) ? atom_a : atom_b;
            r(i) = law.sample(rng);
            if (!shift.empty()) r(i) += shift[static_cast<std::size_t>(i)];
        }
        double dist2;
        if (coordinate_subspace) {
            dist2 = 0.0;
            for (int i = d; i < n; ++i) dist2 += std::norm(r(i));
        } else {
            Eigen::MatrixXcd g(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j)
                    g(i, j) = Complex(rng.gaussian(), rng.gaussian()) / std::sqrt(2.0);
            const Eigen::MatrixXcd qmat = Eigen::HouseholderQR<Eigen::MatrixXcd>(g)
                                              .householderQ() *
                                          Eigen::MatrixXcd::Identity(n, d);
            const Eigen::VectorXcd resid = r - qmat * (qmat.adjoint() * r);
            dist2 = resid.squaredNorm();
        }
        sum_d2 += dist2;
        sum_d4 += dist2 * dist2;
        if (std::sqrt(dist2) <= threshold) ++failures;
    }
    DistExperimentResult out;
    out.trials = trials;
    out.failure_rate = static_cast<double>(failures) / static_cast<double>(trials);
    out.mean_dist_sq = sum_d2 / static_cast<double>(trials);
    const double var = std::max(0.0, sum_d4 / static_cast<double>(trials) -
                                         out.mean_dist_sq * out.mean_dist_sq);
    out.se_dist_sq = std::sqrt(var / static_cast<double>(trials));
    return out;
}

CofactorIdentityResult cofactor_bilinear_identity(const ComplexMatrix& m) {
    const int n = static_cast<int>(m.rows());
    if (n < 2 || m.cols() != n)
        throw std::invalid_argument("cofactor_bilinear_identity: need square n >= 2");
    if (n > 12)
        throw std::invalid_argument("cofactor_bilinear_identity: n <= 12 for exact minors");

    std::vector<Complex> entries;
    entries.reserve(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) entries.push_back(m(i, j));
    const int shift = exact::common_dyadic_shift(entries);

    exact::GaussMat mg(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        mg[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            mg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = exact::GaussInt(
                exact::BigInt::from_scaled_double(m(i, j).real(), shift),
                exact::BigInt::from_scaled_double(m(i, j).imag(), shift));
    }

    const exact::GaussInt lhs = exact::det(mg);
    const exact::GaussMat ag = exact::minor_of(mg, 0, 0);
    const exact::GaussInt det_a = exact::det(ag);

    // v^T adj(A) u with adj(A)_{ij} = (-1)^{i+j} det(minor(A; j, i)).
    exact::GaussInt bilinear(0, 0);
    const int k = n - 1;
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            exact::GaussInt adj_ij = exact::det(exact::minor_of(ag, j, i));
            if ((i + j) % 2 != 0) adj_ij = -adj_ij;
            // v_i = m(0, i+1), u_j = m(j+1, 0) in scaled units.
            const exact::GaussInt vi = mg[0][static_cast<std::size_t>(i + 1)];
            const exact::GaussInt uj = mg[static_cast<std::size_t>(j + 1)][0];
            bilinear = bilinear + vi * adj_ij * uj;
        }
    }
    // Scale: lhs ~ 2^{n K}; m11 det(A) ~ 2^{n K}; v adj(A) u ~ 2^{K + (n-2)K + K}.
    const exact::GaussInt rhs = mg[0][0] * det_a - bilinear;
    const exact::GaussInt defect = lhs - rhs;

    CofactorIdentityResult out;
    const double unscale = std::ldexp(1.0, -shift * n);
    const auto lc = lhs.to_complex();
    const auto rc = rhs.to_complex();
    out.lhs = Complex(lc.real() * unscale, lc.imag() * unscale);
    out.rhs = Complex(rc.real() * unscale, rc.imag() * unscale);
    const auto dc = defect.to_complex();
    out.defect = std::abs(Complex(dc.real() * unscale, dc.imag() * unscale));
    out.exact_zero = defect.is_zero();
    return out;
}

}  // namespace ell
