#include "elliptic_lab/ensemble.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include <Eigen/QR>
#include "json.hpp"

#include "elliptic_lab/quadrature.hpp"

namespace ell {

PerturbationSpec PerturbationSpec::low_rank(int rank, double magnitude) {
    PerturbationSpec s;
    s.kind = PerturbKind::LowRank;
    s.rank = rank;
    s.magnitude = magnitude;
    s.validate();
    return s;
}

PerturbationSpec PerturbationSpec::entry_bounded(double alpha) {
    PerturbationSpec s;
    s.kind = PerturbKind::EntryBounded;
    s.alpha = alpha;
    s.validate();
    return s;
}

void PerturbationSpec::validate() const {
    if (kind == PerturbKind::LowRank && rank < 1)
        throw std::invalid_argument("perturbation: rank must be >= 1");
    if (kind == PerturbKind::EntryBounded && !(alpha >= 0))
        throw std::invalid_argument("perturbation: alpha must be >= 0");
}

EnsembleSpec EnsembleSpec::make(int n, AtomPairSpec pair, std::uint64_t seed,
                                PerturbationSpec perturbation) {
    EnsembleSpec s;
    s.n = n;
    s.diagonal = default_diagonal(pair);
    s.pair = std::move(pair);
    s.perturbation = perturbation;
    s.seed = seed;
    s.validate();
    return s;
}

void EnsembleSpec::validate() const {
    if (n < 1) throw std::invalid_argument("ensemble: n must be >= 1");
    pair.validate();
    diagonal.validate();
    perturbation.validate();
    if (std::abs(diagonal.mean()) > 1e-12)
        throw std::invalid_argument("ensemble: diagonal law must have mean zero");
}

ScalarAtomSpec default_diagonal(const AtomPairSpec& pair) {
    switch (pair.kind) {
        case PairKind::GaussianReal:
        case PairKind::GaussianComplex:
            return ScalarAtomSpec::gaussian_real();
        case PairKind::DiscreteMix:
            return ScalarAtomSpec::bernoulli();
        case PairKind::CustomFinite: {
            // Standardized real part of xi1 when nondegenerate.
            std::map<double, double> mass;
            for (const auto& a : pair.finite_support()) mass[a.xi1.real()] += a.prob;
            double mean = 0.0;
            for (auto& [v, p] : mass) mean += v * p;
            double var = 0.0;
            for (auto& [v, p] : mass) var += p * (v - mean) * (v - mean);
            if (var <= 1e-12) return ScalarAtomSpec::bernoulli();
            std::vector<ScalarAtom> sup;
            for (auto& [v, p] : mass)
                sup.push_back({Complex((v - mean) / std::sqrt(var), 0.0), p});
            return ScalarAtomSpec::custom_finite(std::move(sup));
        }
    }
    return ScalarAtomSpec::bernoulli();
}

ComplexMatrix build_perturbation(const PerturbationSpec& spec, int n) {
    spec.validate();
    switch (spec.kind) {
        case PerturbKind::Zero:
            return ComplexMatrix::Zero(n, n);
        case PerturbKind::LowRank: {
            // Fixed key: F depends on (spec, n) only, never on the trial seed.
            RandomStream rng = RandomStream(0x70657274ull).derive(static_cast<std::uint64_t>(n));
            const int r = std::min(spec.rank, n);
            Eigen::MatrixXcd u(n, r), v(n, r);
            for (int k = 0; k < r; ++k)
                for (int i = 0; i < n; ++i) {
                    u(i, k) = Complex(rng.gaussian(), 0.0);
                    v(i, k) = Complex(rng.gaussian(), 0.0);
                }
            const Eigen::MatrixXcd qu = Eigen::HouseholderQR<Eigen::MatrixXcd>(u)
                                            .householderQ() *
                                        Eigen::MatrixXcd::Identity(n, r);
            const Eigen::MatrixXcd qv = Eigen::HouseholderQR<Eigen::MatrixXcd>(v)
                                            .householderQ() *
                                        Eigen::MatrixXcd::Identity(n, r);
            return spec.magnitude * static_cast<double>(n) * qu * qv.adjoint();
        }
        case PerturbKind::EntryBounded: {
            RandomStream rng = RandomStream(0x70657262ull).derive(static_cast<std::uint64_t>(n));
            const double bound = std::pow(static_cast<double>(n), spec.alpha);
            ComplexMatrix f(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) f(i, j) = Complex(rng.uniform(-bound, bound), 0.0);
            return f;
        }
    }
    throw std::logic_error("unreachable perturbation kind");
}

ComplexMatrix generate(const EnsembleSpec& spec) {
    spec.validate();
    const int n = spec.n;
    ComplexMatrix x(n, n);
    const RandomStream root(spec.seed);
    for (int i = 0; i < n; ++i) {
        RandomStream diag = root.derive(static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(i));
        x(i, i) = spec.diagonal.sample(diag);
        for (int j = i + 1; j < n; ++j) {
            RandomStream cell = root.derive(static_cast<std::uint64_t>(i),
                                            static_cast<std::uint64_t>(j));
            auto [xi1, xi2] = sample_pair(spec.pair, cell);
            x(i, j) = xi1;
            x(j, i) = xi2;
        }
    }
    if (spec.perturbation.kind != PerturbKind::Zero)
        x += build_perturbation(spec.perturbation, n);
    return x;
}

double hs_norm(const ComplexMatrix& a) { return a.norm(); }

namespace {

// Truncated mean/second-moment of one marginal law. Gaussian marginal of a
// (mu,rho)-family member has independent N(0,mu) and N(0,1-mu) parts.
TruncatedMoments compute_truncated(const AtomPairSpec& pair, int which, double threshold) {
    if (pair.is_finite_support()) {
        Complex mean{0, 0};
        double m2 = 0.0, kept = 0.0;
        for (const auto& a : pair.finite_support()) {
            const Complex v = (which == 0) ? a.xi1 : a.xi2;
            if (std::abs(v) <= threshold) {
                mean += a.prob * v;
                m2 += a.prob * std::norm(v);
                kept += a.prob;
            }
        }
        (void)kept;
        const double var = m2 - std::norm(mean);
        return {mean, std::sqrt(std::max(0.0, var))};
    }
    // Symmetric law: truncated mean is exactly zero.
    const double mu = pair.mu;
    const double s1 = std::sqrt(mu), s2 = std::sqrt(1.0 - mu);
    auto gauss = [](double x, double s) {
        return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * M_PI));
    };
    double m2;
    if (s2 == 0.0 || s1 == 0.0) {
        const double s = (s2 == 0.0) ? s1 : s2;
        const double lim = std::min(threshold, 10.0 * s);
        m2 = adaptive_simpson([&](double x) { return x * x * gauss(x, s); }, -lim, lim, 1e-12);
    } else {
        // E[(u^2+v^2) 1_{u^2+v^2 <= T^2}]: outer quadrature over u, inner moments
        // of v over |v| <= sqrt(T^2-u^2) in closed form.
        auto inner = [&](double u) {
            const double b = std::sqrt(std::max(0.0, threshold * threshold - u * u));
            const double zb = b / (s2 * std::sqrt(2.0));
            const double mass = std::erf(zb);
            const double second =
                s2 * s2 * (std::erf(zb) - b * std::sqrt(2.0 / M_PI) / s2 *
                                              std::exp(-0.5 * b * b / (s2 * s2)));
            return gauss(u, s1) * (u * u * mass + second);
        };
        const double lim = std::min(threshold, 10.0 * s1);
        m2 = adaptive_simpson(inner, -lim, lim, 1e-12);
    }
    return {Complex(0, 0), std::sqrt(std::max(0.0, m2))};
}

}  // namespace

TruncatedMoments truncated_moments(const AtomPairSpec& pair, int which, double threshold) {
    struct Key {
        double mu, rho, thr;
        int kind, which;
        bool operator<(const Key& o) const {
            return std::tie(mu, rho, thr, kind, which) <
                   std::tie(o.mu, o.rho, o.thr, o.kind, o.which);
        }
    };
    static std::map<Key, TruncatedMoments> cache;
    static std::mutex mtx;
    if (pair.kind == PairKind::GaussianReal || pair.kind == PairKind::GaussianComplex) {
        const Key key{pair.mu, pair.rho, threshold, static_cast<int>(pair.kind), which};
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const TruncatedMoments tm = compute_truncated(pair, which, threshold);
        cache.emplace(key, tm);
        return tm;
    }
    return compute_truncated(pair, which, threshold);
}

ComplexMatrix truncate_standardize(const ComplexMatrix& a, const AtomPairSpec& pair,
                                   double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("truncate_standardize: delta must lie in (0, 1/2)");
    const int n = static_cast<int>(a.rows());
    const double threshold = std::pow(static_cast<double>(n), delta);
    const TruncatedMoments t1 = truncated_moments(pair, 0, threshold);
    const TruncatedMoments t2 = truncated_moments(pair, 1, threshold);
    if (t1.sd <= 0.0 || t2.sd <= 0.0)
        throw std::runtime_error("truncate_standardize: degenerate truncated law (sd = 0)");
    ComplexMatrix out(n, n);
    for (int i = 0; i < n; ++i) {
        out(i, i) = Complex(0, 0);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const TruncatedMoments& t = (i < j) ? t1 : t2;
            const Complex x = a(i, j);
            const Complex kept = (std::abs(x) <= threshold) ? x : Complex(0, 0);
            out(i, j) = (kept - t.mean) / t.sd;
        }
    }
    return out;
}

namespace {

constexpr char kMagic[8] = {'E', 'L', 'A', 'B', 'M', 'A', 'T', '1'};

}  // namespace

void save_matrix(const std::string& path, const ComplexMatrix& a) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(kMagic, 8);
    const std::uint32_t version = 1, layout = 0;  // 0 = row-major (re, im) pairs
    const std::uint64_t n = static_cast<std::uint64_t>(a.rows());
    f.write(reinterpret_cast<const char*>(&version), 4);
    f.write(reinterpret_cast<const char*>(&layout), 4);
    f.write(reinterpret_cast<const char*>(&n), 8);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double re = a(i, j).real(), im = a(i, j).imag();
            f.write(reinterpret_cast<const char*>(&re), 8);
            f.write(reinterpret_cast<const char*>(&im), 8);
        }
    if (!f) throw std::runtime_error("write failed: " + path);
}

void save_matrix(const std::string& path, const ComplexMatrix& a, const EnsembleSpec& spec) {
    save_matrix(path, a);
    nlohmann::json j = spec;
    std::ofstream side(path + ".json");
    side << j.dump(2) << "\n";
}

ComplexMatrix load_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    f.read(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a matrix file: " + path);
    std::uint32_t version = 0, layout = 0;
    std::uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&layout), 4);
    f.read(reinterpret_cast<char*>(&n), 8);
    if (version != 1 || layout != 0)
        throw std::runtime_error("unsupported matrix file version/layout: " + path);
    ComplexMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double re = 0, im = 0;
            f.read(reinterpret_cast<char*>(&re), 8);
            f.read(reinterpret_cast<char*>(&im), 8);
            a(i, j) = Complex(re, im);
        }
    if (!f) throw std::runtime_error("truncated matrix file: " + path);
    return a;
}

namespace {

const char* perturb_kind_name(PerturbKind k) {
    switch (k) {
        case PerturbKind::Zero: return "zero";
        case PerturbKind::LowRank: return "low_rank";
        case PerturbKind::EntryBounded: return "entry_bounded";
    }
    return "";
}

}  // namespace

void to_json(nlohmann::json& j, const PerturbationSpec& spec) {
    j = nlohmann::json{{"kind", perturb_kind_name(spec.kind)}};
    if (spec.kind == PerturbKind::LowRank) {
        j["rank"] = spec.rank;
        j["magnitude"] = spec.magnitude;
    }
    if (spec.kind == PerturbKind::EntryBounded) j["alpha"] = spec.alpha;
}

void from_json(const nlohmann::json& j, PerturbationSpec& spec) {
    const std::string kind = j.value("kind", "zero");
    spec = PerturbationSpec{};
    if (kind == "zero") {
        spec.kind = PerturbKind::Zero;
    } else if (kind == "low_rank") {
        spec.kind = PerturbKind::LowRank;
        spec.rank = j.value("rank", 1);
        spec.magnitude = j.value("magnitude", 1.0);
    } else if (kind == "entry_bounded") {
        spec.kind = PerturbKind::EntryBounded;
        spec.alpha = j.value("alpha", 0.5);
    } else {
        throw std::invalid_argument("unknown perturbation kind: " + kind);
    }
    spec.validate();
}

void to_json(nlohmann::json& j, const EnsembleSpec& spec) {
    j = nlohmann::json{{"n", spec.n},
                       {"pair", spec.pair},
                       {"diagonal", spec.diagonal},
                       {"perturbation", spec.perturbation},
                       {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, EnsembleSpec& spec) {
    spec = EnsembleSpec{};
    spec.n = j.at("n").get<int>();
    spec.pair = j.at("pair").get<AtomPairSpec>();
    if (j.contains("diagonal"))
        spec.diagonal = j.at("diagonal").get<ScalarAtomSpec>();
    else
        spec.diagonal = default_diagonal(spec.pair);
    if (j.contains("perturbation"))
        spec.perturbation = j.at("perturbation").get<PerturbationSpec>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.validate();
}

}  // namespace ell
