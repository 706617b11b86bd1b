#include "elliptic_lab/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace ell {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

AtomPairSpec AtomPairSpec::gaussian_real(double rho) {
    AtomPairSpec s;
    s.kind = PairKind::GaussianReal;
    s.mu = 1.0;
    s.rho = rho;
    s.validate();
    return s;
}

AtomPairSpec AtomPairSpec::gaussian_complex(double mu, double rho) {
    AtomPairSpec s;
    s.kind = PairKind::GaussianComplex;
    s.mu = mu;
    s.rho = rho;
    s.validate();
    return s;
}

AtomPairSpec AtomPairSpec::discrete_mix(double rho) {
    return discrete_mix(rho, {1.0, 0.0, rho, std::sqrt(1.0 - rho * rho)});
}

AtomPairSpec AtomPairSpec::discrete_mix(double rho, const std::array<double, 4>& coeffs) {
    AtomPairSpec s;
    s.kind = PairKind::DiscreteMix;
    s.mu = 1.0;
    s.rho = rho;
    s.mix_coeffs = coeffs;
    s.validate();
    return s;
}

AtomPairSpec AtomPairSpec::custom_finite(double mu, double rho, std::vector<PairAtom> support) {
    AtomPairSpec s;
    s.kind = PairKind::CustomFinite;
    s.mu = mu;
    s.rho = rho;
    s.support = std::move(support);
    s.validate();
    return s;
}

void AtomPairSpec::validate() const {
    require(mu >= 0.0 && mu <= 1.0, "atom pair: mu must lie in [0,1]");
    require(rho > -1.0 && rho < 1.0, "atom pair: rho must lie in (-1,1)");
    switch (kind) {
        case PairKind::GaussianReal:
            require(mu == 1.0, "gaussian_real pair requires mu = 1");
            break;
        case PairKind::GaussianComplex:
            break;
        case PairKind::DiscreteMix: {
            require(mix_coeffs.has_value(), "discrete_mix pair requires mix coefficients");
            const auto& c = *mix_coeffs;
            require(std::abs(c[0] * c[0] + c[1] * c[1] - 1.0) <= 1e-9,
                    "discrete_mix: xi1 must have unit variance (c1^2 + c1'^2 = 1)");
            require(std::abs(c[2] * c[2] + c[3] * c[3] - 1.0) <= 1e-9,
                    "discrete_mix: xi2 must have unit variance (c2^2 + c2'^2 = 1)");
            require(std::abs(c[0] * c[2] + c[1] * c[3] - rho) <= 1e-9,
                    "discrete_mix: coefficients do not realize rho");
            break;
        }
        case PairKind::CustomFinite: {
            require(!support.empty(), "custom_finite pair requires a support list");
            double total = 0.0;
            for (const auto& a : support) {
                require(a.prob >= 0.0, "custom_finite: negative probability");
                total += a.prob;
            }
            require(std::abs(total - 1.0) <= 1e-12,
                    "custom_finite: probabilities must sum to 1 within 1e-12");
            // The (mu,rho)-family moment contract holds exactly for finite kinds.
            require(std::abs(pair_moment(*this, 1, 0, 0, 0)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 1, 0, 0)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 0, 1, 0)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 0, 0, 1)) <= 1e-9,
                    "custom_finite: atoms must have mean zero");
            require(std::abs(pair_moment(*this, 2, 0, 0, 0) - mu) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 0, 2, 0) - mu) <= 1e-9,
                    "custom_finite: E(Re xi_i)^2 must equal mu");
            require(std::abs(pair_moment(*this, 0, 2, 0, 0) - (1.0 - mu)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 0, 0, 2) - (1.0 - mu)) <= 1e-9,
                    "custom_finite: E(Im xi_i)^2 must equal 1-mu");
            require(std::abs(pair_moment(*this, 1, 0, 1, 0) - mu * rho) <= 1e-9,
                    "custom_finite: E[Re xi1 Re xi2] must equal mu*rho");
            require(std::abs(pair_moment(*this, 0, 1, 0, 1) + (1.0 - mu) * rho) <= 1e-9,
                    "custom_finite: E[Im xi1 Im xi2] must equal -(1-mu)*rho");
            require(std::abs(pair_moment(*this, 1, 1, 0, 0)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 0, 1, 1)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 1, 0, 0, 1)) <= 1e-9 &&
                        std::abs(pair_moment(*this, 0, 1, 1, 0)) <= 1e-9,
                    "custom_finite: mixed Re/Im moments must vanish");
            break;
        }
    }
}

std::vector<PairAtom> AtomPairSpec::finite_support() const {
    switch (kind) {
        case PairKind::CustomFinite:
            return support;
        case PairKind::DiscreteMix: {
            const auto& c = *mix_coeffs;
            std::vector<PairAtom> atoms;
            for (double p1 : {-1.0, 1.0})
                for (double p2 : {-1.0, 1.0})
                    atoms.push_back({Complex(c[0] * p1 + c[1] * p2, 0.0),
                                     Complex(c[2] * p1 + c[3] * p2, 0.0), 0.25});
            return atoms;
        }
        default:
            return {};
    }
}

std::pair<Complex, Complex> sample_pair(const AtomPairSpec& spec, RandomStream& rng) {
    switch (spec.kind) {
        case PairKind::GaussianReal: {
            const double g1 = rng.gaussian(), g2 = rng.gaussian();
            const double r = spec.rho, q = std::sqrt(1.0 - r * r);
            return {Complex(g1, 0.0), Complex(r * g1 + q * g2, 0.0)};
        }
        case PairKind::GaussianComplex: {
            // Block Cholesky of the covariance: (Re xi1, Re xi2) has covariance
            // mu*[[1,rho],[rho,1]] and (Im xi1, Im xi2) has (1-mu)*[[1,-rho],[-rho,1]];
            // zero-variance blocks (mu in {0,1}) drop out as exact zeros.
            const double r = spec.rho, q = std::sqrt(1.0 - r * r);
            const double sre = std::sqrt(spec.mu), sim = std::sqrt(1.0 - spec.mu);
            double re1 = 0, re2 = 0, im1 = 0, im2 = 0;
            if (sre > 0.0) {
                const double g1 = rng.gaussian(), g2 = rng.gaussian();
                re1 = sre * g1;
                re2 = sre * (r * g1 + q * g2);
            }
            if (sim > 0.0) {
                const double g3 = rng.gaussian(), g4 = rng.gaussian();
                im1 = sim * g3;
                im2 = sim * (-r * g3 + q * g4);
            }
            return {Complex(re1, im1), Complex(re2, im2)};
        }
        case PairKind::DiscreteMix: {
            const auto& c = *spec.mix_coeffs;
            const double p1 = rng.rademacher(), p2 = rng.rademacher();
            return {Complex(c[0] * p1 + c[1] * p2, 0.0), Complex(c[2] * p1 + c[3] * p2, 0.0)};
        }
        case PairKind::CustomFinite: {
            double u = rng.uniform();
            for (const auto& a : spec.support) {
                if (u < a.prob) return {a.xi1, a.xi2};
                u -= a.prob;
            }
            const auto& last = spec.support.back();
            return {last.xi1, last.xi2};
        }
    }
    throw std::logic_error("unreachable pair kind");
}

Eigen::Matrix4d pair_covariance(const AtomPairSpec& spec) {
    spec.validate();
    if (spec.is_finite_support()) {
        Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
        for (const auto& a : spec.finite_support()) {
            const Eigen::Vector4d v(a.xi1.real(), a.xi1.imag(), a.xi2.real(), a.xi2.imag());
            cov += a.prob * v * v.transpose();
        }
        return cov;
    }
    Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
    const double mu = spec.mu, rho = spec.rho;
    cov(0, 0) = cov(2, 2) = mu;
    cov(1, 1) = cov(3, 3) = 1.0 - mu;
    cov(0, 2) = cov(2, 0) = mu * rho;
    cov(1, 3) = cov(3, 1) = -(1.0 - mu) * rho;
    return cov;
}

namespace {

// E[prod of jointly Gaussian mean-zero coordinates] by Wick pairing.
double wick_moment(const Eigen::Matrix4d& cov, std::vector<int>& idx) {
    if (idx.empty()) return 1.0;
    if (idx.size() % 2 != 0) return 0.0;
    const int first = idx[0];
    double total = 0.0;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        const double c = cov(first, idx[k]);
        if (c == 0.0) continue;
        std::vector<int> rest;
        rest.reserve(idx.size() - 2);
        for (std::size_t j = 1; j < idx.size(); ++j)
            if (j != k) rest.push_back(idx[j]);
        total += c * wick_moment(cov, rest);
    }
    return total;
}

}  // namespace

double pair_moment(const AtomPairSpec& spec, int i, int j, int l, int m) {
    if (spec.is_finite_support()) {
        double total = 0.0;
        for (const auto& a : spec.finite_support())
            total += a.prob * std::pow(a.xi1.real(), i) * std::pow(a.xi1.imag(), j) *
                     std::pow(a.xi2.real(), l) * std::pow(a.xi2.imag(), m);
        return total;
    }
    const Eigen::Matrix4d cov = pair_covariance(spec);
    std::vector<int> idx;
    for (int k = 0; k < i; ++k) idx.push_back(0);
    for (int k = 0; k < j; ++k) idx.push_back(1);
    for (int k = 0; k < l; ++k) idx.push_back(2);
    for (int k = 0; k < m; ++k) idx.push_back(3);
    return wick_moment(cov, idx);
}

namespace {

struct WeightedRatio {
    Complex ratio;
    double weight;
};

// Collect (omega1, omega2) difference-pair draws restricted to the annulus
// c0 < |omega_i| < C0 and map them to the ratio omega1/omega2.
std::vector<WeightedRatio> ratio_cloud(const AtomPairSpec& spec, std::size_t trials,
                                       std::uint64_t seed, double& c0, double& C0) {
    std::vector<std::pair<Complex, Complex>> omegas;
    std::vector<double> weights;
    if (spec.is_finite_support()) {
        const auto atoms = spec.finite_support();
        for (const auto& a : atoms)
            for (const auto& b : atoms) {
                omegas.emplace_back(0.5 * (a.xi1 - b.xi1), 0.5 * (a.xi2 - b.xi2));
                weights.push_back(a.prob * b.prob);
            }
    } else {
        RandomStream rng = RandomStream(seed).derive(0x5e9a);
        omegas.reserve(trials);
        for (std::size_t t = 0; t < trials; ++t) {
            auto [x1, x2] = sample_pair(spec, rng);
            auto [y1, y2] = sample_pair(spec, rng);
            omegas.emplace_back(0.5 * (x1 - y1), 0.5 * (x2 - y2));
            weights.push_back(1.0 / static_cast<double>(trials));
        }
    }
    // Annulus bounds from the nonzero moduli: wide quantile band.
    std::vector<double> moduli;
    for (const auto& [w1, w2] : omegas) {
        if (std::abs(w1) > 0) moduli.push_back(std::abs(w1));
        if (std::abs(w2) > 0) moduli.push_back(std::abs(w2));
    }
    if (moduli.empty()) {
        c0 = C0 = 0.0;
        return {};
    }
    std::sort(moduli.begin(), moduli.end());
    c0 = 0.5 * moduli[moduli.size() / 20];
    C0 = 2.0 * moduli[(moduli.size() * 99) / 100];
    std::vector<WeightedRatio> cloud;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        const auto& [w1, w2] = omegas[k];
        const double m1 = std::abs(w1), m2 = std::abs(w2);
        if (m1 <= c0 || m1 >= C0 || m2 <= c0 || m2 >= C0) continue;
        cloud.push_back({w1 / w2, weights[k]});
    }
    return cloud;
}

}  // namespace

SeparationWitness separation_witness(const AtomPairSpec& spec, std::size_t trials,
                                     std::uint64_t seed, int grid_k, double delta_floor) {
    spec.validate();
    SeparationWitness out;
    auto cloud = ratio_cloud(spec, trials, seed, out.c0, out.C0);
    if (cloud.empty()) return out;

    // Grid half-width for the ratio plane: generous quantile of the components.
    std::vector<double> comp;
    for (const auto& wr : cloud)
        comp.push_back(std::max(std::abs(wr.ratio.real()), std::abs(wr.ratio.imag())));
    std::sort(comp.begin(), comp.end());
    const std::size_t qidx = std::min(comp.size() - 1, (comp.size() * 195) / 200);
    const double L = std::max(1e-6, 1.05 * comp[qidx]);
    const int k = grid_k;
    const double side = 2.0 * L / k;
    std::map<std::pair<int, int>, double> mass;
    for (const auto& wr : cloud) {
        const int ix = std::clamp(static_cast<int>(std::floor((wr.ratio.real() + L) / side)), 0, k - 1);
        const int iy = std::clamp(static_cast<int>(std::floor((wr.ratio.imag() + L) / side)), 0, k - 1);
        mass[{ix, iy}] += wr.weight;
    }

    // Best pair of cells separated by at least one empty cell in Chebyshev
    // distance; maximizes the smaller of the two masses.
    double best = 0.0;
    std::pair<int, int> cell1{}, cell2{};
    int gap_cells = 0;
    for (auto it1 = mass.begin(); it1 != mass.end(); ++it1)
        for (auto it2 = std::next(it1); it2 != mass.end(); ++it2) {
            const int dx = std::abs(it1->first.first - it2->first.first);
            const int dy = std::abs(it1->first.second - it2->first.second);
            const int cheb = std::max(dx, dy);
            if (cheb < 2) continue;
            const double lo = std::min(it1->second, it2->second);
            if (lo > best) {
                best = lo;
                cell1 = it1->first;
                cell2 = it2->first;
                gap_cells = cheb;
            }
        }
    if (best < delta_floor) return out;

    auto rect = [&](std::pair<int, int> c) {
        RatioRect r;
        r.re_lo = -L + c.first * side;
        r.re_hi = r.re_lo + side;
        r.im_lo = -L + c.second * side;
        r.im_hi = r.im_lo + side;
        return r;
    };
    out.found = true;
    out.delta = best;
    out.alpha = (gap_cells - 1) * side;
    out.region1 = rect(cell1);
    out.region2 = rect(cell2);
    return out;
}

AtomPairSpec with_rho(const AtomPairSpec& spec, double rho) {
    switch (spec.kind) {
        case PairKind::GaussianReal:
            return AtomPairSpec::gaussian_real(rho);
        case PairKind::GaussianComplex:
            return AtomPairSpec::gaussian_complex(spec.mu, rho);
        case PairKind::DiscreteMix:
            return AtomPairSpec::discrete_mix(rho);
        case PairKind::CustomFinite:
            throw std::invalid_argument("with_rho: cannot retarget a custom finite support");
    }
    throw std::logic_error("unreachable pair kind");
}

ScalarAtomSpec ScalarAtomSpec::modified_bernoulli(double mu) {
    ScalarAtomSpec s;
    s.kind = ScalarKind::ModifiedBernoulli;
    s.mu = mu;
    s.validate();
    return s;
}

ScalarAtomSpec ScalarAtomSpec::custom_finite(std::vector<ScalarAtom> support) {
    ScalarAtomSpec s;
    s.kind = ScalarKind::CustomFinite;
    s.support = std::move(support);
    s.validate();
    return s;
}

void ScalarAtomSpec::validate() const {
    switch (kind) {
        case ScalarKind::Bernoulli:
        case ScalarKind::GaussianReal:
            break;
        case ScalarKind::ModifiedBernoulli:
            require(mu >= 0.0 && mu <= 1.0, "modified_bernoulli: mu must lie in [0,1]");
            break;
        case ScalarKind::CustomFinite: {
            require(!support.empty(), "custom_finite scalar requires a support list");
            double total = 0.0;
            for (const auto& a : support) {
                require(a.prob >= 0.0, "custom_finite scalar: negative probability");
                total += a.prob;
            }
            require(std::abs(total - 1.0) <= 1e-12,
                    "custom_finite scalar: probabilities must sum to 1 within 1e-12");
            break;
        }
    }
}

std::vector<ScalarAtom> ScalarAtomSpec::finite_support() const {
    switch (kind) {
        case ScalarKind::Bernoulli:
            return {{Complex(1, 0), 0.5}, {Complex(-1, 0), 0.5}};
        case ScalarKind::ModifiedBernoulli:
            return {{Complex(1, 0), mu / 2}, {Complex(-1, 0), mu / 2}, {Complex(0, 0), 1.0 - mu}};
        case ScalarKind::CustomFinite:
            return support;
        case ScalarKind::GaussianReal:
            return {};
    }
    throw std::logic_error("unreachable scalar kind");
}

Complex ScalarAtomSpec::mean() const {
    if (kind == ScalarKind::GaussianReal) return {0.0, 0.0};
    Complex m{0.0, 0.0};
    for (const auto& a : finite_support()) m += a.prob * a.value;
    return m;
}

double ScalarAtomSpec::variance() const {
    if (kind == ScalarKind::GaussianReal) return 1.0;
    const Complex m = mean();
    double v = 0.0;
    for (const auto& a : finite_support()) v += a.prob * std::norm(a.value - m);
    return v;
}

Complex ScalarAtomSpec::sample(RandomStream& rng) const {
    switch (kind) {
        case ScalarKind::Bernoulli:
            return {rng.rademacher(), 0.0};
        case ScalarKind::ModifiedBernoulli: {
            const double u = rng.uniform();
            if (u < mu / 2) return {1.0, 0.0};
            if (u < mu) return {-1.0, 0.0};
            return {0.0, 0.0};
        }
        case ScalarKind::GaussianReal:
            return {rng.gaussian(), 0.0};
        case ScalarKind::CustomFinite: {
            double u = rng.uniform();
            for (const auto& a : support) {
                if (u < a.prob) return a.value;
                u -= a.prob;
            }
            return support.back().value;
        }
    }
    throw std::logic_error("unreachable scalar kind");
}

namespace {

const char* pair_kind_name(PairKind k) {
    switch (k) {
        case PairKind::GaussianReal: return "gaussian_real";
        case PairKind::GaussianComplex: return "gaussian_complex";
        case PairKind::DiscreteMix: return "discrete_mix";
        case PairKind::CustomFinite: return "custom_finite";
    }
    return "";
}

const char* scalar_kind_name(ScalarKind k) {
    switch (k) {
        case ScalarKind::Bernoulli: return "bernoulli";
        case ScalarKind::ModifiedBernoulli: return "modified_bernoulli";
        case ScalarKind::GaussianReal: return "gaussian_real";
        case ScalarKind::CustomFinite: return "custom_finite";
    }
    return "";
}

}  // namespace

void to_json(nlohmann::json& j, const AtomPairSpec& spec) {
    j = nlohmann::json{{"kind", pair_kind_name(spec.kind)}, {"mu", spec.mu}, {"rho", spec.rho}};
    if (spec.mix_coeffs) j["mix_coeffs"] = *spec.mix_coeffs;
    if (!spec.support.empty()) {
        nlohmann::json sup = nlohmann::json::array();
        for (const auto& a : spec.support)
            sup.push_back({{"xi1", {a.xi1.real(), a.xi1.imag()}},
                           {"xi2", {a.xi2.real(), a.xi2.imag()}},
                           {"prob", a.prob}});
        j["support"] = sup;
    }
}

void from_json(const nlohmann::json& j, AtomPairSpec& spec) {
    const std::string kind = j.at("kind").get<std::string>();
    spec = AtomPairSpec{};
    spec.mu = j.value("mu", 1.0);
    spec.rho = j.value("rho", 0.0);
    if (kind == "gaussian_real") {
        spec.kind = PairKind::GaussianReal;
    } else if (kind == "gaussian_complex") {
        spec.kind = PairKind::GaussianComplex;
    } else if (kind == "discrete_mix") {
        spec.kind = PairKind::DiscreteMix;
        if (j.contains("mix_coeffs"))
            spec.mix_coeffs = j.at("mix_coeffs").get<std::array<double, 4>>();
        else
            spec.mix_coeffs = {1.0, 0.0, spec.rho, std::sqrt(1.0 - spec.rho * spec.rho)};
    } else if (kind == "custom_finite") {
        spec.kind = PairKind::CustomFinite;
        for (const auto& a : j.at("support")) {
            const auto x1 = a.at("xi1").get<std::array<double, 2>>();
            const auto x2 = a.at("xi2").get<std::array<double, 2>>();
            spec.support.push_back(
                {Complex(x1[0], x1[1]), Complex(x2[0], x2[1]), a.at("prob").get<double>()});
        }
    } else {
        throw std::invalid_argument("unknown atom pair kind: " + kind);
    }
    spec.validate();
}

void to_json(nlohmann::json& j, const ScalarAtomSpec& spec) {
    j = nlohmann::json{{"kind", scalar_kind_name(spec.kind)}};
    if (spec.kind == ScalarKind::ModifiedBernoulli) j["mu"] = spec.mu;
    if (!spec.support.empty()) {
        nlohmann::json sup = nlohmann::json::array();
        for (const auto& a : spec.support)
            sup.push_back({{"value", {a.value.real(), a.value.imag()}}, {"prob", a.prob}});
        j["support"] = sup;
    }
}

void from_json(const nlohmann::json& j, ScalarAtomSpec& spec) {
    const std::string kind = j.at("kind").get<std::string>();
    spec = ScalarAtomSpec{};
    if (kind == "bernoulli") {
        spec.kind = ScalarKind::Bernoulli;
    } else if (kind == "modified_bernoulli") {
        spec.kind = ScalarKind::ModifiedBernoulli;
        spec.mu = j.at("mu").get<double>();
    } else if (kind == "gaussian_real") {
        spec.kind = ScalarKind::GaussianReal;
    } else if (kind == "custom_finite") {
        spec.kind = ScalarKind::CustomFinite;
        for (const auto& a : j.at("support")) {
            const auto v = a.at("value").get<std::array<double, 2>>();
            spec.support.push_back({Complex(v[0], v[1]), a.at("prob").get<double>()});
        }
    } else {
        throw std::invalid_argument("unknown scalar atom kind: " + kind);
    }
    spec.validate();
}

}  // namespace ell
