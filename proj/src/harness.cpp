#include "elliptic_lab/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "elliptic_lab/anticonc.hpp"
#include "elliptic_lab/elliptic.hpp"
#include "elliptic_lab/limitlaw.hpp"
#include "elliptic_lab/lsvlab.hpp"
#include "elliptic_lab/parallel.hpp"
#include "elliptic_lab/spectra.hpp"

namespace ell {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream s;
    s << std::hex << h;
    return s.str();
}

std::string file_checksum(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checksum: cannot open " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return fnv1a64_hex(buf.str());
}

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    json j;
    f >> j;
    return j;
}

namespace {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Accumulates per-run records, assertions, and emitted-file checksums.
class ManifestBuilder {
public:
    ManifestBuilder(std::string command, const json& effective_config, const fs::path& out_dir)
        : command_(std::move(command)), out_dir_(out_dir) {
        manifest_["command"] = command_;
        manifest_["artifact_version"] = "0.1.0";
        manifest_["config"] = effective_config;
        manifest_["config_hash"] = fnv1a64_hex(effective_config.dump());
        fs::create_directories(out_dir);
    }

    fs::path out_dir() const { return out_dir_; }

    void add_record(const std::string& name, json metrics, json assertions, long long wall_ms) {
        bool record_pass = true;
        for (const auto& a : assertions)
            if (!a.at("pass").get<bool>()) record_pass = false;
        records_.push_back({{"name", name},
                            {"status", record_pass ? "ok" : "failed"},
                            {"wall_ms", wall_ms},
                            {"metrics", std::move(metrics)},
                            {"assertions", std::move(assertions)}});
        pass_ = pass_ && record_pass;
    }

    void add_file(const std::string& rel_path) {
        files_.push_back({{"path", rel_path},
                          {"checksum_fnv1a64", file_checksum((out_dir_ / rel_path).string())}});
    }

    std::string file(const std::string& rel_path) const { return (out_dir_ / rel_path).string(); }

    json finish(long long total_ms) {
        manifest_["records"] = records_;
        manifest_["files"] = files_;
        manifest_["pass"] = pass_;
        manifest_["wall_ms_total"] = total_ms;
        std::ofstream f(out_dir_ / "manifest.json");
        f << manifest_.dump(2) << "\n";
        return manifest_;
    }

private:
    std::string command_;
    fs::path out_dir_;
    json manifest_ = json::object();
    json records_ = json::array();
    json files_ = json::array();
    bool pass_ = true;
};

json make_assertion(const std::string& name, bool pass, double value, double bound) {
    return {{"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}};
}

// Apply CLI overrides and check mandatory fields.
json effective_config(json config, const CliOverrides& o, const char* command) {
    if (o.seed) config["seed"] = *o.seed;
    if (o.out) config["out"] = *o.out;
    if (o.trials) config["trials"] = *o.trials;
    if (o.jobs) config["jobs"] = *o.jobs;
    if (!config.contains("seed")) throw std::invalid_argument("config: seed is mandatory");
    if (!config.contains("out")) config["out"] = std::string("runs/") + command;
    if (config.value("version", 1) != 1)
        throw std::invalid_argument("config: unsupported schema version");
    if (config.contains("command") && config["command"] != command)
        throw std::invalid_argument("config: command field does not match subcommand");
    return config;
}

EnsembleSpec ensemble_from(const json& config, std::uint64_t seed) {
    json e = config.at("ensemble");
    e["seed"] = seed;
    return e.get<EnsembleSpec>();
}

std::vector<Complex> complex_list(const json& arr) {
    std::vector<Complex> out;
    for (const auto& p : arr) out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return out;
}

}  // namespace

json run_esd(json config, const CliOverrides& overrides) {
    Timer total;
    config = effective_config(std::move(config), overrides, "esd");
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
    const int jobs = config.value("jobs", 0);
    ManifestBuilder mb("esd", config, config.at("out").get<std::string>());

    const EnsembleSpec base = ensemble_from(config, seed);
    std::vector<double> sweep_rho = config.contains("sweep") && config["sweep"].contains("rho")
                                        ? config["sweep"]["rho"].get<std::vector<double>>()
                                        : std::vector<double>{base.pair.rho};
    std::vector<int> sweep_n = config.contains("sweep") && config["sweep"].contains("n")
                                   ? config["sweep"]["n"].get<std::vector<int>>()
                                   : std::vector<int>{base.n};
    const std::size_t trials = config.value("trials", std::size_t{1});
    if (sweep_rho.empty() || sweep_n.empty() || trials == 0)
        throw std::invalid_argument("run_esd: empty sweep");
    const int grid = config.value("grid", 21);
    const double inflation = config.value("inflation", 1.05);
    const json asserts = config.value("assertions", json::object());

    struct RunOut {
        double inside = 0.0, disc = 0.0;
        long long ms = 0;
    };

    std::ofstream summary(mb.file("summary.csv"));
    summary << "rho,n,trial,inside_fraction,discrepancy\n";
    summary.precision(12);

    for (std::size_t ri = 0; ri < sweep_rho.size(); ++ri) {
        const double rho = sweep_rho[ri];
        for (std::size_t ni = 0; ni < sweep_n.size(); ++ni) {
            const int n = sweep_n[ni];
            std::vector<RunOut> outs(trials);
            parallel_for(
                trials,
                [&](std::size_t tr) {
                    Timer t;
                    EnsembleSpec spec = base;
                    spec.pair = with_rho(base.pair, rho);
                    spec.diagonal = default_diagonal(spec.pair);
                    spec.n = n;
                    spec.seed = RandomStream(seed).derive(ri, ni).derive(tr).next_u64();
                    const ComplexMatrix x = generate(spec);
                    const EmpiricalMeasure2D mu = eigen_measure(
                        ComplexMatrix(x / std::sqrt(static_cast<double>(n))));
                    const EllipticLaw law(rho);
                    outs[tr].inside = inside_fraction(mu, law, inflation);
                    outs[tr].disc = discrepancy(mu, law, grid);
                    outs[tr].ms = t.ms();
                    std::ostringstream tag;
                    tag << "rho" << rho << "_n" << n << "_t" << tr;
                    write_eigenvalues_csv(mb.file("eigs_" + tag.str() + ".csv"), mu.points);
                    write_scatter_svg(mb.file("scatter_" + tag.str() + ".svg"), mu, law,
                                      inflation);
                },
                jobs);
            double disc_mean = 0.0;
            for (std::size_t tr = 0; tr < trials; ++tr) {
                disc_mean += outs[tr].disc / static_cast<double>(trials);
                std::ostringstream tag;
                tag << "rho" << rho << "_n" << n << "_t" << tr;
                mb.add_file("eigs_" + tag.str() + ".csv");
                mb.add_file("scatter_" + tag.str() + ".svg");
                summary << rho << "," << n << "," << tr << "," << outs[tr].inside << ","
                        << outs[tr].disc << "\n";

                json assertions = json::array();
                if (asserts.contains("inside_fraction_min"))
                    assertions.push_back(make_assertion(
                        "inside_fraction>=min", outs[tr].inside >= asserts["inside_fraction_min"],
                        outs[tr].inside, asserts["inside_fraction_min"]));
                json metrics{{"inside_fraction", outs[tr].inside},
                             {"discrepancy", outs[tr].disc}};
                mb.add_record("esd " + std::to_string(rho) + " n=" + std::to_string(n) +
                                  " trial=" + std::to_string(tr),
                              metrics, assertions, outs[tr].ms);
            }
            if (asserts.contains("discrepancy_mean_max")) {
                json assertions = json::array();
                assertions.push_back(make_assertion("discrepancy_mean<=max",
                                                    disc_mean <= asserts["discrepancy_mean_max"],
                                                    disc_mean, asserts["discrepancy_mean_max"]));
                mb.add_record("esd mean discrepancy rho=" + std::to_string(rho) +
                                  " n=" + std::to_string(n),
                              {{"discrepancy_mean", disc_mean}}, assertions, 0);
            }
        }
    }
    summary.close();
    mb.add_file("summary.csv");
    return mb.finish(total.ms());
}

json run_lsv(json config, const CliOverrides& overrides) {
    Timer total;
    config = effective_config(std::move(config), overrides, "lsv");
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
    const int jobs = config.value("jobs", 0);
    ManifestBuilder mb("lsv", config, config.at("out").get<std::string>());

    EnsembleSpec spec = ensemble_from(config, seed);
    const std::size_t trials = config.value("trials", std::size_t{1000});
    std::vector<double> thresholds;
    if (config.contains("thresholds")) {
        thresholds = config["thresholds"].get<std::vector<double>>();
    } else {
        const double n = static_cast<double>(spec.n);
        thresholds = {std::pow(n, -3.0), std::pow(n, -2.0), std::pow(n, -1.0)};
    }
    if (thresholds.empty()) throw std::invalid_argument("run_lsv: empty threshold sweep");

    Timer t;
    const TailReport report = lsv_tail(spec, thresholds, trials, jobs);
    write_tail_csv(mb.file("tail.csv"), report);
    mb.add_file("tail.csv");

    json assertions = json::array();
    const json asserts = config.value("assertions", json::object());
    if (asserts.contains("tail_p_max")) {
        // Bound applies to the smallest threshold.
        const double bound = asserts["tail_p_max"];
        assertions.push_back(
            make_assertion("tail_p<=max", report.points.front().p <= bound,
                           report.points.front().p, bound));
    }
    json metrics{{"trials", report.trials},
                 {"failures", report.failures},
                 {"smallest_threshold_p", report.points.front().p}};
    if (report.fitted_exponent) metrics["fitted_exponent"] = *report.fitted_exponent;
    mb.add_record("lsv tail", metrics, assertions, t.ms());

    if (config.contains("singularity")) {
        Timer ts;
        const json& sing = config["singularity"];
        const SingularityRate rate =
            singularity_rate(spec, sing.value("trials", trials), jobs);
        json sa = json::array();
        if (sing.contains("max_rate"))
            sa.push_back(make_assertion("singularity_rate<=max", rate.rate <= sing["max_rate"],
                                        rate.rate, sing["max_rate"]));
        mb.add_record("singularity rate", {{"rate", rate.rate}, {"trials", rate.trials}}, sa,
                      ts.ms());
    }
    return mb.finish(total.ms());
}

json run_limit(json config, const CliOverrides& overrides) {
    Timer total;
    config = effective_config(std::move(config), overrides, "limit");
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
    const int jobs = config.value("jobs", 0);
    ManifestBuilder mb("limit", config, config.at("out").get<std::string>());

    const double rho = config.value("rho", 0.0);
    const json asserts = config.value("assertions", json::object());

    // Self-consistent solver sweep.
    if (config.contains("z_points") && config.contains("alpha_points")) {
        const auto zs = complex_list(config["z_points"]);
        const auto alphas = complex_list(config["alpha_points"]);
        if (zs.empty() || alphas.empty()) throw std::invalid_argument("run_limit: empty sweep");
        Timer t;
        std::ofstream f(mb.file("stu.csv"));
        f << "rho,z_re,z_im,alpha_re,alpha_im,s_re,s_im,t_re,t_im,u_re,u_im,residual\n";
        f.precision(15);
        for (const Complex& z : zs)
            for (const Complex& alpha : alphas) {
                const StieltjesState st = solve_stu_system(rho, z, alpha);
                f << rho << "," << z.real() << "," << z.imag() << "," << alpha.real() << ","
                  << alpha.imag() << "," << st.s.real() << "," << st.s.imag() << ","
                  << st.t.real() << "," << st.t.imag() << "," << st.u.real() << ","
                  << st.u.imag() << "," << st.residual << "\n";
            }
        f.close();
        mb.add_file("stu.csv");
        mb.add_record("stu solver sweep",
                      {{"points", zs.size() * alphas.size()}}, json::array(), t.ms());

        // Empirical comparison at matching points.
        if (config.contains("empirical")) {
            const json& emp = config["empirical"];
            const int n = emp.value("n", 500);
            const double tol = emp.value("tol", 0.1);
            const double min_im = emp.value("min_im_alpha", 0.5);
            const double min_frac = emp.value("min_pass_fraction", 0.9);
            Timer te;
            std::size_t tested = 0, passed = 0;
            EnsembleSpec spec = ensemble_from(config, seed);
            spec.pair = with_rho(spec.pair, rho);
            spec.diagonal = default_diagonal(spec.pair);
            spec.n = n;
            std::vector<std::pair<Complex, Complex>> points;
            for (const Complex& z : zs)
                for (const Complex& alpha : alphas)
                    if (alpha.imag() >= min_im) points.emplace_back(z, alpha);
            std::vector<double> diffs(points.size(), 0.0);
            parallel_for(
                points.size(),
                [&](std::size_t k) {
                    EnsembleSpec s = spec;
                    s.seed = RandomStream(seed).derive(0x656d70, k).next_u64();
                    const ComplexMatrix x = generate(s);
                    const StuTriple emp_stu =
                        empirical_stu(x, points[k].first, points[k].second);
                    const StieltjesState sol =
                        solve_stu_system(rho, points[k].first, points[k].second);
                    diffs[k] = std::abs(emp_stu.s - sol.s);
                },
                jobs);
            for (double d : diffs) {
                ++tested;
                if (d <= tol) ++passed;
            }
            const double frac =
                tested ? static_cast<double>(passed) / static_cast<double>(tested) : 1.0;
            json a = json::array();
            a.push_back(make_assertion("empirical_s_match_fraction>=min", frac >= min_frac,
                                       frac, min_frac));
            mb.add_record("empirical stu comparison",
                          {{"tested", tested}, {"passed", passed}}, a, te.ms());
        }
    }

    // nu_z densities.
    if (config.contains("density")) {
        const json& den = config["density"];
        const double lo = den.value("lo", -3.0), hi = den.value("hi", 3.0);
        const double step = den.value("step", 0.01), eps = den.value("epsilon", 1e-3);
        const auto zs = complex_list(den.value("z_points", json::array({{0.0, 0.0}})));
        for (std::size_t zi = 0; zi < zs.size(); ++zi) {
            Timer t;
            std::vector<double> grid;
            for (double x = lo; x <= hi + 1e-12; x += step) grid.push_back(x);
            const NuZ nu = nu_z_density(rho, zs[zi], grid, eps);
            const std::string name = "nu_z_" + std::to_string(zi) + ".csv";
            write_nu_z_csv(mb.file(name), rho, nu);
            mb.add_file(name);
            double mass = 0.0;
            for (double d : nu.density) mass += d * step;
            json a = json::array();
            if (den.contains("mass_tol"))
                a.push_back(make_assertion("density_mass~1",
                                           std::abs(mass - 1.0) <= den["mass_tol"], mass,
                                           den["mass_tol"]));
            mb.add_record("nu_z density z#" + std::to_string(zi), {{"mass", mass}}, a, t.ms());
        }
    }

    // Log-potential identity checks.
    if (config.contains("potential")) {
        const json& pot = config["potential"];
        const int n = pot.value("n", 800);
        const std::size_t seeds = pot.value("seeds", std::size_t{5});
        const double tol = pot.value("tol", 0.05);
        const auto zs = complex_list(pot.at("z_points"));
        std::ofstream f(mb.file("potential.jsonl"));
        for (std::size_t zi = 0; zi < zs.size(); ++zi) {
            Timer t;
            std::vector<double> gaps(seeds, 0.0);
            std::vector<double> u_emps(seeds, 0.0);
            std::vector<double> u_limits(seeds, 0.0);
            parallel_for(
                seeds,
                [&](std::size_t si) {
                    EnsembleSpec spec = ensemble_from(config, seed);
                    spec.pair = with_rho(spec.pair, rho);
                    spec.diagonal = default_diagonal(spec.pair);
                    spec.n = n;
                    spec.seed = RandomStream(seed).derive(0x706f74, zi).derive(si).next_u64();
                    const ComplexMatrix x = generate(spec);
                    const PotentialMatch pm = potential_match(x, rho, zs[zi]);
                    gaps[si] = pm.gap;
                    u_emps[si] = pm.u_emp;
                    u_limits[si] = pm.u_limit;
                },
                jobs);
            double gap_mean = 0.0;
            for (double g : gaps) gap_mean += g / static_cast<double>(seeds);
            json rec{{"z", {zs[zi].real(), zs[zi].imag()}},
                     {"rho", rho},
                     {"u_limit", u_limits.front()},
                     {"gap_mean", gap_mean},
                     {"u_emp", u_emps}};
            f << rec.dump() << "\n";
            json a = json::array();
            a.push_back(make_assertion("potential_gap_mean<=tol", gap_mean <= tol, gap_mean, tol));
            mb.add_record("potential match z#" + std::to_string(zi),
                          {{"gap_mean", gap_mean}}, a, t.ms());
        }
        f.close();
        mb.add_file("potential.jsonl");
    }

    // Resolvent-trace variance decay probe.
    if (config.contains("variance_probe")) {
        const json& vp = config["variance_probe"];
        Timer t;
        EnsembleSpec spec = ensemble_from(config, seed);
        spec.pair = with_rho(spec.pair, rho);
        spec.diagonal = default_diagonal(spec.pair);
        spec.n = vp.value("n", 100);
        spec.seed = RandomStream(seed).derive(0x766172).next_u64();
        const auto alpha = complex_list(json::array({vp.value("alpha", json::array({0.0, 1.0}))}))[0];
        const Complex z = complex_list(json::array({vp.value("z", json::array({0.0, 0.0}))}))[0];
        const VarianceProbe probe =
            variance_scaling_probe(spec, z, alpha, vp.value("trials", std::size_t{400}), jobs);
        json a = json::array();
        if (vp.contains("ratio_min"))
            a.push_back(make_assertion("var_ratio>=min", probe.ratio >= vp["ratio_min"],
                                       probe.ratio, vp["ratio_min"]));
        if (vp.contains("ratio_max"))
            a.push_back(make_assertion("var_ratio<=max", probe.ratio <= vp["ratio_max"],
                                       probe.ratio, vp["ratio_max"]));
        mb.add_record("variance probe",
                      {{"var_n", probe.var_n}, {"var_2n", probe.var_2n}, {"ratio", probe.ratio}},
                      a, t.ms());
    }

    // Truncation Levy check.
    if (config.contains("truncation")) {
        const json& tc = config["truncation"];
        Timer t;
        const int n = tc.value("n", 200);
        const double delta = tc.value("delta", 0.4);
        const std::size_t seeds = tc.value("seeds", std::size_t{10});
        const Complex z = complex_list(json::array({tc.value("z", json::array({1.0, 0.0}))}))[0];
        std::vector<double> dists(seeds, 0.0);
        parallel_for(
            seeds,
            [&](std::size_t si) {
                EnsembleSpec spec = ensemble_from(config, seed);
                spec.pair = with_rho(spec.pair, rho);
                spec.diagonal = default_diagonal(spec.pair);
                spec.n = n;
                spec.seed = RandomStream(seed).derive(0x747263, si).next_u64();
                const ComplexMatrix x = generate(spec);
                const ComplexMatrix xt = truncate_standardize(x, spec.pair, delta);
                const auto nu = scaled_measures(x, z).second;
                const auto nut = scaled_measures(xt, z).second;
                // nu_{H} is the eigenvalue measure of R^*R: square the sigmas.
                EmpiricalMeasure1D h, ht;
                for (double s : nu.points) h.points.push_back(s * s);
                for (double s : nut.points) ht.points.push_back(s * s);
                dists[si] = levy_distance(h, ht);
            },
            jobs);
        double mean = 0.0;
        for (double d : dists) mean += d / static_cast<double>(seeds);
        json a = json::array();
        if (tc.contains("levy_max"))
            a.push_back(
                make_assertion("levy_mean<=max", mean <= tc["levy_max"], mean, tc["levy_max"]));
        mb.add_record("truncation levy", {{"levy_mean", mean}}, a, t.ms());
    }

    return mb.finish(total.ms());
}

json run_anticonc(json config, const CliOverrides& overrides) {
    Timer total;
    config = effective_config(std::move(config), overrides, "anticonc");
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();
    ManifestBuilder mb("anticonc", config, config.at("out").get<std::string>());
    std::ofstream results(mb.file("results.jsonl"));

    if (config.contains("small_ball")) {
        const json& sb = config["small_ball"];
        Timer t;
        SmallBallQuery q;
        const int n = sb.value("n", 10);
        q.a.assign(static_cast<std::size_t>(n), Complex(1, 0));
        q.beta = sb.value("beta", 0.5);
        q.scalar_atom = sb.contains("atom") ? sb["atom"].get<ScalarAtomSpec>()
                                            : ScalarAtomSpec::bernoulli();
        const SmallBallExactResult ex = small_ball_exact(q);
        const SmallBallMcResult mc = small_ball_mc(q, sb.value("trials", std::size_t{20000}), seed);
        json rec{{"kind", "small_ball"},
                 {"gamma_exact", ex.gamma},
                 {"sup_exact", ex.sup_exact},
                 {"gamma_mc", mc.gamma_hat},
                 {"ci", {mc.ci_lo, mc.ci_hi}}};
        results << rec.dump() << "\n";
        json a = json::array();
        if (sb.contains("expect"))
            a.push_back(make_assertion("gamma_exact==expect",
                                       std::abs(ex.gamma - sb["expect"].get<double>()) <=
                                           sb.value("tol", 1e-12),
                                       ex.gamma, sb["expect"]));
        mb.add_record("small ball", {{"gamma_exact", ex.gamma}, {"gamma_mc", mc.gamma_hat}}, a,
                      t.ms());
    }

    if (config.contains("erdos_lo")) {
        const json& el = config["erdos_lo"];
        Timer t;
        const auto ns = el.value("n", std::vector<int>{25, 100, 400});
        const double bound = el.value("bound", 5.0);
        RandomStream rng = RandomStream(seed).derive(0x656c6f);
        bool all_ok = true;
        json scales = json::array();
        for (int n : ns) {
            SmallBallQuery q;
            q.beta = el.value("beta", 1.0);
            q.scalar_atom = ScalarAtomSpec::bernoulli();
            for (int i = 0; i < n; ++i)
                q.a.push_back(std::polar(1.0, rng.uniform(0.0, 2.0 * M_PI)));
            const SmallBallMcResult mc =
                small_ball_mc(q, el.value("trials", std::size_t{20000}), rng.next_u64());
            const double scaled = mc.gamma_hat * std::sqrt(static_cast<double>(n));
            scales.push_back({{"n", n}, {"gamma", mc.gamma_hat}, {"gamma_sqrt_n", scaled}});
            if (scaled > bound) all_ok = false;
        }
        results << json{{"kind", "erdos_lo"}, {"scales", scales}}.dump() << "\n";
        json a = json::array();
        a.push_back(make_assertion("gamma*sqrt(n)<=bound", all_ok, all_ok ? 1.0 : 0.0, 1.0));
        mb.add_record("erdos littlewood offord scaling", {{"scales", scales}}, a, t.ms());
    }

    if (config.contains("decoupling")) {
        const json& dc = config["decoupling"];
        Timer t;
        const int n = dc.value("n", 40);
        const std::size_t runs = dc.value("runs", std::size_t{100});
        const double beta = dc.value("beta", 0.5);
        const std::size_t trials = dc.value("trials", std::size_t{10000});
        const double min_rate = dc.value("min_ok_rate", 0.95);
        const AtomPairSpec pair = dc.contains("pair") ? dc["pair"].get<AtomPairSpec>()
                                                      : AtomPairSpec::gaussian_real(0.0);
        RandomStream rng = RandomStream(seed).derive(0x646370);
        std::size_t ok_count = 0;
        for (std::size_t r = 0; r < runs; ++r) {
            Eigen::MatrixXcd a(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = Complex(rng.gaussian(), 0.0);
            a /= a.norm();
            std::vector<int> u;
            for (int i = 0; i < n / 2; ++i) u.push_back(i);
            const DecouplingResult res = decoupling_check(a, u, pair, {}, {}, beta, trials,
                                                          rng.next_u64());
            if (res.ok) ++ok_count;
        }
        const double rate = static_cast<double>(ok_count) / static_cast<double>(runs);
        results << json{{"kind", "decoupling"}, {"ok_rate", rate}}.dump() << "\n";
        json a = json::array();
        a.push_back(make_assertion("decoupling_ok_rate>=min", rate >= min_rate, rate, min_rate));
        mb.add_record("decoupling", {{"ok_rate", rate}}, a, t.ms());
    }

    if (config.contains("dist")) {
        const json& dd = config["dist"];
        Timer t;
        const int n = dd.value("n", 200), d = dd.value("d", 100);
        const std::size_t trials = dd.value("trials", std::size_t{1000});
        const DistExperimentResult res = dist_subspace_experiment(
            n, d, ScalarAtomSpec::gaussian_real(), ScalarAtomSpec::gaussian_real(), n / 2, {},
            trials, RandomStream(seed).derive(0x646973).next_u64());
        results << json{{"kind", "dist"},
                        {"failure_rate", res.failure_rate},
                        {"mean_dist_sq", res.mean_dist_sq}}
                       .dump()
                << "\n";
        json a = json::array();
        if (dd.contains("max_failure"))
            a.push_back(make_assertion("dist_failure_rate<=max",
                                       res.failure_rate <= dd["max_failure"], res.failure_rate,
                                       dd["max_failure"]));
        mb.add_record("dist subspace", {{"failure_rate", res.failure_rate}}, a, t.ms());
    }

    if (config.contains("cofactor")) {
        const json& cf = config["cofactor"];
        Timer t;
        const std::size_t count = cf.value("count", std::size_t{100});
        const int max_n = cf.value("max_n", 6);
        RandomStream rng = RandomStream(seed).derive(0x636f66);
        bool all_zero = true;
        for (std::size_t k = 0; k < count; ++k) {
            const int n = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(max_n - 1)));
            ComplexMatrix m(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    m(i, j) = Complex(static_cast<double>(static_cast<long long>(rng.index(21)) - 10),
                                      static_cast<double>(static_cast<long long>(rng.index(21)) - 10));
            if (!cofactor_bilinear_identity(m).exact_zero) all_zero = false;
        }
        results << json{{"kind", "cofactor"}, {"all_exact_zero", all_zero}}.dump() << "\n";
        json a = json::array();
        a.push_back(make_assertion("cofactor_defect==0", all_zero, all_zero ? 0.0 : 1.0, 0.0));
        mb.add_record("cofactor identity", {{"count", count}}, a, t.ms());
    }

    results.close();
    mb.add_file("results.jsonl");
    return mb.finish(total.ms());
}

}  // namespace ell
