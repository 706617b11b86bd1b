#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "elliptic_lab/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    std::size_t trials = 0;
    bool trials_set = false;
    int jobs = 0;
    bool jobs_set = false;
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config")->required();
    cmd->add_option("--seed", flags.seed, "Experiment seed (overrides config)")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out, "Output directory (overrides config)");
    cmd->add_option("--trials", flags.trials, "Trial count (overrides config)")
        ->each([&](const std::string&) { flags.trials_set = true; });
    cmd->add_option("--jobs", flags.jobs, "Worker count (overrides config and ELLIPTIC_LAB_JOBS)")
        ->each([&](const std::string&) { flags.jobs_set = true; });
}

ell::CliOverrides overrides_from(const CommonFlags& flags) {
    ell::CliOverrides o;
    if (flags.seed_set) o.seed = flags.seed;
    if (!flags.out.empty()) o.out = flags.out;
    if (flags.trials_set) o.trials = flags.trials;
    if (flags.jobs_set) o.jobs = flags.jobs;
    return o;
}

int run(const std::string& command, const CommonFlags& flags) {
    const nlohmann::json config = ell::load_config(flags.config_path);
    const ell::CliOverrides o = overrides_from(flags);
    nlohmann::json manifest;
    if (command == "esd")
        manifest = ell::run_esd(config, o);
    else if (command == "lsv")
        manifest = ell::run_lsv(config, o);
    else if (command == "limit")
        manifest = ell::run_limit(config, o);
    else
        manifest = ell::run_anticonc(config, o);
    const bool pass = manifest.value("pass", false);
    std::printf("%s: %s (%lld ms)\n", command.c_str(), pass ? "PASS" : "FAIL",
                manifest.value("wall_ms_total", 0ll));
    for (const auto& rec : manifest["records"])
        for (const auto& a : rec["assertions"])
            std::printf("  [%s] %s: %s = %.6g (bound %.6g)\n",
                        a["pass"].get<bool>() ? "ok" : "FAIL",
                        rec["name"].get<std::string>().c_str(),
                        a["name"].get<std::string>().c_str(), a["value"].get<double>(),
                        a["bound"].get<double>());
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elliptic-lab: correlated random matrix experiments"};
    app.require_subcommand(1);

    CommonFlags esd_flags, lsv_flags, limit_flags, anticonc_flags;
    attach_common(app.add_subcommand("esd", "Eigenvalue scatters and elliptic-law metrics"),
                  esd_flags);
    attach_common(app.add_subcommand("lsv", "Least-singular-value tail experiments"), lsv_flags);
    attach_common(app.add_subcommand("limit", "Self-consistent system, densities, potentials"),
                  limit_flags);
    attach_common(app.add_subcommand("anticonc", "Small-ball, GAP, decoupling, dist experiments"),
                  anticonc_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("esd")) return run("esd", esd_flags);
        if (app.got_subcommand("lsv")) return run("lsv", lsv_flags);
        if (app.got_subcommand("limit")) return run("limit", limit_flags);
        if (app.got_subcommand("anticonc")) return run("anticonc", anticonc_flags);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
