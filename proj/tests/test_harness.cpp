#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "elliptic_lab/harness.hpp"

using namespace ell;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("elab_harness_" + tag);
    fs::remove_all(dir);
    return dir;
}

json small_esd_config(const fs::path& out) {
    return json{{"seed", 7},
                {"out", out.string()},
                {"trials", 2},
                {"grid", 9},
                {"inflation", 1.05},
                {"ensemble",
                 {{"n", 60}, {"pair", {{"kind", "gaussian_real"}, {"rho", 0.5}}}}},
                {"sweep", {{"rho", {0.5}}, {"n", {60}}}},
                {"assertions", {{"inside_fraction_min", 0.5}, {"discrepancy_mean_max", 0.9}}}};
}

}  // namespace

TEST_CASE("esd runner: manifest, files, checksums") {
    const fs::path out = fresh_dir("esd");
    const json manifest = run_esd(small_esd_config(out));
    CHECK(manifest.at("pass").get<bool>());
    CHECK(manifest.at("command") == "esd");
    CHECK(fs::exists(out / "manifest.json"));
    // Every listed file exists and its checksum matches.
    for (const auto& f : manifest.at("files")) {
        const fs::path p = out / f.at("path").get<std::string>();
        CHECK(fs::exists(p));
        CHECK(file_checksum(p.string()) == f.at("checksum_fnv1a64").get<std::string>());
    }
    fs::remove_all(out);
}

TEST_CASE("esd runner: byte-identical outputs for a fixed seed") {
    const fs::path out1 = fresh_dir("esd_rep1"), out2 = fresh_dir("esd_rep2");
    run_esd(small_esd_config(out1));
    run_esd(small_esd_config(out2));
    for (const auto& entry : fs::directory_iterator(out1)) {
        if (entry.path().extension() != ".csv") continue;
        const fs::path other = out2 / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("esd runner: outputs do not depend on the worker count") {
    const fs::path out1 = fresh_dir("esd_j1"), out4 = fresh_dir("esd_j4");
    json c1 = small_esd_config(out1);
    c1["jobs"] = 1;
    json c4 = small_esd_config(out4);
    c4["jobs"] = 4;
    run_esd(c1);
    run_esd(c4);
    CHECK(slurp(out1 / "summary.csv") == slurp(out4 / "summary.csv"));
    for (const auto& entry : fs::directory_iterator(out1)) {
        if (entry.path().extension() != ".csv") continue;
        CHECK(slurp(entry.path()) == slurp(out4 / entry.path().filename()));
    }
    fs::remove_all(out1);
    fs::remove_all(out4);
}

TEST_CASE("esd runner: validation failures") {
    json bad = small_esd_config(fresh_dir("esd_bad"));
    bad["sweep"]["rho"] = json::array();
    CHECK_THROWS_AS(run_esd(bad), std::invalid_argument);
    json noseed = small_esd_config(fresh_dir("esd_noseed"));
    noseed.erase("seed");
    CHECK_THROWS_AS(run_esd(noseed), std::invalid_argument);
}

TEST_CASE("cli overrides take precedence") {
    const fs::path out = fresh_dir("esd_override");
    json config = small_esd_config(fresh_dir("esd_ignored"));
    CliOverrides o;
    o.out = out.string();
    o.trials = std::size_t{1};
    const json manifest = run_esd(config, o);
    CHECK(manifest.at("config").at("out") == out.string());
    CHECK(manifest.at("config").at("trials") == 1);
    fs::remove_all(out);
}

TEST_CASE("lsv runner") {
    const fs::path out = fresh_dir("lsv");
    const json config{{"seed", 3},
                      {"out", out.string()},
                      {"trials", 150},
                      {"ensemble",
                       {{"n", 30}, {"pair", {{"kind", "gaussian_real"}, {"rho", 0.0}}}}},
                      {"thresholds", {1e-8, 1e-2}},
                      {"assertions", {{"tail_p_max", 0.05}}}};
    const json manifest = run_lsv(config);
    CHECK(manifest.at("pass").get<bool>());
    CHECK(fs::exists(out / "tail.csv"));
    fs::remove_all(out);
}

TEST_CASE("limit runner: solver sweep plus density") {
    const fs::path out = fresh_dir("limit");
    const json config{
        {"seed", 5},
        {"out", out.string()},
        {"rho", 0.0},
        {"ensemble", {{"n", 60}, {"pair", {{"kind", "gaussian_real"}, {"rho", 0.0}}}}},
        {"z_points", {{0.0, 0.0}}},
        {"alpha_points", {{0.0, 2.0}}},
        {"empirical", {{"n", 60}, {"tol", 0.35}, {"min_im_alpha", 0.5}}},
        {"density",
         {{"lo", -2.5}, {"hi", 2.5}, {"step", 0.05}, {"epsilon", 1e-3}, {"mass_tol", 5e-3},
          {"z_points", {{0.0, 0.0}}}}}};
    const json manifest = run_limit(config);
    CHECK(manifest.at("pass").get<bool>());
    CHECK(fs::exists(out / "stu.csv"));
    CHECK(fs::exists(out / "nu_z_0.csv"));
    fs::remove_all(out);
}

TEST_CASE("anticonc runner") {
    const fs::path out = fresh_dir("anticonc");
    const json config{{"seed", 9},
                      {"out", out.string()},
                      {"small_ball",
                       {{"n", 10}, {"beta", 0.5}, {"trials", 4000},
                        {"expect", 0.24609375}, {"tol", 1e-12}}},
                      {"cofactor", {{"count", 10}, {"max_n", 4}}}};
    const json manifest = run_anticonc(config);
    CHECK(manifest.at("pass").get<bool>());
    CHECK(fs::exists(out / "results.jsonl"));
    fs::remove_all(out);
}

TEST_CASE("config hash is stable and checksum helper is FNV-1a") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    const json c1 = small_esd_config("x");
    const json c2 = small_esd_config("x");
    CHECK(fnv1a64_hex(c1.dump()) == fnv1a64_hex(c2.dump()));
}
