#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace ell {

// CLI flags override the same-named config fields.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> trials;
    std::optional<int> jobs;
};

// Each runner validates its config, executes the experiment sweep, writes
// CSV/SVG/JSON outputs plus manifest.json under the output directory, and
// returns the manifest. Exit-code semantics: manifest["pass"] == true iff
// every assertion passed.
nlohmann::json run_esd(nlohmann::json config, const CliOverrides& overrides = {});
nlohmann::json run_lsv(nlohmann::json config, const CliOverrides& overrides = {});
nlohmann::json run_limit(nlohmann::json config, const CliOverrides& overrides = {});
nlohmann::json run_anticonc(nlohmann::json config, const CliOverrides& overrides = {});

// FNV-1a 64-bit, hex string; used for config hashes and file checksums.
std::string fnv1a64_hex(const std::string& bytes);
std::string file_checksum(const std::string& path);

nlohmann::json load_config(const std::string& path);

}  // namespace ell
