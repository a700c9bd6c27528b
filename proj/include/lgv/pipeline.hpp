#pragma once

#include "lgv/types.hpp"

#include <string>
#include <vector>

namespace lgv {

// Validated run configuration. Stages: profile, background, spectrum, index,
// algebra, bosonmap; "all" expands to the full list. Defaults:
// r_max = 12/(e v), m_r = 2048, m_xy = 128, scheme = central4, k = 6,
// tol_zero = 1e-3 e v, seed = 0.
struct RunConfig {
    VortexParams vortex;
    int m_xy = 128;
    int scheme = 4;
    int k = 6;
    double tol_zero = 1e-3;
    uint64_t seed = 0;
    std::vector<std::string> pipeline; // expanded stage list
    std::string output_dir = "out";
    int format_version = 1;
    bool dump_operator = false;

    bool operator==(const RunConfig&) const = default;

    bool wants(const std::string& stage) const;
    std::string to_json() const; // effective config, reparses to an equal RunConfig
};

// Parses a JSON document; every violation (unknown key, bad type, failed
// precondition) is collected and reported together.
RunConfig parse_config(const std::string& text);

struct StageRecord {
    std::string name;
    std::string status; // "ok", "skipped", or "failed: ..."
    double wall_ms = 0.0;
};
struct FileRecord {
    std::string path; // relative to output_dir
    std::string fnv64;
};
struct RunManifest {
    std::string artifact_version;
    int format_version = 1;
    std::string config_hash;
    std::vector<StageRecord> stages;
    std::vector<FileRecord> files;
    bool all_checks_passed = false;
    std::string output_dir;
};

// Executes the requested stages (plus silent dependencies), writes the
// stage outputs, summary.json and manifest.json into config.output_dir.
RunManifest run(const RunConfig& config);

// Plot-ready tables derived from a completed run directory:
//   profiles     -> plot_profiles.csv      (r,f,a)
//   mode_density -> plot_mode_density_XX.csv (x,y,density) per kernel mode
//   spectrum     -> plot_spectrum.csv      (index,sigma)
std::vector<std::string> emit_plot_data(const std::string& output_dir, const std::string& which);

uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_hex_of_file(const std::string& path);

} // namespace lgv
