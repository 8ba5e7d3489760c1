// The command layer behind the CLI and the shared-library entry point.  Each
// command reads its section of one JSON config document, runs the
// corresponding core services, and writes plot-ready CSV plus a
// schema-tagged JSON artifact into the output directory.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace fluxmol {

struct RunSettings {
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    // When set, flux values in the config are multiples of 2 pi instead of
    // radians.  Outputs are always radians.
    bool flux_two_pi = false;
};

// Optional top-level config keys ("out", "seed", "threads", "flux_units")
// seed the settings; callers then override with whatever was passed
// explicitly on the command line.
RunSettings settings_from_config(const nlohmann::json& cfg);

std::vector<std::string> command_names();

void run_spectrum(const nlohmann::json& cfg, const RunSettings& rs);
void run_sweetspots(const nlohmann::json& cfg, const RunSettings& rs);
void run_wavefunction(const nlohmann::json& cfg, const RunSettings& rs);
void run_coherence(const nlohmann::json& cfg, const RunSettings& rs);
void run_decay(const nlohmann::json& cfg, const RunSettings& rs);
void run_calibrate(const nlohmann::json& cfg, const RunSettings& rs);
void run_fit(const nlohmann::json& cfg, const RunSettings& rs);

// Dispatch by subcommand name after creating the output directory.
void run_command(const std::string& name, const nlohmann::json& cfg, const RunSettings& rs);

}  // namespace fluxmol
