#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fluxmol/fluxmol.h"

namespace {

int exit_code(fm_status s) {
    if (s == FM_OK) return 0;
    return s == FM_ERR_NUMERIC ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluxonium-molecule toolkit: spectra, sweet spots, wavefunctions, coherence "
                 "budgets, decay protocols, flux calibration, and spectroscopy fits"};
    app.require_subcommand(1);

    std::string config_path, out_dir, flux_units;
    long long seed = -1;
    int threads = 0;

    app.add_option("-c,--config", config_path, "JSON config document")->required();
    app.add_option("-o,--out", out_dir, "output directory (default: config 'out' or '.')");
    app.add_option("-s,--seed", seed, "seed for stochastic steps")
        ->check(CLI::NonNegativeNumber);
    app.add_option("-t,--threads", threads, "worker threads (default: config 'threads' or 1)")
        ->check(CLI::PositiveNumber);
    app.add_option("--flux-units", flux_units,
                   "how to read flux values in the config: 'rad' or 'two-pi'")
        ->check(CLI::IsMember({"rad", "two-pi"}));

    app.add_subcommand("spectrum",
                       "eigenenergies along a flux trajectory, tracked through crossings")
        ->fallthrough();
    app.add_subcommand("sweetspots", "locate and classify flux sweet spots")->fallthrough();
    app.add_subcommand("wavefunction", "real-space maps of low-lying eigenstates")
        ->fallthrough();
    app.add_subcommand("coherence", "golden-rule rate table and per-state coherence report")
        ->fallthrough();
    app.add_subcommand("decay", "integrate the master equation and fit the decay protocol")
        ->fallthrough();
    app.add_subcommand("calibrate", "fit the voltage-to-flux map from flux-quantum anchors")
        ->fallthrough();
    app.add_subcommand("fit", "fit circuit energies to two-tone peak data")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open " << config_path << "\n";
        return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();

    fm_flux_units units = FM_FLUX_FROM_CONFIG;
    if (flux_units == "rad")
        units = FM_FLUX_RADIANS;
    else if (flux_units == "two-pi")
        units = FM_FLUX_TWO_PI;

    const std::string name = app.get_subcommands().front()->get_name();
    char err[1024];
    fm_status st = fm_run_command(name.c_str(), ss.str().c_str(), out_dir.c_str(), seed,
                                  threads, units, err, sizeof err);
    if (st != FM_OK) {
        std::cerr << "error: " << err << "\n";
        return exit_code(st);
    }
    return 0;
}
