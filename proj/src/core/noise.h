// Noise spectral densities, golden-rule transition rates, and first-order
// flux dephasing.
//
// Three loss channels are modeled.  Capacitive loss couples through the
// junction charges, inductive loss through the branch fluxes of the three
// inductors, quasiparticle tunneling through the half-junction-phase sines.
// Every physical element is treated as an independent bath, so per-element
// rates add.  Spectral densities take angular frequency in rad/s and return
// values such that rate = |matrix element|^2 S(omega) / hbar^2 is in 1/s.
#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "core/eigensolver.h"
#include "core/operators.h"
#include "core/types.h"

namespace fluxmol {

struct NoiseParams {
    double temperature = 0.05;   // K
    double q_cap_ref = 1e6;      // capacitive quality factor at 2 pi * 6 GHz
    double q_ind_ref = 5e8;      // inductive quality factor at 2 pi * 0.5 GHz
    double gap_delta = 3.4e-4;   // superconducting gap, eV
    double x_qp = 1e-8;          // quasiparticle density fraction
    // 1/f flux-noise amplitudes per flux axis, in radians (1e-6 * 2 pi is one
    // micro flux quantum).
    double flux_noise_amp_c = 2.0e-6 * 3.14159265358979323846;
    double flux_noise_amp_d = 2.0e-6 * 3.14159265358979323846;
    double omega_ir = 2.0 * 3.14159265358979323846;  // infrared cutoff, rad/s
    double ramsey_time = 1e-5;                       // s

    void validate() const;
};

void to_json(nlohmann::json& j, const NoiseParams& p);
void from_json(const nlohmann::json& j, NoiseParams& p);

// K0(x) * sinh(x) without overflow for large x.
double k0_sinh_product(double x);

// coth(hbar omega / 2 kB T) + 1, evaluated at signed omega with the stable
// exponential forms.  Emission (omega > 0) tends to 2 at low temperature,
// absorption decays like exp(-hbar|omega|/kB T).
double thermal_factor(double omega, double temperature);

double q_cap_at(double omega, const NoiseParams& noise);
double q_ind_at(double omega, const NoiseParams& noise);

// Element values implied by the circuit energies.
double junction_capacitance(const CircuitParams& p);  // F
double arm_inductance(const CircuitParams& p);        // H, phi0^2 / E_L

double s_cap(double omega, const CircuitParams& p, const NoiseParams& noise);
double s_ind(double omega, const CircuitParams& p, const NoiseParams& noise);
// Real part of the quasiparticle admittance (always positive; magnitude
// factors at |omega|).
double re_y_qp(double omega, const CircuitParams& p, const NoiseParams& noise);
double s_qp(double omega, const CircuitParams& p, const NoiseParams& noise);

enum class NoiseChannel { capacitive = 0, inductive = 1, quasiparticle = 2 };
constexpr int n_channels = 3;
const char* to_string(NoiseChannel c);

// The coupling operators of one channel on the given basis, with their
// physical prefactors (coulombs for charge coupling, webers for flux).  The
// reduced basis drops the common-mode flux from the inductive operators; its
// ground-state expectation vanishes and the correction is second order in
// the mode-elimination parameter.
std::vector<OperatorMatrix> channel_operators(NoiseChannel c, const BasisDescriptor& basis);

struct GoldenRate {
    double rate = 0.0;       // 1/s
    bool unresolved = false; // transition too close to degenerate to evaluate
};

GoldenRate golden_rule_rate(const Spectrum& s, int i, int j, NoiseChannel c,
                            const CircuitParams& p, const NoiseParams& noise);

// All transition rates among the lowest k states, split by channel.
// gamma[channel](i, j) is the i -> j rate in 1/s; diagonals are zero.
struct RateTable {
    Eigen::VectorXd energies;  // GHz, ascending
    std::array<Eigen::MatrixXd, n_channels> gamma;
    std::vector<std::pair<int, int>> unresolved;

    int k() const { return static_cast<int>(energies.size()); }
    double total(int i, int j) const;
    void validate() const;  // non-negative entries, zero diagonal
};

RateTable build_rate_table(const Spectrum& s, int k, const CircuitParams& p,
                           const NoiseParams& noise, int threads = 1);

// Total depolarization rate out of state n, all channels and destinations.
double state_rate(const RateTable& t, int n);
// Sum of the two direct rates between the logical pair.
double logical_rate(const RateTable& t, int i_l, int j_l);
// Depolarization-limited coherence rate between the logical pair: half the
// total outflow from each.
double gamma2(const RateTable& t, int i_l, int j_l);

// First-order 1/f flux dephasing of the i <-> j transition:
//   rate = sum over the two flux axes of
//          A_axis * sqrt|ln(2 omega_ir t)| * |dE_ij/dflux| * 2 pi 1e9.
// The spectrum must carry flux context.  `log_warning` is set when
// omega_ir * t >= 1/2, where the log factor changes sign.
struct DephasingResult {
    double rate = 0.0;  // 1/s
    bool unresolved = false;
    bool log_warning = false;
};

DephasingResult flux_dephasing_rate(const Spectrum& s, const CircuitParams& p, int i, int j,
                                    const NoiseParams& noise, const DiagOptions& diag = {});

}  // namespace fluxmol
