// Core value types: circuit parameters, flux bias, basis truncation.
#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace fluxmol {

// Circuit energy scales in GHz plus the three relative element asymmetries.
// The asymmetries are dimensionless fractions in (-1, 1); zero means a
// perfectly symmetric circuit.
struct CircuitParams {
    double e_j = 0.0;    // Josephson energy of one junction
    double e_l = 0.0;    // inductive energy of one arm inductor
    double e_ls = 0.0;   // inductive energy of the shared inductor
    double e_cj = 0.0;   // charging energy of one junction
    double e_c = 0.0;    // charging energy of the common mode
    double d_cj = 0.0;   // junction capacitance asymmetry
    double d_l = 0.0;    // arm inductance asymmetry
    double d_ej = 0.0;   // Josephson energy asymmetry

    // Throws invalid_input unless all five energies are strictly positive and
    // every asymmetry lies strictly inside (-1, 1).  Parsing does not validate,
    // so a freshly loaded object must pass through here before it is used to
    // build a Hamiltonian.
    void validate() const;

    bool has_disorder() const {
        return d_cj != 0.0 || d_l != 0.0 || d_ej != 0.0;
    }
};

void to_json(nlohmann::json& j, const CircuitParams& p);
void from_json(const nlohmann::json& j, CircuitParams& p);

// External flux bias in radians: common (phi_c) and differential (phi_d).
struct FluxPoint {
    double phi_c = 0.0;
    double phi_d = 0.0;

    void validate() const;  // rejects non-finite values
};

// Per-mode oscillator basis sizes.  n_zeta is ignored by the two-mode model
// but is still required to be a sane value so one truncation object can be
// passed around uniformly.
struct BasisTruncation {
    int n_phi = 35;
    int n_theta = 35;
    int n_zeta = 6;

    void validate() const;  // every cutoff >= 4, product within the memory guard
    long total_dim() const { return (long)n_phi * n_theta * n_zeta; }
};

void to_json(nlohmann::json& j, const BasisTruncation& t);
void from_json(const nlohmann::json& j, BasisTruncation& t);

enum class CircuitModel : std::uint8_t {
    full,     // three modes: phi, theta, zeta
    reduced,  // two modes: phi, theta with the common mode folded into the
              // theta stiffness
};

CircuitModel model_from_string(const std::string& s);   // "full" | "reduced"
const char* to_string(CircuitModel m);

}  // namespace fluxmol
