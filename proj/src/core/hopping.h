// Four-well tight-binding model of the low-energy manifold.
//
// Basis order: the two phi-type wells (u, d) at energy +epsilon, then the two
// theta-type wells (l, r) at -epsilon.  Nearest-neighbor hopping -delta_nn
// connects every phi-type well to every theta-type well; next-nearest
// hopping -delta_nnn connects u to d.  The l-r pair is taken as uncoupled,
// which makes two of the four levels exactly analytic: the antisymmetric
// combinations (u - d)/sqrt(2) at epsilon + delta_nnn and (l - r)/sqrt(2) at
// -epsilon.
#pragma once

#include <array>

#include <Eigen/Core>

#include "core/operators.h"

namespace fluxmol {

struct HoppingParams {
    double epsilon = 0.0;    // well detuning (GHz); must be > 0
    double delta_nn = 0.0;   // nearest-neighbor amplitude; >= 0
    double delta_nnn = 0.0;  // next-nearest amplitude; >= 0

    void validate() const;
    // The perturbative forms below assume delta_nn << epsilon.
    bool perturbative_ok() const { return delta_nn < 0.1 * epsilon; }
};

// 4 x 4 model Hamiltonian in the (u, d, l, r) basis.
OperatorMatrix hopping_hamiltonian(const HoppingParams& hp);

// Second-order perturbative levels with their leading eigenvector forms, in
// the order: theta_plus, theta_minus, phi_minus, phi_plus.  theta_minus and
// phi_minus are exact at any coupling.
struct HoppingLevel {
    double energy;
    Eigen::Vector4d vector;  // unnormalized leading form
    const char* name;
};

struct HoppingLevels {
    std::array<HoppingLevel, 4> levels;
    bool perturbative_warning = false;  // set when delta_nn >= epsilon / 10
};

HoppingLevels perturbative_levels(const HoppingParams& hp);

// Whether the symmetric phi combination lies below the antisymmetric one,
// which at second order happens exactly when delta_nnn > delta_nn^2 / epsilon.
struct RegimeClass {
    bool phi_plus_below_phi_minus = false;
};

RegimeClass classify_regime(const HoppingParams& hp);

}  // namespace fluxmol
