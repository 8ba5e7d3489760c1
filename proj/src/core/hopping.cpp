#include "core/hopping.h"

#include <cmath>

#include "core/errors.h"

namespace fluxmol {

void HoppingParams::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw invalid_input("hopping model: epsilon must be positive");
    if (delta_nn < 0.0 || delta_nnn < 0.0 || !std::isfinite(delta_nn) ||
        !std::isfinite(delta_nnn))
        throw invalid_input("hopping model: amplitudes must be non-negative");
}

OperatorMatrix hopping_hamiltonian(const HoppingParams& hp) {
    hp.validate();
    Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
    h(0, 0) = hp.epsilon;
    h(1, 1) = hp.epsilon;
    h(2, 2) = -hp.epsilon;
    h(3, 3) = -hp.epsilon;
    for (int a = 0; a < 2; ++a)
        for (int b = 2; b < 4; ++b) {
            h(a, b) = -hp.delta_nn;
            h(b, a) = -hp.delta_nn;
        }
    h(0, 1) = -hp.delta_nnn;
    h(1, 0) = -hp.delta_nnn;
    return OperatorMatrix::from_dense(h);
}

HoppingLevels perturbative_levels(const HoppingParams& hp) {
    hp.validate();
    const double eps = hp.epsilon;
    const double d = hp.delta_nn;
    const double dn = hp.delta_nnn;
    const double shift = 2.0 * d * d / eps;
    const double r = d / eps;

    HoppingLevels out;
    out.perturbative_warning = !hp.perturbative_ok();
    out.levels[0] = {-eps - shift, Eigen::Vector4d(r, r, 1.0, 1.0), "theta_plus"};
    out.levels[1] = {-eps, Eigen::Vector4d(0.0, 0.0, -1.0, 1.0), "theta_minus"};
    out.levels[2] = {eps + dn, Eigen::Vector4d(1.0, -1.0, 0.0, 0.0), "phi_minus"};
    out.levels[3] = {eps - dn + shift, Eigen::Vector4d(1.0, 1.0, -r, -r), "phi_plus"};
    return out;
}

RegimeClass classify_regime(const HoppingParams& hp) {
    hp.validate();
    RegimeClass rc;
    rc.phi_plus_below_phi_minus = hp.delta_nnn > hp.delta_nn * hp.delta_nn / hp.epsilon;
    return rc;
}

}  // namespace fluxmol
