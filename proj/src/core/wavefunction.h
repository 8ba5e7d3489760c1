// Real-space wavefunctions on a flux grid, well weights, and the assignment
// of the two logical states.
#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

#include "core/eigensolver.h"

namespace fluxmol {

struct GridSpec {
    double phi_min, phi_max;
    double theta_min, theta_max;
    int n_phi = 241;
    int n_theta = 241;

    static GridSpec default_span();  // +-4 pi, 241 points per axis
    void validate() const;
};

// psi(phi, theta) for one eigenstate of a two-mode spectrum.  Amplitudes are
// stored as complex for generality although eigenvectors of the real
// symmetric problem give purely real values.
struct WavefunctionGrid {
    Eigen::VectorXd phi_axis, theta_axis;
    Eigen::MatrixXcd amp;  // amp(i, j) = psi(phi_axis[i], theta_axis[j])
    int state = 0;

    double norm() const;  // Riemann-sum L2 norm over the grid
};

// Requires a two-mode spectrum and a grid at least as fine as a quarter
// oscillator length per axis.
WavefunctionGrid wavefunction(const Spectrum& s, int state, const GridSpec& grid);

// Which logical basis state each low-lying eigenstate supplies.
//
// The two logical states are the lowest pair with essentially disjoint
// spatial support: the ground state plus the lowest state whose shared
// support weight with it stays below a fixed threshold.  When no state
// qualifies, states are classified instead by whether their weight sits in
// the theta-type wells (on the theta axis away from the origin) or the
// phi-type wells, and the lowest state of the opposite type is chosen.  If
// that also fails the first excited state is used.  `method` records which
// rule fired: "support", "well-type", or "energy-order".
struct LogicalAssignment {
    int zero_l = 0;
    int one_l = 1;
    std::string method;
    std::array<char, 4> well_type{};  // 't', 'p', or 'm' (mixed), per state
};

LogicalAssignment assign_logical_states(const Spectrum& s, const GridSpec& grid);

}  // namespace fluxmol
