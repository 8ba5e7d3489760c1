// Flux-space services: spectra along trajectories, state tracking, flux
// dispersion of transition energies, sweet-spot search, avoided crossings.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/eigensolver.h"
#include "core/types.h"

namespace fluxmol {

// Piecewise-linear path through flux space.  Each segment contributes
// samples_per_segment points; waypoint endpoints are shared, so the total
// sample count is (waypoints - 1) * (samples_per_segment - 1) + 1.
struct FluxTrajectory {
    std::vector<FluxPoint> waypoints;
    int samples_per_segment = 2;

    void validate() const;               // >= 2 waypoints, >= 2 samples per segment
    std::vector<FluxPoint> sample() const;
};

struct SweepOptions {
    CircuitModel model = CircuitModel::reduced;
    BasisTruncation trunc{};
    DiagOptions diag{};
    int threads = 1;
};

// Spectra along a trajectory plus a label permutation that follows each state
// by eigenvector overlap from one sample to the next.  spectra[s] stays in
// ascending energy order; tracked[s][slot] gives the ascending-order index
// that slot's state occupies at sample s (identity at the first sample).
struct SweepResult {
    std::vector<FluxPoint> points;
    std::vector<Spectrum> spectra;
    std::vector<std::vector<int>> tracked;
};

SweepResult sweep_trajectory(const CircuitParams& p, const FluxTrajectory& traj, int k,
                             const SweepOptions& opts);

// Diagonalize the circuit at one flux point, stamping the flux context the
// dispersion and dephasing services need.
Spectrum circuit_spectrum(const CircuitParams& p, const FluxPoint& flux, int k,
                          const SweepOptions& opts);

// Flux gradient of the transition energy E_j - E_i at a point, by central
// differences with one Richardson extrapolation step.  `unresolved` is set
// when the two states are degenerate to within ten times the solver
// tolerance, in which case the gradient of their splitting is below the
// numerical floor and should not be trusted.
struct DispersionResult {
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();  // d E_ij / d(phi_c, phi_d), GHz/rad
    bool unresolved = false;
};

struct DispersionOptions {
    double step = 1e-3;  // rad, clamped to [1e-4, 1e-1]
    CircuitModel model = CircuitModel::reduced;
    BasisTruncation trunc{};
    DiagOptions diag{};
};

DispersionResult flux_dispersion(const CircuitParams& p, const FluxPoint& flux, int i, int j,
                                 const DispersionOptions& opts);

// Gradients of every pair among the lowest k states from one shared stencil
// (eight diagonalizations regardless of k).  pair (i, j) with i < j is stored
// at result[j * (j - 1) / 2 + i].
std::vector<DispersionResult> flux_dispersion_all(const CircuitParams& p, const FluxPoint& flux,
                                                  int k, const DispersionOptions& opts);

// A flux point where every transition among the lowest `n_levels` states is
// first-order insensitive to both flux components.
struct SweetSpot {
    FluxPoint flux;
    std::string label;     // "I", "I'", "II", "III", or "other"
    double residual = 0.0; // max over pairs and flux components of |dE/dflux|
};

struct SweetSpotOptions {
    int grid = 21;          // coarse scan resolution per axis
    double tol = 1e-4;      // GHz/rad residual target for refinement
    int n_levels = 4;
    CircuitModel model = CircuitModel::reduced;
    BasisTruncation trunc{};
    DiagOptions diag{};
    // Cheaper truncation used during the scan and descent; the final residual
    // is evaluated at the caller truncation above.  Flux-lattice symmetry
    // pins the true optima independently of cutoff, which is what makes the
    // two-stage scheme safe.
    BasisTruncation search_trunc{16, 16, 4};
    int threads = 1;
};

// Search region [c0, c1] x [d0, d1]; must span at least 2 pi in each
// direction.
std::vector<SweetSpot> find_sweet_spots(const CircuitParams& p, double c0, double c1, double d0,
                                        double d1, const SweetSpotOptions& opts);

// Local minima of the separation between adjacent energy levels along a
// sweep, refined by a parabola through the squared separation (exact for the
// two-level avoided-crossing form).
struct CrossingInfo {
    double sample_pos = 0.0;  // fractional index into the sweep samples
    FluxPoint flux;
    int slot_a = 0, slot_b = 0;  // tracked labels of the two states involved
    double gap = 0.0;            // GHz
};

std::vector<CrossingInfo> avoided_crossing_gaps(const SweepResult& sweep);

}  // namespace fluxmol
