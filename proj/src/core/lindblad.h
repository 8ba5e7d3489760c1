// Master-equation dynamics over the truncated eigenstate space.
//
// With jump operators between eigenstates the dissipator couples populations
// only to populations and damps each coherence at half the summed outflow of
// its two states, while the Hamiltonian contributes a pure phase in the
// eigenbasis.  The populations are integrated with an adaptive embedded
// Runge-Kutta scheme; each coherence picks up its exact scalar damping and
// phase factors.  Pure dephasing terms are absent by construction.
#pragma once

#include <vector>

#include <Eigen/Core>

#include "core/noise.h"

namespace fluxmol {

struct DensityTrajectory {
    std::vector<double> times;            // s
    std::vector<Eigen::MatrixXcd> rho;    // density matrix at each time
};

struct EvolveOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
};

// energies_ghz: diagonal of the Hamiltonian in the eigenbasis, GHz.  rho0
// must be Hermitian with unit trace and eigenvalues >= -1e-8; times must be
// non-negative and ascending.
DensityTrajectory lindblad_evolve(const Eigen::VectorXd& energies_ghz, const RateTable& table,
                                  const Eigen::MatrixXcd& rho0, const std::vector<double>& times,
                                  const EvolveOptions& opts = {});

// P at each time: sum of the diagonal over the subspace states.
std::vector<double> subspace_probability(const DensityTrajectory& traj,
                                         const std::vector<int>& subspace);

}  // namespace fluxmol
