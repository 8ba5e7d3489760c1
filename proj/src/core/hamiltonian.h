// Circuit Hamiltonians in the oscillator product basis.
//
// The circuit has two junction modes (phi: common, theta: differential) and
// one harmonic common mode (zeta) coupled to theta through the shared
// inductor.  All energies are in GHz.  The external flux enters only through
// the junction term -2 E_J cos(phi + phi_c) cos(theta + phi_d), which in the
// product basis collapses to a single Kronecker term built from spectral
// cosines and sines of the truncated flux operators.
#pragma once

#include "core/operators.h"
#include "core/types.h"

namespace fluxmol {

// Small-oscillation frequency of the decoupled common mode,
// sqrt(8 E_C (2 E_L + E_Ls)), in GHz.  Accepts e_c = 0 (returns 0) so it can
// be used on partially specified parameter sets.
double zeta_frequency(const CircuitParams& p);

// Three-mode Hamiltonian of the symmetric circuit.  Requires zero disorder.
OperatorMatrix build_full_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                      const BasisTruncation& t);

// Two-mode Hamiltonian with the common mode eliminated: the theta stiffness
// becomes the series combination E_L E_Ls / (2 E_L + E_Ls).  Requires zero
// disorder.
OperatorMatrix build_reduced_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                         const BasisTruncation& t);

// Three-mode Hamiltonian with element asymmetries.  With `exact` the kinetic
// and inductive prefactors carry their 1/(1 - d^2) renormalizations; without
// it only the leading-order asymmetry couplings are added to the symmetric
// circuit.  At zero disorder both variants coincide with the symmetric
// three-mode Hamiltonian term for term.
OperatorMatrix build_disordered_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                            const BasisTruncation& t, bool exact = true);

OperatorMatrix build_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                 const BasisTruncation& t, CircuitModel model);

// Per-junction parameters implied by the asymmetries:
//   E_CJ1 = E_CJ / (1 - d_cj), E_CJ2 = E_CJ / (1 + d_cj),
//   E_J1  = E_J (1 - d_ej),    E_J2  = E_J (1 + d_ej).
struct JunctionParams {
    double e_cj1, e_cj2;
    double e_j1, e_j2;
};
JunctionParams junction_params(const CircuitParams& p);

}  // namespace fluxmol
