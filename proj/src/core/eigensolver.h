// Lowest-part eigensolver for the real symmetric circuit Hamiltonians.
//
// Small problems go through the dense LAPACK path; big Kronecker-structured
// ones through a Lanczos iteration with full reorthogonalization that only
// ever touches the operator via matrix-vector products.  Both paths return
// ascending eigenvalues and a deterministic sign convention for the vectors.
#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>

#include "core/operators.h"
#include "core/types.h"

namespace fluxmol {

struct DiagOptions {
    // Problems at or below this dimension are assembled densely.
    int dense_threshold = 1600;
    // Relative Ritz residual target for the iterative path.
    double tol = 1e-10;
    // 0 means min(dim, 1200).
    int max_iter = 0;
    // Seed for the deterministic random start vector.
    std::uint64_t seed = 0x66786d31u;
};

struct Spectrum {
    Eigen::VectorXd eigenvalues;   // ascending, GHz
    Eigen::MatrixXd eigenvectors;  // one column per state, construction basis
    BasisDescriptor basis;

    // Where this spectrum was computed, when it came from a circuit builder
    // that knows; services that need to re-diagonalize at displaced flux
    // (dispersions, dephasing) require it.
    FluxPoint flux{};
    bool has_flux_context = false;

    int k() const { return static_cast<int>(eigenvalues.size()); }
};

// Lowest k eigenpairs of a real symmetric operator.  Throws invalid_input if
// the operator is not symmetric (checked with random probes) or k is out of
// range, numeric_failure if the iteration stalls.
Spectrum diagonalize(const OperatorMatrix& h, int k, const DiagOptions& opts = {});

// <i| op |j> with the operator expressed in the same basis as the spectrum.
std::complex<double> matrix_element(const Spectrum& s, const OperatorMatrix& op, int i, int j);

}  // namespace fluxmol
