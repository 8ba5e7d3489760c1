// Harmonic-oscillator mode operators and Kronecker-structured matrices.
//
// Each circuit mode lives in a truncated oscillator basis with its own
// oscillator length ell, chosen so the quadratic part of that mode's
// Hamiltonian is diagonal.  With x = ell (a + a^dag) / sqrt(2) the position
// matrix is real symmetric tridiagonal, and the conjugate variable is
// n = i M with M real antisymmetric, so every operator this library builds
// can be represented with real factors (an overall factor of i at most, and
// those always appear in pairs).
//
// A multi-mode operator is a sum of Kronecker products of per-mode factors.
// Matrices are only assembled densely on demand; matrix-vector products are
// evaluated factor by factor, which is what keeps the three-mode model
// affordable.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "core/types.h"

namespace fluxmol {

struct ModeBasis {
    int n = 0;          // number of retained oscillator levels
    double ell = 1.0;   // oscillator length (dimensionless flux units)
};

struct BasisDescriptor {
    CircuitModel model = CircuitModel::reduced;
    bool generic = false;                 // synthetic basis, no circuit attached
    std::vector<ModeBasis> modes;         // order: phi, theta [, zeta]

    long dim() const;
    bool compatible(const BasisDescriptor& other) const;

    static BasisDescriptor generic_single(int n);
};

// Mode ordering inside the flattened state vector: phi outermost, zeta
// innermost, i.e. index = (i_phi * n_theta + i_theta) * n_zeta + i_zeta.

struct KronTerm {
    std::complex<double> coeff{1.0, 0.0};
    // One factor per mode; an empty (0 x 0) matrix stands for the identity.
    std::vector<Eigen::MatrixXd> factors;
};

class OperatorMatrix {
  public:
    OperatorMatrix() = default;
    OperatorMatrix(BasisDescriptor basis, std::vector<KronTerm> terms);

    // Single dense block on a generic basis; used for small model systems.
    static OperatorMatrix from_dense(const Eigen::MatrixXd& m);

    const BasisDescriptor& basis() const { return basis_; }
    const std::vector<KronTerm>& terms() const { return terms_; }
    long dim() const { return basis_.dim(); }
    bool real_coeffs() const;

    // y = A x for real A (throws if any coefficient has an imaginary part).
    void apply_real(const double* x, double* y) const;
    // y = A^T x; cheap because transposing a Kronecker product transposes
    // the factors.
    void apply_transpose_real(const double* x, double* y) const;

    Eigen::MatrixXd dense_real() const;
    Eigen::MatrixXcd dense_complex() const;

    // ||A - A^dag||_F / max(1, ||A||_F), assembled densely; test helper, not
    // meant for big bases.
    double hermiticity_defect() const;

    // sum over terms of coeff * v^T (term factors) w for real vectors v, w.
    std::complex<double> bilinear(const Eigen::VectorXd& v, const Eigen::VectorXd& w) const;

  private:
    BasisDescriptor basis_;
    std::vector<KronTerm> terms_;

    void apply_term_factors(const KronTerm& t, bool transpose, const double* x, double* y,
                            std::vector<double>& scratch) const;
};

// --- single-mode building blocks -------------------------------------------

// x = ell (a + a^dag) / sqrt(2): symmetric tridiagonal.
Eigen::MatrixXd position_matrix(int n, double ell);

// The real antisymmetric M with charge = i M; sign convention fixed by
// [x, charge] = i on the interior levels.
Eigen::MatrixXd momentum_antisym(int n, double ell);

// Analytic second moments:  x^2 and n^2 projected onto the retained levels.
// Using the analytic forms (rather than squaring the truncated matrices)
// keeps a purely quadratic Hamiltonian exactly diagonal at any cutoff.
Eigen::MatrixXd position_squared(int n, double ell);
Eigen::MatrixXd momentum_squared(int n, double ell);

// cos(scale * x + shift) and sin(scale * x + shift) through the spectral
// decomposition of the truncated position matrix.
struct PositionTrig {
    Eigen::MatrixXd cos_m;
    Eigen::MatrixXd sin_m;
};
PositionTrig trig_of_position(int n, double ell, double scale, double shift);

// --- circuit bases and lifted operators ------------------------------------

// Oscillator lengths per mode, chosen to diagonalize the quadratic part:
//   full model:    ell_phi = ell_theta = (2 E_CJ / E_L)^(1/4),
//                  ell_zeta = (4 E_C / (E_L + E_Ls / 2))^(1/4)
//   reduced model: ell_theta uses the series-combination stiffness
//                  E_L E_Ls / (2 E_L + E_Ls) instead of E_L.
BasisDescriptor circuit_basis(const CircuitParams& p, const BasisTruncation& t,
                              CircuitModel model);

// Flux and charge operators for every mode of the basis, lifted to the full
// tensor space.  Charge operators carry the factor of i in their coefficient.
struct ModeOperatorSet {
    OperatorMatrix phi, theta;      // flux variables
    OperatorMatrix n_phi, n_theta;  // conjugate charges
    OperatorMatrix zeta, n_zeta;    // empty (dim 0) in the reduced model
};
ModeOperatorSet operator_set(const BasisDescriptor& basis);

// Lift a single-mode matrix to the tensor space of `basis` at mode index m.
OperatorMatrix lift_single(const BasisDescriptor& basis, int mode,
                           const Eigen::MatrixXd& factor, std::complex<double> coeff = 1.0);

}  // namespace fluxmol
