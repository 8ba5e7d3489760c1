#include "core/hamiltonian.h"

#include <cmath>

#include "core/errors.h"

namespace fluxmol {

double zeta_frequency(const CircuitParams& p) {
    if (p.e_c < 0.0 || p.e_l < 0.0 || p.e_ls < 0.0)
        throw invalid_input("zeta_frequency: energies must be non-negative");
    return std::sqrt(8.0 * p.e_c * (2.0 * p.e_l + p.e_ls));
}

namespace {

KronTerm identity_factors(size_t n_modes, std::complex<double> coeff) {
    KronTerm t;
    t.coeff = coeff;
    t.factors.assign(n_modes, Eigen::MatrixXd());
    return t;
}

// Single-mode quadratic block a * charge^2 + b * flux^2 using the analytic
// second moments, so a purely quadratic mode stays exactly diagonal.
Eigen::MatrixXd quadratic_block(int n, double ell, double a, double b) {
    return a * momentum_squared(n, ell) + b * position_squared(n, ell);
}

void require_symmetric(const CircuitParams& p, const char* who) {
    if (p.has_disorder())
        throw invalid_input(std::string(who) + ": expects zero element asymmetries; "
                            "use the disordered builder instead");
}

}  // namespace

OperatorMatrix build_full_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                      const BasisTruncation& t) {
    require_symmetric(p, "build_full_hamiltonian");
    flux.validate();
    BasisDescriptor basis = circuit_basis(p, t, CircuitModel::full);
    const auto& mb = basis.modes;

    std::vector<KronTerm> terms;

    // Quadratic single-mode pieces.  The (theta - zeta)^2 arm expands into
    // theta^2 + zeta^2 - 2 theta zeta; the squares are folded into the mode
    // blocks, the cross term is kept separately.
    {
        KronTerm t1 = identity_factors(3, 1.0);
        t1.factors[0] = quadratic_block(mb[0].n, mb[0].ell, 2.0 * p.e_cj, p.e_l);
        terms.push_back(std::move(t1));
        KronTerm t2 = identity_factors(3, 1.0);
        t2.factors[1] = quadratic_block(mb[1].n, mb[1].ell, 2.0 * p.e_cj, p.e_l);
        terms.push_back(std::move(t2));
        KronTerm t3 = identity_factors(3, 1.0);
        t3.factors[2] = quadratic_block(mb[2].n, mb[2].ell, 4.0 * p.e_c, p.e_l + p.e_ls / 2.0);
        terms.push_back(std::move(t3));
    }
    {
        KronTerm tc = identity_factors(3, -2.0 * p.e_l);
        tc.factors[1] = position_matrix(mb[1].n, mb[1].ell);
        tc.factors[2] = position_matrix(mb[2].n, mb[2].ell);
        terms.push_back(std::move(tc));
    }
    {
        PositionTrig tp = trig_of_position(mb[0].n, mb[0].ell, 1.0, flux.phi_c);
        PositionTrig tt = trig_of_position(mb[1].n, mb[1].ell, 1.0, flux.phi_d);
        KronTerm tj = identity_factors(3, -2.0 * p.e_j);
        tj.factors[0] = tp.cos_m;
        tj.factors[1] = tt.cos_m;
        terms.push_back(std::move(tj));
    }
    return OperatorMatrix(basis, std::move(terms));
}

OperatorMatrix build_reduced_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                         const BasisTruncation& t) {
    require_symmetric(p, "build_reduced_hamiltonian");
    flux.validate();
    BasisDescriptor basis = circuit_basis(p, t, CircuitModel::reduced);
    const auto& mb = basis.modes;
    const double stiff = p.e_l * p.e_ls / (2.0 * p.e_l + p.e_ls);

    std::vector<KronTerm> terms;
    {
        KronTerm t1 = identity_factors(2, 1.0);
        t1.factors[0] = quadratic_block(mb[0].n, mb[0].ell, 2.0 * p.e_cj, p.e_l);
        terms.push_back(std::move(t1));
        KronTerm t2 = identity_factors(2, 1.0);
        t2.factors[1] = quadratic_block(mb[1].n, mb[1].ell, 2.0 * p.e_cj, stiff);
        terms.push_back(std::move(t2));
    }
    {
        PositionTrig tp = trig_of_position(mb[0].n, mb[0].ell, 1.0, flux.phi_c);
        PositionTrig tt = trig_of_position(mb[1].n, mb[1].ell, 1.0, flux.phi_d);
        KronTerm tj = identity_factors(2, -2.0 * p.e_j);
        tj.factors[0] = tp.cos_m;
        tj.factors[1] = tt.cos_m;
        terms.push_back(std::move(tj));
    }
    return OperatorMatrix(basis, std::move(terms));
}

OperatorMatrix build_disordered_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                            const BasisTruncation& t, bool exact) {
    p.validate();
    flux.validate();
    BasisDescriptor basis = circuit_basis(p, t, CircuitModel::full);
    const auto& mb = basis.modes;

    // Renormalized prefactors; at leading order (and at zero disorder) they
    // reduce to the bare ones.
    const double kin = exact ? 2.0 * p.e_cj / (1.0 - p.d_cj * p.d_cj) : 2.0 * p.e_cj;
    const double ind = exact ? p.e_l / (1.0 - p.d_l * p.d_l) : p.e_l;

    std::vector<KronTerm> terms;
    {
        KronTerm t1 = identity_factors(3, 1.0);
        t1.factors[0] = quadratic_block(mb[0].n, mb[0].ell, kin, ind);
        terms.push_back(std::move(t1));
        KronTerm t2 = identity_factors(3, 1.0);
        t2.factors[1] = quadratic_block(mb[1].n, mb[1].ell, kin, ind);
        terms.push_back(std::move(t2));
        KronTerm t3 = identity_factors(3, 1.0);
        t3.factors[2] = quadratic_block(mb[2].n, mb[2].ell, 4.0 * p.e_c, ind + p.e_ls / 2.0);
        terms.push_back(std::move(t3));
    }
    {
        KronTerm tc = identity_factors(3, -2.0 * ind);
        tc.factors[1] = position_matrix(mb[1].n, mb[1].ell);
        tc.factors[2] = position_matrix(mb[2].n, mb[2].ell);
        terms.push_back(std::move(tc));
    }

    PositionTrig tp = trig_of_position(mb[0].n, mb[0].ell, 1.0, flux.phi_c);
    PositionTrig tt = trig_of_position(mb[1].n, mb[1].ell, 1.0, flux.phi_d);
    {
        KronTerm tj = identity_factors(3, -2.0 * p.e_j);
        tj.factors[0] = tp.cos_m;
        tj.factors[1] = tt.cos_m;
        terms.push_back(std::move(tj));
    }

    // Asymmetry couplings.  Terms with a vanishing coefficient are dropped so
    // the zero-disorder matrix is literally the symmetric one.
    if (p.d_cj != 0.0) {
        // 2 d_cj kin * n_phi n_theta, with charge = i M per mode: the pair of
        // i factors turns the product into -(M_phi kron M_theta), which is
        // real symmetric.
        KronTerm tk = identity_factors(3, -2.0 * kin * p.d_cj);
        tk.factors[0] = momentum_antisym(mb[0].n, mb[0].ell);
        tk.factors[1] = momentum_antisym(mb[1].n, mb[1].ell);
        terms.push_back(std::move(tk));
    }
    if (p.d_l != 0.0) {
        KronTerm ta = identity_factors(3, 2.0 * ind * p.d_l);
        ta.factors[0] = position_matrix(mb[0].n, mb[0].ell);
        ta.factors[1] = position_matrix(mb[1].n, mb[1].ell);
        terms.push_back(std::move(ta));
        KronTerm tb = identity_factors(3, -2.0 * ind * p.d_l);
        tb.factors[0] = position_matrix(mb[0].n, mb[0].ell);
        tb.factors[2] = position_matrix(mb[2].n, mb[2].ell);
        terms.push_back(std::move(tb));
    }
    if (p.d_ej != 0.0) {
        KronTerm ts = identity_factors(3, -2.0 * p.e_j * p.d_ej);
        ts.factors[0] = tp.sin_m;
        ts.factors[1] = tt.sin_m;
        terms.push_back(std::move(ts));
    }
    return OperatorMatrix(basis, std::move(terms));
}

OperatorMatrix build_hamiltonian(const CircuitParams& p, const FluxPoint& flux,
                                 const BasisTruncation& t, CircuitModel model) {
    if (p.has_disorder()) {
        if (model == CircuitModel::reduced)
            throw invalid_input("the reduced model does not support element asymmetries");
        return build_disordered_hamiltonian(p, flux, t, true);
    }
    return model == CircuitModel::full ? build_full_hamiltonian(p, flux, t)
                                       : build_reduced_hamiltonian(p, flux, t);
}

JunctionParams junction_params(const CircuitParams& p) {
    p.validate();
    JunctionParams jp;
    jp.e_cj1 = p.e_cj / (1.0 - p.d_cj);
    jp.e_cj2 = p.e_cj / (1.0 + p.d_cj);
    jp.e_j1 = p.e_j * (1.0 - p.d_ej);
    jp.e_j2 = p.e_j * (1.0 + p.d_ej);
    return jp;
}

}  // namespace fluxmol
