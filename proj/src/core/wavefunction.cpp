#include "core/wavefunction.h"

#include <cmath>

#include "core/constants.h"
#include "core/errors.h"

namespace fluxmol {

GridSpec GridSpec::default_span() {
    const double s = 4.0 * constants::pi;
    return GridSpec{-s, s, -s, s, 241, 241};
}

void GridSpec::validate() const {
    if (!(phi_max > phi_min) || !(theta_max > theta_min))
        throw invalid_input("wavefunction grid: axis bounds must be increasing");
    if (n_phi < 2 || n_theta < 2)
        throw invalid_input("wavefunction grid: need at least two points per axis");
}

namespace {

Eigen::VectorXd linspace(double lo, double hi, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

// Oscillator eigenfunctions evaluated on an axis: row k holds psi_k at every
// grid point.  Stable three-term recurrence on the normalized functions.
Eigen::MatrixXd basis_on_axis(int nmax, double ell, const Eigen::VectorXd& axis) {
    const int np = static_cast<int>(axis.size());
    Eigen::MatrixXd b(nmax, np);
    const double root = 1.0 / (std::pow(constants::pi, 0.25) * std::sqrt(ell));
    for (int j = 0; j < np; ++j) {
        const double u = axis[j] / ell;
        b(0, j) = root * std::exp(-u * u / 2.0);
        if (nmax > 1) b(1, j) = std::sqrt(2.0) * u * b(0, j);
        for (int k = 2; k < nmax; ++k)
            b(k, j) = std::sqrt(2.0 / k) * u * b(k - 1, j) - std::sqrt((k - 1.0) / k) * b(k - 2, j);
    }
    return b;
}

void check_resolution(const GridSpec& g, const BasisDescriptor& basis) {
    const double dphi = (g.phi_max - g.phi_min) / (g.n_phi - 1);
    const double dtheta = (g.theta_max - g.theta_min) / (g.n_theta - 1);
    if (dphi > basis.modes[0].ell / 4.0 || dtheta > basis.modes[1].ell / 4.0)
        throw invalid_input("wavefunction grid: spacing exceeds a quarter oscillator length");
}

Eigen::MatrixXd real_amplitude(const Spectrum& s, int state, const GridSpec& grid) {
    const int n_phi = s.basis.modes[0].n;
    const int n_theta = s.basis.modes[1].n;
    Eigen::MatrixXd bp = basis_on_axis(n_phi, s.basis.modes[0].ell,
                                       linspace(grid.phi_min, grid.phi_max, grid.n_phi));
    Eigen::MatrixXd bt = basis_on_axis(n_theta, s.basis.modes[1].ell,
                                       linspace(grid.theta_min, grid.theta_max, grid.n_theta));
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        s.eigenvectors.col(state).data(), n_phi, n_theta);
    return bp.transpose() * (c * bt);
}

}  // namespace

double WavefunctionGrid::norm() const {
    const double dphi = phi_axis[1] - phi_axis[0];
    const double dtheta = theta_axis[1] - theta_axis[0];
    return std::sqrt(amp.cwiseAbs2().sum() * dphi * dtheta);
}

WavefunctionGrid wavefunction(const Spectrum& s, int state, const GridSpec& grid) {
    grid.validate();
    if (s.basis.modes.size() != 2)
        throw invalid_input("wavefunction: real-space maps are defined for two-mode spectra");
    if (state < 0 || state >= s.k())
        throw invalid_input("wavefunction: state index out of range");
    check_resolution(grid, s.basis);

    WavefunctionGrid out;
    out.phi_axis = linspace(grid.phi_min, grid.phi_max, grid.n_phi);
    out.theta_axis = linspace(grid.theta_min, grid.theta_max, grid.n_theta);
    out.amp = real_amplitude(s, state, grid).cast<std::complex<double>>();
    out.state = state;
    return out;
}

LogicalAssignment assign_logical_states(const Spectrum& s, const GridSpec& grid) {
    grid.validate();
    if (s.basis.modes.size() != 2)
        throw invalid_input("logical assignment: defined for two-mode spectra");
    if (s.k() < 2) throw invalid_input("logical assignment: need at least two states");
    check_resolution(grid, s.basis);

    const int n_states = std::min(4, s.k());
    const double dphi = (grid.phi_max - grid.phi_min) / (grid.n_phi - 1);
    const double dtheta = (grid.theta_max - grid.theta_min) / (grid.n_theta - 1);
    const double cell = dphi * dtheta;
    Eigen::VectorXd phi_ax = linspace(grid.phi_min, grid.phi_max, grid.n_phi);
    Eigen::VectorXd theta_ax = linspace(grid.theta_min, grid.theta_max, grid.n_theta);

    std::vector<Eigen::MatrixXd> dens(n_states);  // |psi|, grid-normalized
    LogicalAssignment la;
    for (int st = 0; st < n_states; ++st) {
        Eigen::MatrixXd a = real_amplitude(s, st, grid);
        const double nrm = std::sqrt(a.squaredNorm() * cell);
        dens[st] = a.cwiseAbs() / std::max(nrm, 1e-300);

        // Probability weight in the theta-type wells (|theta| > |phi|) versus
        // the phi-type wells.
        double wt = 0.0, wp = 0.0;
        for (int i = 0; i < grid.n_phi; ++i) {
            for (int j = 0; j < grid.n_theta; ++j) {
                const double w = dens[st](i, j) * dens[st](i, j) * cell;
                if (std::abs(theta_ax[j]) > std::abs(phi_ax[i]))
                    wt += w;
                else if (std::abs(phi_ax[i]) > std::abs(theta_ax[j]))
                    wp += w;
            }
        }
        la.well_type[st] = (wt > 2.0 / 3.0) ? 't' : (wp > 2.0 / 3.0) ? 'p' : 'm';
    }

    const double disjoint_threshold = 0.1;
    la.zero_l = 0;
    for (int cand = 1; cand < n_states; ++cand) {
        const double shared = (dens[0].cwiseProduct(dens[cand])).sum() * cell;
        if (shared < disjoint_threshold) {
            la.one_l = cand;
            la.method = "support";
            return la;
        }
    }
    if (la.well_type[0] == 't' || la.well_type[0] == 'p') {
        const char want = la.well_type[0] == 't' ? 'p' : 't';
        for (int cand = 1; cand < n_states; ++cand) {
            if (la.well_type[cand] == want) {
                la.one_l = cand;
                la.method = "well-type";
                return la;
            }
        }
    }
    la.one_l = 1;
    la.method = "energy-order";
    return la;
}

}  // namespace fluxmol
