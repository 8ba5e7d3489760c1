#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "core/errors.h"
#include "core/hamiltonian.h"
#include "core/sweep.h"
#include "core/wavefunction.h"

using namespace fluxmol;

namespace {

constexpr double kPi = 3.14159265358979323846;

CircuitParams strong_coupling_params() {
    CircuitParams p;
    p.e_j = 11.0;
    p.e_l = 0.36;
    p.e_ls = 0.36;
    p.e_cj = 2.5;
    p.e_c = 50.0;
    return p;
}

GridSpec square_grid(double half_span, int n) {
    GridSpec g;
    g.phi_min = -half_span;
    g.phi_max = half_span;
    g.theta_min = -half_span;
    g.theta_max = half_span;
    g.n_phi = n;
    g.n_theta = n;
    return g;
}

int nearest_index(const Eigen::VectorXd& axis, double x) {
    Eigen::Index idx;
    (axis.array() - x).abs().minCoeff(&idx);
    return static_cast<int>(idx);
}

}  // namespace

TEST_CASE("the quadratic ground state is the product Gaussian") {
    CircuitParams p = strong_coupling_params();
    p.e_j = 1e-12;
    SweepOptions o;
    o.model = CircuitModel::reduced;
    o.trunc = BasisTruncation{16, 16, 4};
    Spectrum s = circuit_spectrum(p, FluxPoint{}, 2, o);

    GridSpec g = square_grid(8.0, 161);
    WavefunctionGrid w = wavefunction(s, 0, g);
    CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-3));

    const double ell_phi = std::pow(2.0 * p.e_cj / p.e_l, 0.25);
    const double stiff = p.e_l * p.e_ls / (2.0 * p.e_l + p.e_ls);
    const double ell_theta = std::pow(2.0 * p.e_cj / stiff, 0.25);

    const int i0 = nearest_index(w.phi_axis, 0.0);
    const int j0 = nearest_index(w.theta_axis, 0.0);
    const int i1 = nearest_index(w.phi_axis, 1.5);
    const int j1 = nearest_index(w.theta_axis, -2.0);
    const double fp = w.phi_axis(i1), ft = w.theta_axis(j1);
    const double expect =
        std::exp(-fp * fp / (2 * ell_phi * ell_phi) - ft * ft / (2 * ell_theta * ell_theta));
    const std::complex<double> ratio = w.amp(i1, j1) / w.amp(i0, j0);
    CHECK(ratio.real() == doctest::Approx(expect).epsilon(1e-6));
    CHECK(std::abs(ratio.imag()) < 1e-12);
}

TEST_CASE("the first excited quadratic state is odd in theta") {
    CircuitParams p = strong_coupling_params();
    p.e_j = 1e-12;
    SweepOptions o;
    o.model = CircuitModel::reduced;
    o.trunc = BasisTruncation{16, 16, 4};
    Spectrum s = circuit_spectrum(p, FluxPoint{}, 2, o);
    GridSpec g = square_grid(6.0, 121);
    WavefunctionGrid w = wavefunction(s, 1, g);
    const int n = g.n_theta;
    for (int i : {20, 60, 95})
        for (int j : {3, 40, 57})
            CHECK(std::abs(w.amp(i, j) + w.amp(i, n - 1 - j)) < 1e-8);
    // Orthogonal to the ground state under the same quadrature.
    WavefunctionGrid w0 = wavefunction(s, 0, g);
    std::complex<double> overlap = 0.0;
    for (int i = 0; i < g.n_phi; ++i)
        for (int j = 0; j < n; ++j) overlap += std::conj(w0.amp(i, j)) * w.amp(i, j);
    const double dphi = w.phi_axis(1) - w.phi_axis(0);
    const double dtheta = w.theta_axis(1) - w.theta_axis(0);
    CHECK(std::abs(overlap) * dphi * dtheta < 1e-6);
}

TEST_CASE("grids coarser than the oscillator length are rejected") {
    CircuitParams p = strong_coupling_params();
    SweepOptions o;
    o.model = CircuitModel::reduced;
    o.trunc = BasisTruncation{12, 12, 4};
    Spectrum s = circuit_spectrum(p, FluxPoint{kPi, 0.0}, 2, o);
    CHECK_THROWS_AS(wavefunction(s, 0, square_grid(4 * kPi, 26)), invalid_input);
    CHECK_THROWS_AS(wavefunction(s, 5, GridSpec::default_span()), invalid_input);
}

TEST_CASE("three-mode spectra have no plane to plot on") {
    CircuitParams p = strong_coupling_params();
    SweepOptions o;
    o.model = CircuitModel::full;
    o.trunc = BasisTruncation{8, 8, 4};
    Spectrum s = circuit_spectrum(p, FluxPoint{}, 2, o);
    CHECK_THROWS_AS(wavefunction(s, 0, GridSpec::default_span()), invalid_input);
    CHECK_THROWS_AS(assign_logical_states(s, GridSpec::default_span()), invalid_input);
}

TEST_CASE("logical states at the mixed sweet spot occupy disjoint wells") {
    CircuitParams p = strong_coupling_params();
    SweepOptions o;
    o.model = CircuitModel::reduced;
    o.trunc = BasisTruncation{22, 22, 4};
    Spectrum s = circuit_spectrum(p, FluxPoint{kPi, 0.0}, 4, o);
    LogicalAssignment a = assign_logical_states(s, GridSpec::default_span());
    CHECK(a.zero_l == 0);
    CHECK(a.one_l > 0);
    CHECK(a.one_l < 4);
    CHECK(a.method == "support");
    for (char c : a.well_type) {
        const bool known = c == 't' || c == 'p' || c == 'm';
        CHECK(known);
    }
    CHECK(a.well_type[a.zero_l] != a.well_type[a.one_l]);
}
