#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "core/errors.h"
#include "core/hamiltonian.h"
#include "core/sweep.h"

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

SweepOptions cheap_reduced() {
    SweepOptions o;
    o.model = CircuitModel::reduced;
    o.trunc = BasisTruncation{14, 14, 4};
    return o;
}

}  // namespace

TEST_CASE("trajectory sampling shares waypoint endpoints") {
    FluxTrajectory traj;
    traj.waypoints = {FluxPoint{0.0, 0.0}, FluxPoint{1.0, 0.0}, FluxPoint{1.0, 2.0}};
    traj.samples_per_segment = 5;
    std::vector<FluxPoint> pts = traj.sample();
    REQUIRE(pts.size() == 9);
    CHECK(pts[0].phi_c == 0.0);
    CHECK(pts[4].phi_c == doctest::Approx(1.0));
    CHECK(pts[4].phi_d == doctest::Approx(0.0));
    CHECK(pts[8].phi_d == doctest::Approx(2.0));
    CHECK(pts[2].phi_c == doctest::Approx(0.5));

    FluxTrajectory bad;
    bad.waypoints = {FluxPoint{0.0, 0.0}};
    CHECK_THROWS_AS(bad.validate(), invalid_input);
    bad.waypoints.push_back(FluxPoint{1.0, 1.0});
    bad.samples_per_segment = 1;
    CHECK_THROWS_AS(bad.validate(), invalid_input);
}

TEST_CASE("sweeps return ascending spectra and permutation tracking") {
    CircuitParams p = strong_coupling_params();
    FluxTrajectory traj;
    traj.waypoints = {FluxPoint{kPi, 0.0}, FluxPoint{kPi, kPi}};
    traj.samples_per_segment = 7;
    SweepResult r = sweep_trajectory(p, traj, 3, cheap_reduced());
    REQUIRE(r.points.size() == 7);
    REQUIRE(r.spectra.size() == 7);
    REQUIRE(r.tracked.size() == 7);
    for (int slot = 0; slot < 3; ++slot) CHECK(r.tracked[0][slot] == slot);
    for (size_t s = 0; s < r.tracked.size(); ++s) {
        std::set<int> seen(r.tracked[s].begin(), r.tracked[s].end());
        CHECK(seen.size() == 3);
        for (int j = 0; j + 1 < 3; ++j)
            CHECK(r.spectra[s].eigenvalues(j) <= r.spectra[s].eigenvalues(j + 1));
        CHECK(r.spectra[s].has_flux_context);
    }
}

TEST_CASE("avoided crossing refinement recovers a two-level gap exactly") {
    // Hand-built sweep of H(x) = [[x - x0, g], [g, x0 - x]]: the squared
    // separation is an exact parabola, so the refined position and gap should
    // come out at machine precision.
    const double x0 = 0.37, g = 0.013;
    SweepResult sweep;
    const int n = 21;
    for (int i = 0; i < n; ++i) {
        const double x = i / 20.0;
        Eigen::MatrixXd h(2, 2);
        h << x - x0, g, g, x0 - x;
        sweep.points.push_back(FluxPoint{x, 0.0});
        sweep.spectra.push_back(diagonalize(OperatorMatrix::from_dense(h), 2));
        sweep.tracked.push_back({0, 1});
    }
    std::vector<CrossingInfo> gaps = avoided_crossing_gaps(sweep);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0].gap == doctest::Approx(2 * g).epsilon(1e-10));
    CHECK(gaps[0].sample_pos == doctest::Approx(7.4).epsilon(1e-8));
    CHECK(gaps[0].flux.phi_c == doctest::Approx(x0).epsilon(1e-8));
    CHECK(gaps[0].slot_a == 0);
    CHECK(gaps[0].slot_b == 1);
}

TEST_CASE("flux dispersion matches an independent finite difference") {
    CircuitParams p = strong_coupling_params();
    FluxPoint f{0.8, 1.7};
    DispersionOptions o;
    o.trunc = BasisTruncation{14, 14, 4};
    DispersionResult d = flux_dispersion(p, f, 0, 1, o);
    CHECK_FALSE(d.unresolved);

    SweepOptions so = cheap_reduced();
    const double h = 1e-5;
    auto gap01 = [&](double c, double dd) {
        Spectrum s = circuit_spectrum(p, FluxPoint{c, dd}, 2, so);
        return s.eigenvalues(1) - s.eigenvalues(0);
    };
    const double gc = (gap01(f.phi_c + h, f.phi_d) - gap01(f.phi_c - h, f.phi_d)) / (2 * h);
    const double gd = (gap01(f.phi_c, f.phi_d + h) - gap01(f.phi_c, f.phi_d - h)) / (2 * h);
    CHECK(d.grad(0) == doctest::Approx(gc).epsilon(1e-4));
    CHECK(d.grad(1) == doctest::Approx(gd).epsilon(1e-4));

    // All-pairs variant stores pair (0, 1) at index 0 with the same stencil.
    std::vector<DispersionResult> all = flux_dispersion_all(p, f, 3, o);
    REQUIRE(all.size() == 3);
    CHECK(all[0].grad(0) == doctest::Approx(d.grad(0)).epsilon(1e-10));
    CHECK(all[0].grad(1) == doctest::Approx(d.grad(1)).epsilon(1e-10));
}

TEST_CASE("transition energies are flux-insensitive at the double-pi point") {
    CircuitParams p = strong_coupling_params();
    DispersionOptions o;
    o.trunc = BasisTruncation{14, 14, 4};
    std::vector<DispersionResult> all =
        flux_dispersion_all(p, FluxPoint{kPi, kPi}, 4, o);
    for (const DispersionResult& d : all) {
        CHECK(std::abs(d.grad(0)) < 1e-7);
        CHECK(std::abs(d.grad(1)) < 1e-7);
    }
}

TEST_CASE("spectra are two-pi periodic and inversion symmetric in flux") {
    CircuitParams p = strong_coupling_params();
    SweepOptions o = cheap_reduced();
    FluxPoint f{0.7, 1.3};
    Eigen::VectorXd base = circuit_spectrum(p, f, 4, o).eigenvalues;
    Eigen::VectorXd per =
        circuit_spectrum(p, FluxPoint{f.phi_c + 2 * kPi, f.phi_d}, 4, o).eigenvalues;
    Eigen::VectorXd inv =
        circuit_spectrum(p, FluxPoint{-f.phi_c, -f.phi_d}, 4, o).eigenvalues;
    CHECK((per - base).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((inv - base).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("shifting both flux components by pi leaves the operator unchanged") {
    // cos(x + pi) = -cos(x) in both junction factors, and the two sign flips
    // cancel in the product, so the Hamiltonians are identical, not merely
    // isospectral.
    CircuitParams p = strong_coupling_params();
    BasisTruncation t{10, 10, 4};
    FluxPoint f{0.3, 1.9};
    Eigen::MatrixXd a = build_reduced_hamiltonian(p, f, t).dense_real();
    Eigen::MatrixXd b =
        build_reduced_hamiltonian(p, FluxPoint{f.phi_c + kPi, f.phi_d + kPi}, t).dense_real();
    CHECK((a - b).norm() < 1e-12 * a.norm());
}

TEST_CASE("sweet-spot search finds the half-pi flux lattice") {
    CircuitParams p = strong_coupling_params();
    SweetSpotOptions o;
    o.grid = 13;
    o.tol = 1e-4;
    o.n_levels = 3;
    o.trunc = BasisTruncation{14, 14, 4};
    o.search_trunc = BasisTruncation{10, 10, 4};
    std::vector<SweetSpot> spots = find_sweet_spots(p, 0.0, 2 * kPi, 0.0, 2 * kPi, o);
    REQUIRE(!spots.empty());

    std::set<std::string> labels;
    for (const SweetSpot& s : spots) {
        const double mc = s.flux.phi_c / (kPi / 2);
        const double md = s.flux.phi_d / (kPi / 2);
        const long rc = std::lround(mc);
        const long rd = std::lround(md);
        CHECK(std::abs(mc - rc) < 1e-3);
        CHECK(std::abs(md - rd) < 1e-3);
        CHECK((rc - rd) % 2 == 0);
        CHECK(s.residual <= o.tol);
        labels.insert(s.label);
    }
    CHECK(labels.count("I") == 1);
    CHECK(labels.count("I'") == 1);
    CHECK(labels.count("II") == 1);
    CHECK(labels.count("III") == 1);
}

TEST_CASE("the two even sweet-spot classes share one spectrum") {
    CircuitParams p = strong_coupling_params();
    SweepOptions o = cheap_reduced();
    Eigen::VectorXd at_pipi = circuit_spectrum(p, FluxPoint{kPi, kPi}, 4, o).eigenvalues;
    Eigen::VectorXd at_zero = circuit_spectrum(p, FluxPoint{0.0, 0.0}, 4, o).eigenvalues;
    CHECK((at_pipi - at_zero).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sweet-spot search rejects regions smaller than one period") {
    CircuitParams p = strong_coupling_params();
    SweetSpotOptions o;
    CHECK_THROWS_AS(find_sweet_spots(p, 0.0, 3.0, 0.0, 2 * kPi, o), invalid_input);
}
