#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/errors.h"
#include "core/fluxcal.h"

using namespace fluxmol;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

FluxCalibration skewed_cal() {
    FluxCalibration c;
    c.alpha_m = 3.1;
    c.alpha_l = -0.7;
    c.beta_m = 0.4;
    c.beta_l = 2.6;
    c.phi_offset_c = 0.55;
    c.phi_offset_d = -1.2;
    return c;
}

CircuitParams device_one() {
    CircuitParams p;
    p.e_j = 5.9;
    p.e_l = 0.15;
    p.e_ls = 0.15;
    p.e_cj = 2.4;
    p.e_c = 4.5;
    return p;
}

}  // namespace

TEST_CASE("voltage-flux maps invert each other") {
    FluxCalibration c = skewed_cal();
    c.validate();
    FluxPoint f = flux_from_voltages(c, 0.37, -0.81);
    double vm = 0.0, vl = 0.0;
    voltages_from_flux(c, f, vm, vl);
    CHECK(vm == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(vl == doctest::Approx(-0.81).epsilon(1e-12));

    FluxCalibration singular = c;
    singular.beta_m = c.alpha_m;
    singular.beta_l = c.alpha_l;
    CHECK_THROWS_AS(singular.validate(), invalid_input);
}

TEST_CASE("calibration parameters survive a JSON round trip and check keys") {
    FluxCalibration c = skewed_cal();
    nlohmann::json j;
    to_json(j, c);
    FluxCalibration back = j.get<FluxCalibration>();
    CHECK(back.alpha_m == c.alpha_m);
    CHECK(back.beta_l == c.beta_l);
    CHECK(back.phi_offset_d == c.phi_offset_d);

    nlohmann::json partial = {{"alpha_m_rad_per_V", 1.0}};
    CHECK_THROWS_AS(partial.get<FluxCalibration>(), invalid_input);
}

TEST_CASE("six anchors pin the calibration exactly") {
    FluxCalibration truth = skewed_cal();
    std::vector<CalibrationAnchor> anchors;
    const int ns[6][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 0}, {2, -1}};
    for (const auto& n : ns) {
        CalibrationAnchor a;
        a.n_c = n[0];
        a.n_d = n[1];
        voltages_from_flux(truth, FluxPoint{kTwoPi * n[0], kTwoPi * n[1]}, a.v_m, a.v_l);
        anchors.push_back(a);
    }
    FluxCalibration fit = fit_calibration(anchors);
    CHECK(fit.alpha_m == doctest::Approx(truth.alpha_m).epsilon(1e-10));
    CHECK(fit.alpha_l == doctest::Approx(truth.alpha_l).epsilon(1e-10));
    CHECK(fit.beta_m == doctest::Approx(truth.beta_m).epsilon(1e-10));
    CHECK(fit.beta_l == doctest::Approx(truth.beta_l).epsilon(1e-10));
    CHECK(fit.phi_offset_c == doctest::Approx(truth.phi_offset_c).epsilon(1e-10));
    CHECK(fit.phi_offset_d == doctest::Approx(truth.phi_offset_d).epsilon(1e-10));
}

TEST_CASE("noisy anchors still recover the calibration to a few percent") {
    FluxCalibration truth = skewed_cal();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> jitter(0.0, 0.01);
    std::vector<CalibrationAnchor> anchors;
    for (int nc = -2; nc <= 2; ++nc)
        for (int nd = -2; nd <= 2; ++nd) {
            CalibrationAnchor a;
            a.n_c = nc;
            a.n_d = nd;
            voltages_from_flux(truth, FluxPoint{kTwoPi * nc, kTwoPi * nd}, a.v_m, a.v_l);
            a.v_m += jitter(rng);
            a.v_l += jitter(rng);
            anchors.push_back(a);
        }
    FluxCalibration fit = fit_calibration(anchors);
    CHECK(fit.alpha_m == doctest::Approx(truth.alpha_m).epsilon(0.03));
    CHECK(fit.beta_l == doctest::Approx(truth.beta_l).epsilon(0.03));
}

TEST_CASE("anchors on a single voltage line are rejected as rank deficient") {
    std::vector<CalibrationAnchor> anchors;
    for (int i = 0; i < 5; ++i) {
        CalibrationAnchor a;
        a.v_m = 0.1 * i;
        a.v_l = 0.0;  // never varies
        a.n_c = i;
        a.n_d = 0;
        anchors.push_back(a);
    }
    CHECK_THROWS_AS(fit_calibration(anchors), invalid_input);
    anchors.resize(3);
    CHECK_THROWS_AS(fit_calibration(anchors), invalid_input);
}

TEST_CASE("peak lists round trip through CSV in both coordinate systems") {
    TwoToneDataset d;
    TwoToneRecord r1;
    r1.flux = FluxPoint{0.3, 1.9};
    r1.f_ghz = 4.25;
    r1.sigma_ghz = 0.02;
    TwoToneRecord r2;
    r2.flux = FluxPoint{kPi, 0.0};
    r2.f_ghz = 0.61;
    r2.sigma_ghz = 0.005;
    r2.from_state = 0;
    r2.to_state = 2;
    d.records = {r1, r2};
    d.validate();

    TwoToneDataset back = TwoToneDataset::from_csv_text(d.to_csv_text());
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].flux.phi_c == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(back.records[0].f_ghz == doctest::Approx(4.25).epsilon(1e-10));
    CHECK_FALSE(back.records[0].labeled());
    CHECK(back.records[1].labeled());
    CHECK(*back.records[1].from_state == 0);
    CHECK(*back.records[1].to_state == 2);

    // Voltage-space input converts through the calibration.
    FluxCalibration cal = skewed_cal();
    double vm = 0.0, vl = 0.0;
    voltages_from_flux(cal, FluxPoint{1.1, 2.2}, vm, vl);
    std::string text = "v_m_V,v_l_V,f_GHz,sigma_GHz\n" + std::to_string(vm) + "," +
                       std::to_string(vl) + ",3.5,0.01\n";
    TwoToneDataset vd = TwoToneDataset::from_csv_text(text, &cal);
    REQUIRE(vd.records.size() == 1);
    CHECK(vd.records[0].flux.phi_c == doctest::Approx(1.1).epsilon(1e-4));
    CHECK(vd.records[0].flux.phi_d == doctest::Approx(2.2).epsilon(1e-4));
    CHECK_THROWS_AS(TwoToneDataset::from_csv_text(text, nullptr), invalid_input);
}

TEST_CASE("missing uncertainty columns default to ten megahertz") {
    std::string text = "phi_c_rad,phi_d_rad,f_GHz\n3.14,0.0,1.5\n";
    TwoToneDataset d = TwoToneDataset::from_csv_text(text);
    REQUIRE(d.records.size() == 1);
    CHECK(d.records[0].sigma_ghz == doctest::Approx(0.01));
}

TEST_CASE("malformed peak rows name the offending line") {
    std::string text = "phi_c_rad,phi_d_rad,f_GHz\n0.0,0.0,1.5\nx,0.0,2.0\n";
    CHECK_THROWS_WITH_AS(TwoToneDataset::from_csv_text(text),
                         doctest::Contains("data row 2"), invalid_input);
    std::string half_label = "phi_c_rad,phi_d_rad,f_GHz,from_state\n0.0,0.0,1.5,0\n";
    CHECK_THROWS_AS(TwoToneDataset::from_csv_text(half_label), invalid_input);
}

TEST_CASE("predicted transition lists are sorted, filtered, and periodic") {
    CircuitParams p = device_one();
    PredictOptions o;
    o.trunc = BasisTruncation{12, 12, 4};
    o.max_states = 6;
    o.from_states = {0, 1};
    o.max_f_ghz = 20.0;
    FluxPoint f{0.9, 0.4};
    std::vector<PredictedTransition> a = predict_transitions(p, f, o);
    REQUIRE(!a.empty());
    for (size_t i = 0; i + 1 < a.size(); ++i) {
        const bool ordered = a[i].from < a[i + 1].from ||
                             (a[i].from == a[i + 1].from && a[i].f_ghz <= a[i + 1].f_ghz);
        CHECK(ordered);
    }
    for (const PredictedTransition& t : a) {
        CHECK(t.f_ghz > 0.0);
        CHECK(t.f_ghz <= 20.0);
        CHECK(t.from < t.to);
    }

    std::vector<PredictedTransition> b =
        predict_transitions(p, FluxPoint{f.phi_c + kTwoPi, f.phi_d - kTwoPi}, o);
    REQUIRE(b.size() == a.size());
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(b[i].f_ghz == doctest::Approx(a[i].f_ghz).epsilon(1e-9));

    PredictOptions none = o;
    none.max_f_ghz = 1e-6;
    CHECK(predict_transitions(p, f, none).empty());
}

TEST_CASE("fit bounds validate their ordering") {
    FitBounds b = FitBounds::fractional(device_one(), 0.5);
    CHECK_NOTHROW(b.validate());
    CHECK(b.lower.e_j == doctest::Approx(0.5 * 5.9));
    CHECK(b.upper.e_j == doctest::Approx(1.5 * 5.9));
    CHECK(b.lower.d_cj == 0.0);
    CHECK(b.upper.d_cj == 0.0);
    b.lower.e_c = b.upper.e_c + 1.0;
    CHECK_THROWS_AS(b.validate(), invalid_input);
    CHECK_THROWS_AS(FitBounds::fractional(device_one(), 1.5), invalid_input);
}

TEST_CASE("parameter extraction rejects undersized or mislabeled datasets") {
    TwoToneDataset tiny;
    for (int i = 0; i < 5; ++i) {
        TwoToneRecord r;
        r.f_ghz = 1.0 + i;
        tiny.records.push_back(r);
    }
    CircuitFitOptions o;
    o.trunc = BasisTruncation{8, 8, 4};
    CHECK_THROWS_AS(
        fit_circuit_params(tiny, device_one(), FitBounds::fractional(device_one(), 0.5), o),
        invalid_input);

    TwoToneDataset marked;
    for (int i = 0; i < 16; ++i) {
        TwoToneRecord r;
        r.f_ghz = 1.0 + 0.1 * i;
        r.from_state = 0;
        r.to_state = 40;  // beyond the resolved states
        marked.records.push_back(r);
    }
    CHECK_THROWS_AS(
        fit_circuit_params(marked, device_one(), FitBounds::fractional(device_one(), 0.5), o),
        invalid_input);
}

TEST_CASE("an exact initial guess is a fixed point of the extraction") {
    CircuitParams truth = device_one();
    PredictOptions po;
    po.trunc = BasisTruncation{9, 9, 4};
    po.max_states = 6;
    po.from_states = {0};
    po.max_f_ghz = 22.0;

    TwoToneDataset data;
    for (double c : {0.0, 1.2, 2.0, kPi}) {
        for (const PredictedTransition& t :
             predict_transitions(truth, FluxPoint{c, 0.5 * c}, po)) {
            TwoToneRecord r;
            r.flux = FluxPoint{c, 0.5 * c};
            r.f_ghz = t.f_ghz;
            r.sigma_ghz = 0.01;
            r.from_state = t.from;
            r.to_state = t.to;
            data.records.push_back(r);
        }
    }
    REQUIRE(data.records.size() >= 15);

    CircuitFitOptions o;
    o.trunc = po.trunc;
    o.max_states = po.max_states;
    o.from_states = po.from_states;
    o.restarts = 0;
    CircuitFitResult r = fit_circuit_params(data, truth, FitBounds::fractional(truth, 0.4), o);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.cost < 1e-16);
    CHECK(r.residual_rms_ghz < 1e-10);
    CHECK_FALSE(r.misfit);
    CHECK(r.rejected == 0);
    CHECK(r.params.e_j == doctest::Approx(truth.e_j).epsilon(1e-10));

    nlohmann::json j = fit_result_to_json(r);
    CHECK(j.contains("params"));
    CHECK(j.contains("half_width_GHz"));
}

TEST_CASE("labeled synthetic spectra pin the energies from a shifted start") {
    CircuitParams truth = device_one();
    PredictOptions po;
    po.trunc = BasisTruncation{9, 9, 4};
    po.max_states = 6;
    po.from_states = {0};
    po.max_f_ghz = 22.0;

    TwoToneDataset data;
    for (double c : {0.0, 0.8, 1.9, kPi}) {
        FluxPoint f{c, 1.1 * c};
        for (const PredictedTransition& t : predict_transitions(truth, f, po)) {
            TwoToneRecord r;
            r.flux = f;
            r.f_ghz = t.f_ghz;
            r.sigma_ghz = 0.005;
            r.from_state = t.from;
            r.to_state = t.to;
            data.records.push_back(r);
        }
    }
    REQUIRE(data.records.size() >= 15);

    CircuitParams start = truth;
    start.e_j *= 1.10;
    start.e_l *= 0.92;
    start.e_ls *= 1.06;
    start.e_cj *= 0.95;
    start.e_c *= 1.08;

    CircuitFitOptions o;
    o.trunc = po.trunc;
    o.max_states = po.max_states;
    o.from_states = po.from_states;
    o.restarts = 0;
    CircuitFitResult r = fit_circuit_params(data, start, FitBounds::fractional(truth, 0.4), o);
    CHECK(r.converged);
    CHECK(r.params.e_j == doctest::Approx(truth.e_j).epsilon(1e-3));
    CHECK(r.params.e_l == doctest::Approx(truth.e_l).epsilon(1e-3));
    CHECK(r.params.e_ls == doctest::Approx(truth.e_ls).epsilon(5e-3));
    CHECK(r.params.e_cj == doctest::Approx(truth.e_cj).epsilon(1e-3));
    CHECK(r.params.e_c == doctest::Approx(truth.e_c).epsilon(1e-3));
    CHECK_FALSE(r.misfit);
}

TEST_CASE("systematically shifted data raises the misfit flag") {
    CircuitParams truth = device_one();
    PredictOptions po;
    po.trunc = BasisTruncation{9, 9, 4};
    po.max_states = 5;
    po.from_states = {0};
    po.max_f_ghz = 22.0;

    TwoToneDataset data;
    for (double c : {0.0, 0.7, 1.4, 2.2, kPi}) {
        FluxPoint f{c, 0.0};
        for (const PredictedTransition& t : predict_transitions(truth, f, po)) {
            TwoToneRecord r;
            r.flux = f;
            r.f_ghz = t.f_ghz + 0.4;  // far beyond the quoted sigma
            r.sigma_ghz = 0.002;
            r.from_state = t.from;
            r.to_state = t.to;
            data.records.push_back(r);
        }
    }
    REQUIRE(data.records.size() >= 15);
    CircuitFitOptions o;
    o.trunc = po.trunc;
    o.max_states = po.max_states;
    o.from_states = po.from_states;
    o.restarts = 0;
    o.lm.max_iter = 40;
    CircuitFitResult r = fit_circuit_params(data, truth, FitBounds::fractional(truth, 0.3), o);
    CHECK(r.misfit);
}
