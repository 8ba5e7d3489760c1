#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core/commands.h"
#include "core/errors.h"
#include "core/fluxcal.h"
#include "core/io.h"

using namespace fluxmol;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "fluxmol_cmd_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunSettings settings_in(const fs::path& dir) {
    RunSettings rs;
    rs.out_dir = dir.string();
    return rs;
}

nlohmann::json demo_circuit() {
    return {{"EJ_GHz", 11.0}, {"EL_GHz", 0.36}, {"ELs_GHz", 0.36},
            {"ECJ_GHz", 2.5}, {"EC_GHz", 50.0}};
}

nlohmann::json d1_circuit() {
    return {{"EJ_GHz", 5.9}, {"EL_GHz", 0.15}, {"ELs_GHz", 0.15},
            {"ECJ_GHz", 2.4}, {"EC_GHz", 4.5}};
}

}  // namespace

TEST_CASE("csv parsing keeps headers, trims cells, and flags ragged rows") {
    CsvTable t = parse_csv("a, b ,c\n1,2,3\n\n4,5,6\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][2] == "6");
    CHECK(t.column("b") == 1);
    CHECK(t.column("nope") == -1);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), invalid_input);
    CHECK_THROWS_AS(parse_csv(""), invalid_input);
    // Round trip through the writer.
    CsvTable back = parse_csv(t.to_text());
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
}

TEST_CASE("artifacts carry the schema tag and readers enforce it") {
    fs::path dir = fresh_dir("artifact");
    const std::string path = (dir / "x.json").string();
    write_artifact(path, nlohmann::json{{"payload", 7}});
    nlohmann::json j = read_artifact(path);
    CHECK(j.at("schema").get<std::string>() == artifact_schema);
    CHECK(j.at("payload").get<int>() == 7);

    write_text_file(path, "{\"schema\": \"elsewhere/v9\", \"payload\": 7}\n");
    CHECK_THROWS_AS(read_artifact(path), invalid_input);
    write_text_file(path, "{\"payload\": 7}\n");
    CHECK_THROWS_AS(read_artifact(path), invalid_input);
    write_text_file(path, "{not json");
    CHECK_THROWS_AS(read_json_file(path), invalid_input);
    CHECK_THROWS_AS(read_text_file((dir / "absent.txt").string()), io_failure);
}

TEST_CASE("settings come from the config with validated flux units") {
    nlohmann::json cfg = {{"out", "somewhere"}, {"seed", 42}, {"threads", 3},
                          {"flux_units", "two-pi"}};
    RunSettings rs = settings_from_config(cfg);
    CHECK(rs.out_dir == "somewhere");
    CHECK(rs.seed == 42);
    CHECK(rs.threads == 3);
    CHECK(rs.flux_two_pi);
    CHECK_FALSE(settings_from_config(nlohmann::json::object()).flux_two_pi);
    nlohmann::json bad = {{"flux_units", "degrees"}};
    CHECK_THROWS_AS(settings_from_config(bad), invalid_input);
}

TEST_CASE("unknown commands are rejected with the available names") {
    fs::path dir = fresh_dir("unknown");
    CHECK_THROWS_WITH_AS(run_command("orbit", nlohmann::json::object(), settings_in(dir)),
                         doctest::Contains("spectrum"), invalid_input);
    CHECK(command_names().size() == 7);
}

TEST_CASE("spectrum runs are deterministic and schema tagged") {
    fs::path dir = fresh_dir("spectrum");
    nlohmann::json cfg = {
        {"circuit", demo_circuit()},
        {"model", "reduced"},
        {"truncation", {{"n_phi", 10}, {"n_theta", 10}, {"n_zeta", 4}}},
        {"spectrum",
         {{"trajectory", {{kPi, 0.0}, {kPi, kPi}}}, {"samples_per_segment", 5}, {"k", 3}}}};
    run_command("spectrum", cfg, settings_in(dir));

    const std::string csv1 = read_text_file((dir / "spectrum.csv").string());
    CsvTable t = parse_csv(csv1);
    CHECK(t.header[0] == "index");
    CHECK(t.column("E2_GHz") >= 0);
    CHECK(t.column("track0_GHz") >= 0);
    CHECK(t.rows.size() == 5);

    nlohmann::json meta = read_artifact((dir / "spectrum.json").string());
    CHECK(meta.at("n_points").get<int>() == 5);
    CHECK(meta.at("command").get<std::string>() == "spectrum");
    CHECK(meta.at("circuit").at("EJ_GHz").get<double>() == 11.0);
    CHECK(meta.contains("crossings"));
    CHECK(meta.contains("wall_time_s"));

    run_command("spectrum", cfg, settings_in(dir));
    CHECK(read_text_file((dir / "spectrum.csv").string()) == csv1);

    nlohmann::json missing = cfg;
    missing["spectrum"].erase("trajectory");
    CHECK_THROWS_AS(run_command("spectrum", missing, settings_in(dir)), invalid_input);
}

TEST_CASE("flux units in the config scale into radians in the outputs") {
    fs::path dir = fresh_dir("units");
    nlohmann::json cfg = {
        {"circuit", demo_circuit()},
        {"truncation", {{"n_phi", 9}, {"n_theta", 9}, {"n_zeta", 4}}},
        {"spectrum",
         {{"trajectory", {{0.5, 0.0}, {0.5, 0.5}}}, {"samples_per_segment", 3}, {"k", 2}}}};
    RunSettings rs = settings_in(dir);
    rs.flux_two_pi = true;
    run_command("spectrum", cfg, rs);
    CsvTable t = parse_csv(read_text_file((dir / "spectrum.csv").string()));
    const int col = t.column("phi_c_rad");
    REQUIRE(col >= 0);
    CHECK(std::stod(t.rows[0][static_cast<size_t>(col)]) == doctest::Approx(kPi).epsilon(1e-12));
    const int cold = t.column("phi_d_rad");
    CHECK(std::stod(t.rows[2][static_cast<size_t>(cold)]) == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("synthetic-table decay reproduces a known relaxation time") {
    fs::path dir = fresh_dir("decay_t1");
    nlohmann::json cfg = {
        {"decay",
         {{"table",
           {{"energies_GHz", {0.0, 5.0}},
            {"rates_per_s", {{0.0, 0.0}, {4e4, 0.0}}}}},
          {"protocol", "t1s"},
          {"initial_state", 1},
          {"subspace", {1}},
          {"times", {{"stop_s", 1.2e-4}, {"points", 61}}}}}};
    run_command("decay", cfg, settings_in(dir));

    nlohmann::json meta = read_artifact((dir / "decay.json").string());
    CHECK(meta.at("fit").at("converged").get<bool>());
    CHECK(meta.at("fit").at("t1s_s").get<double>() == doctest::Approx(2.5e-5).epsilon(1e-5));

    CsvTable t = parse_csv(read_text_file((dir / "decay.csv").string()));
    const int ic = t.column("p_g");
    const int it = t.column("t_s");
    REQUIRE(ic >= 0);
    for (size_t r : {size_t{0}, size_t{20}, size_t{60}}) {
        const double tt = std::stod(t.rows[r][static_cast<size_t>(it)]);
        const double pg = std::stod(t.rows[r][static_cast<size_t>(ic)]);
        CHECK(pg == doctest::Approx(std::exp(-4e4 * tt)).epsilon(1e-8));
    }
}

TEST_CASE("ramsey decay shows fringes at the chosen detuning") {
    fs::path dir = fresh_dir("decay_t2");
    nlohmann::json cfg = {
        {"decay",
         {{"table",
           {{"energies_GHz", {0.0, 0.5}},
            {"rates_per_s", {{0.0, 0.0}, {2e4, 0.0}}}}},
          {"protocol", "t2rs"},
          {"detuning_hz", 5e5},
          {"times", {{"stop_s", 6e-6}, {"points", 61}}}}}};
    run_command("decay", cfg, settings_in(dir));

    CsvTable t = parse_csv(read_text_file((dir / "decay.csv").string()));
    const int ic = t.column("p_g");
    const int it = t.column("t_s");
    for (size_t r = 0; r < t.rows.size(); r += 7) {
        const double tt = std::stod(t.rows[r][static_cast<size_t>(it)]);
        const double pg = std::stod(t.rows[r][static_cast<size_t>(ic)]);
        const double expect = 0.5 + 0.5 * std::exp(-1e4 * tt) * std::cos(2 * kPi * 5e5 * tt);
        CHECK(pg == doctest::Approx(expect).epsilon(1e-9));
    }
    nlohmann::json meta = read_artifact((dir / "decay.json").string());
    CHECK(meta.at("fit").at("freq_hz").get<double>() == doctest::Approx(5e5).epsilon(0.05));
}

TEST_CASE("readout noise is reproducible by seed") {
    nlohmann::json cfg = {
        {"decay",
         {{"table",
           {{"energies_GHz", {0.0, 5.0}},
            {"rates_per_s", {{0.0, 0.0}, {4e4, 0.0}}}}},
          {"protocol", "t1s"},
          {"initial_state", 1},
          {"subspace", {1}},
          {"noise_frac", 0.02},
          {"times", {{"stop_s", 1e-4}, {"points", 41}}}}}};

    fs::path a = fresh_dir("decay_seed_a");
    fs::path b = fresh_dir("decay_seed_b");
    fs::path c = fresh_dir("decay_seed_c");
    RunSettings rs_a = settings_in(a);
    rs_a.seed = 9;
    RunSettings rs_b = settings_in(b);
    rs_b.seed = 9;
    RunSettings rs_c = settings_in(c);
    rs_c.seed = 10;
    run_command("decay", cfg, rs_a);
    run_command("decay", cfg, rs_b);
    run_command("decay", cfg, rs_c);
    const std::string csv_a = read_text_file((a / "decay.csv").string());
    CHECK(csv_a == read_text_file((b / "decay.csv").string()));
    CHECK(csv_a != read_text_file((c / "decay.csv").string()));
}

TEST_CASE("coherence runs summarize rates per state and logical pair") {
    fs::path dir = fresh_dir("coherence");
    nlohmann::json cfg = {
        {"circuit", demo_circuit()},
        {"model", "reduced"},
        {"truncation", {{"n_phi", 12}, {"n_theta", 12}, {"n_zeta", 4}}},
        {"coherence", {{"flux", {kPi, 0.0}}, {"levels", 3}}}};
    run_command("coherence", cfg, settings_in(dir));

    CsvTable t = parse_csv(read_text_file((dir / "rates.csv").string()));
    CHECK(t.rows.size() == 6);
    CHECK(t.column("capacitive_per_s") >= 0);
    CHECK(t.column("total_per_s") >= 0);

    nlohmann::json meta = read_artifact((dir / "coherence.json").string());
    CHECK(meta.at("states").size() == 3);
    CHECK(meta.at("logical").at("zero").get<int>() == 0);
    CHECK(meta.at("logical").at("gamma2_per_s").get<double>() > 0.0);
    CHECK(meta.at("flux_dephasing").contains("rate_per_s"));
    for (const auto& st : meta.at("states")) {
        CHECK(st.at("gamma1_per_s").get<double>() >= 0.0);
        CHECK(st.at("dominant").contains("channel"));
    }
}

TEST_CASE("wavefunction runs write per-state maps and the logical assignment") {
    fs::path dir = fresh_dir("wavefunction");
    nlohmann::json cfg = {
        {"circuit", demo_circuit()},
        {"model", "reduced"},
        {"truncation", {{"n_phi", 14}, {"n_theta", 14}, {"n_zeta", 4}}},
        {"wavefunction",
         {{"flux", {kPi, 0.0}},
          {"states", {0}},
          {"grid", {{"span_rad", 6.0}, {"points", 61}}}}}};
    run_command("wavefunction", cfg, settings_in(dir));

    CsvTable t = parse_csv(read_text_file((dir / "wf_state0.csv").string()));
    CHECK(t.rows.size() == 61 * 61);
    CHECK(t.column("prob") == 4);
    nlohmann::json meta = read_artifact((dir / "wavefunction.json").string());
    CHECK(meta.at("logical").contains("method"));
    CHECK(meta.at("energies_GHz").size() == 4);

    nlohmann::json full = cfg;
    full["model"] = "full";
    CHECK_THROWS_AS(run_command("wavefunction", full, settings_in(dir)), invalid_input);
}

TEST_CASE("calibration command fits exact anchors to numerical precision") {
    fs::path dir = fresh_dir("calibrate");
    FluxCalibration truth;
    truth.alpha_m = 2.2;
    truth.alpha_l = -0.4;
    truth.beta_m = 0.3;
    truth.beta_l = 1.8;
    truth.phi_offset_c = 0.21;
    truth.phi_offset_d = -0.77;

    nlohmann::json anchors = nlohmann::json::array();
    const int ns[5][2] = {{0, 0}, {1, 0}, {0, 1}, {-1, 1}, {2, 2}};
    for (const auto& n : ns) {
        double vm = 0.0, vl = 0.0;
        voltages_from_flux(truth, FluxPoint{2 * kPi * n[0], 2 * kPi * n[1]}, vm, vl);
        anchors.push_back({{"v_m_V", vm}, {"v_l_V", vl}, {"n_c", n[0]}, {"n_d", n[1]}});
    }
    nlohmann::json cfg = {{"calibrate", {{"anchors", anchors}}}};
    run_command("calibrate", cfg, settings_in(dir));

    nlohmann::json meta = read_artifact((dir / "calibration.json").string());
    CHECK(meta.at("residual_rms_rad").get<double>() < 1e-10);
    FluxCalibration cal = meta.at("calibration").get<FluxCalibration>();
    CHECK(cal.alpha_m == doctest::Approx(truth.alpha_m).epsilon(1e-9));
    CHECK(cal.beta_l == doctest::Approx(truth.beta_l).epsilon(1e-9));
    CHECK(meta.at("anchors").get<int>() == 5);
}

TEST_CASE("the fit command recovers parameters from a labeled peak file") {
    fs::path dir = fresh_dir("fit");
    CircuitParams truth = d1_circuit().get<CircuitParams>();

    PredictOptions po;
    po.trunc = BasisTruncation{9, 9, 4};
    po.max_states = 6;
    po.from_states = {0};
    po.max_f_ghz = 22.0;
    TwoToneDataset data;
    for (double c : {0.0, 1.2, 2.0, kPi}) {
        FluxPoint f{c, 0.5 * c};
        for (const PredictedTransition& tr : predict_transitions(truth, f, po)) {
            TwoToneRecord r;
            r.flux = f;
            r.f_ghz = tr.f_ghz;
            r.sigma_ghz = 0.005;
            r.from_state = tr.from;
            r.to_state = tr.to;
            data.records.push_back(r);
        }
    }
    REQUIRE(data.records.size() >= 15);
    const std::string data_path = (dir / "peaks.csv").string();
    write_text_file(data_path, data.to_csv_text());

    nlohmann::json cfg = {
        {"circuit", d1_circuit()},
        {"fit",
         {{"data_file", data_path},
          {"bounds", {{"fraction", 0.3}}},
          {"truncation", {{"n_phi", 9}, {"n_theta", 9}, {"n_zeta", 4}}},
          {"max_states", 6},
          {"from_states", {0}},
          {"restarts", 0}}}};
    run_command("fit", cfg, settings_in(dir));

    nlohmann::json meta = read_artifact((dir / "fit.json").string());
    const nlohmann::json& res = meta.at("result");
    CHECK(res.at("converged").get<bool>());
    CHECK(res.at("residual_rms_GHz").get<double>() < 1e-8);
    CHECK_FALSE(res.at("misfit").get<bool>());
    CHECK(res.at("params").at("EJ_GHz").get<double>() ==
          doctest::Approx(truth.e_j).epsilon(1e-6));
    CHECK(meta.at("data_records").get<int>() == static_cast<int>(data.records.size()));

    nlohmann::json no_data = cfg;
    no_data["fit"].erase("data_file");
    CHECK_THROWS_AS(run_command("fit", no_data, settings_in(dir)), invalid_input);
}
