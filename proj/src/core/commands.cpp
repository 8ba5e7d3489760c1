#include "core/commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>

#include <nlohmann/json.hpp>

#include "core/errors.h"
#include "core/fitting.h"
#include "core/fluxcal.h"
#include "core/hamiltonian.h"
#include "core/io.h"
#include "core/lindblad.h"
#include "core/noise.h"
#include "core/sweep.h"
#include "core/types.h"
#include "core/wavefunction.h"

namespace fluxmol {

namespace {

constexpr double two_pi = 6.283185307179586476925286766559;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double flux_scale(const RunSettings& rs) { return rs.flux_two_pi ? two_pi : 1.0; }

const nlohmann::json& section(const nlohmann::json& cfg, const char* name) {
    if (!cfg.is_object() || !cfg.contains(name))
        throw invalid_input(std::string("config needs a '") + name + "' section");
    const nlohmann::json& s = cfg.at(name);
    if (!s.is_object())
        throw invalid_input(std::string("config section '") + name + "' must be an object");
    return s;
}

CircuitParams load_circuit(const nlohmann::json& cfg) {
    CircuitParams p;
    if (cfg.contains("circuit"))
        p = cfg.at("circuit").get<CircuitParams>();
    else if (cfg.contains("circuit_file"))
        p = read_json_file(cfg.at("circuit_file").get<std::string>()).get<CircuitParams>();
    else
        throw invalid_input("config needs 'circuit' or 'circuit_file'");
    p.validate();
    return p;
}

NoiseParams load_noise(const nlohmann::json& cfg) {
    NoiseParams n;
    if (cfg.contains("noise"))
        n = cfg.at("noise").get<NoiseParams>();
    else if (cfg.contains("noise_file"))
        n = read_json_file(cfg.at("noise_file").get<std::string>()).get<NoiseParams>();
    n.validate();
    return n;
}

BasisTruncation load_trunc(const nlohmann::json& cfg) {
    BasisTruncation t;
    if (cfg.contains("truncation")) t = cfg.at("truncation").get<BasisTruncation>();
    t.validate();
    return t;
}

DiagOptions diag_from(const nlohmann::json& j, DiagOptions base) {
    if (j.contains("diag")) {
        const nlohmann::json& d = j.at("diag");
        base.dense_threshold = d.value("dense_threshold", base.dense_threshold);
        base.tol = d.value("tol", base.tol);
        base.max_iter = d.value("max_iter", base.max_iter);
    }
    return base;
}

CircuitModel load_model(const nlohmann::json& cfg) {
    return model_from_string(cfg.value("model", std::string("reduced")));
}

FluxPoint parse_flux(const nlohmann::json& j, double scale, const char* what) {
    if (!j.is_array() || j.size() != 2)
        throw invalid_input(std::string(what) + " must be a [phi_c, phi_d] pair");
    FluxPoint f{j.at(0).get<double>() * scale, j.at(1).get<double>() * scale};
    f.validate();
    return f;
}

std::string outpath(const RunSettings& rs, const std::string& name) {
    return (std::filesystem::path(rs.out_dir) / name).string();
}

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
}

nlohmann::json flux_json(const FluxPoint& f) {
    return nlohmann::json{{"phi_c_rad", f.phi_c}, {"phi_d_rad", f.phi_d}};
}

nlohmann::json base_meta(const char* command, const RunSettings& rs) {
    return nlohmann::json{{"command", command}, {"seed", rs.seed}, {"threads", rs.threads}};
}

std::vector<double> sample_times(const nlohmann::json& sc) {
    if (!sc.contains("times")) throw invalid_input("decay config needs a 'times' section");
    const nlohmann::json& tj = sc.at("times");
    double start = tj.value("start_s", 0.0);
    if (!tj.contains("stop_s")) throw invalid_input("times needs 'stop_s'");
    double stop = tj.at("stop_s").get<double>();
    int points = tj.value("points", 101);
    std::string spacing = tj.value("spacing", std::string("linear"));
    if (points < 2) throw invalid_input("times needs at least 2 points");
    if (!(stop > start)) throw invalid_input("times needs stop_s > start_s");
    std::vector<double> t(points);
    if (spacing == "linear") {
        for (int i = 0; i < points; ++i)
            t[i] = start + (stop - start) * i / double(points - 1);
    } else if (spacing == "log") {
        if (!(start > 0.0)) throw invalid_input("log spacing needs start_s > 0");
        for (int i = 0; i < points; ++i)
            t[i] = start * std::pow(stop / start, i / double(points - 1));
    } else {
        throw invalid_input("times spacing must be 'linear' or 'log'");
    }
    return t;
}

}  // namespace

RunSettings settings_from_config(const nlohmann::json& cfg) {
    RunSettings rs;
    if (!cfg.is_object()) return rs;
    rs.out_dir = cfg.value("out", rs.out_dir);
    rs.seed = cfg.value("seed", rs.seed);
    rs.threads = cfg.value("threads", rs.threads);
    std::string units = cfg.value("flux_units", std::string("rad"));
    if (units == "rad")
        rs.flux_two_pi = false;
    else if (units == "two-pi")
        rs.flux_two_pi = true;
    else
        throw invalid_input("flux_units must be 'rad' or 'two-pi'");
    return rs;
}

std::vector<std::string> command_names() {
    return {"spectrum", "sweetspots", "wavefunction", "coherence", "decay", "calibrate", "fit"};
}

void run_spectrum(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "spectrum");
    CircuitParams p = load_circuit(cfg);
    SweepOptions so{load_model(cfg), load_trunc(cfg), diag_from(cfg, {}), rs.threads};
    const double scale = flux_scale(rs);

    FluxTrajectory traj;
    if (!sc.contains("trajectory")) throw invalid_input("spectrum config needs a 'trajectory'");
    for (const auto& w : sc.at("trajectory"))
        traj.waypoints.push_back(parse_flux(w, scale, "trajectory waypoint"));
    traj.samples_per_segment = sc.value("samples_per_segment", 101);
    const int k = sc.value("k", 4);

    SweepResult res = sweep_trajectory(p, traj, k, so);
    std::vector<CrossingInfo> crossings = avoided_crossing_gaps(res);

    CsvTable t;
    t.header = {"index", "phi_c_rad", "phi_d_rad"};
    for (int s = 0; s < k; ++s) t.header.push_back("E" + std::to_string(s) + "_GHz");
    for (int s = 0; s < k; ++s) t.header.push_back("track" + std::to_string(s) + "_GHz");
    for (size_t i = 0; i < res.points.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), format_compact(res.points[i].phi_c),
                                     format_compact(res.points[i].phi_d)};
        for (int s = 0; s < k; ++s) row.push_back(format_compact(res.spectra[i].eigenvalues(s)));
        for (int s = 0; s < k; ++s)
            row.push_back(format_compact(res.spectra[i].eigenvalues(res.tracked[i][s])));
        t.rows.push_back(std::move(row));
    }
    write_text_file(outpath(rs, "spectrum.csv"), t.to_text());

    nlohmann::json meta = base_meta("spectrum", rs);
    meta["circuit"] = p;
    meta["model"] = to_string(so.model);
    meta["truncation"] = so.trunc;
    meta["k"] = k;
    meta["n_points"] = res.points.size();
    meta["crossings"] = nlohmann::json::array();
    for (const CrossingInfo& c : crossings)
        meta["crossings"].push_back({{"sample_pos", c.sample_pos},
                                     {"phi_c_rad", c.flux.phi_c},
                                     {"phi_d_rad", c.flux.phi_d},
                                     {"slot_a", c.slot_a},
                                     {"slot_b", c.slot_b},
                                     {"gap_GHz", c.gap}});
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "spectrum.json"), meta);
}

void run_sweetspots(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "sweetspots");
    CircuitParams p = load_circuit(cfg);
    const double scale = flux_scale(rs);

    SweetSpotOptions opt;
    opt.model = load_model(cfg);
    opt.trunc = load_trunc(cfg);
    opt.diag = diag_from(cfg, {});
    opt.threads = rs.threads;
    opt.grid = sc.value("grid", opt.grid);
    opt.tol = sc.value("grad_tol_GHz_per_rad", opt.tol);
    opt.n_levels = sc.value("levels", opt.n_levels);
    if (sc.contains("search_truncation"))
        opt.search_trunc = sc.at("search_truncation").get<BasisTruncation>();

    double c0 = 0.0, c1 = two_pi, d0 = 0.0, d1 = two_pi;
    if (sc.contains("region")) {
        const nlohmann::json& r = sc.at("region");
        if (!r.is_array() || r.size() != 2)
            throw invalid_input("region must be [[c_lo, c_hi], [d_lo, d_hi]]");
        c0 = r.at(0).at(0).get<double>() * scale;
        c1 = r.at(0).at(1).get<double>() * scale;
        d0 = r.at(1).at(0).get<double>() * scale;
        d1 = r.at(1).at(1).get<double>() * scale;
    }

    std::vector<SweetSpot> spots = find_sweet_spots(p, c0, c1, d0, d1, opt);

    SweepOptions so{opt.model, opt.trunc, opt.diag, rs.threads};
    CsvTable t;
    t.header = {"phi_c_rad", "phi_d_rad", "class", "residual_GHz_per_rad"};
    for (int s = 0; s < opt.n_levels; ++s) t.header.push_back("E" + std::to_string(s) + "_GHz");
    nlohmann::json list = nlohmann::json::array();
    for (const SweetSpot& s : spots) {
        Spectrum spec = circuit_spectrum(p, s.flux, opt.n_levels, so);
        std::vector<std::string> row{format_compact(s.flux.phi_c), format_compact(s.flux.phi_d),
                                     s.label, format_compact(s.residual)};
        std::vector<double> energies(opt.n_levels);
        for (int i = 0; i < opt.n_levels; ++i) {
            energies[i] = spec.eigenvalues(i);
            row.push_back(format_compact(energies[i]));
        }
        t.rows.push_back(std::move(row));
        nlohmann::json e = flux_json(s.flux);
        e["class"] = s.label;
        e["residual_GHz_per_rad"] = s.residual;
        e["energies_GHz"] = energies;
        list.push_back(std::move(e));
    }
    write_text_file(outpath(rs, "sweetspots.csv"), t.to_text());

    nlohmann::json meta = base_meta("sweetspots", rs);
    meta["circuit"] = p;
    meta["model"] = to_string(opt.model);
    meta["truncation"] = opt.trunc;
    meta["region"] = {{c0, c1}, {d0, d1}};
    meta["sweetspots"] = std::move(list);
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "sweetspots.json"), meta);
}

void run_wavefunction(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "wavefunction");
    CircuitParams p = load_circuit(cfg);
    CircuitModel model = load_model(cfg);
    if (model != CircuitModel::reduced)
        throw invalid_input("wavefunction maps need the reduced model");
    if (!sc.contains("flux")) throw invalid_input("wavefunction config needs a 'flux'");
    FluxPoint flux = parse_flux(sc.at("flux"), flux_scale(rs), "flux");
    std::vector<int> states = sc.value("states", std::vector<int>{0, 1, 2, 3});
    if (states.empty()) throw invalid_input("wavefunction needs at least one state");
    for (int s : states)
        if (s < 0) throw invalid_input("state indices must be nonnegative");

    GridSpec grid = GridSpec::default_span();
    if (sc.contains("grid")) {
        const nlohmann::json& g = sc.at("grid");
        double span = g.value("span_rad", grid.phi_max);
        int points = g.value("points", grid.n_phi);
        grid.phi_min = grid.theta_min = -span;
        grid.phi_max = grid.theta_max = span;
        grid.n_phi = grid.n_theta = points;
    }
    grid.validate();

    const int k = std::max(4, *std::max_element(states.begin(), states.end()) + 1);
    SweepOptions so{model, load_trunc(cfg), diag_from(cfg, {}), rs.threads};
    Spectrum spec = circuit_spectrum(p, flux, k, so);

    for (int n : states) {
        WavefunctionGrid wf = wavefunction(spec, n, grid);
        CsvTable t;
        t.header = {"phi_rad", "theta_rad", "re_amp", "im_amp", "prob"};
        for (long i = 0; i < wf.phi_axis.size(); ++i)
            for (long j = 0; j < wf.theta_axis.size(); ++j) {
                std::complex<double> a = wf.amp(i, j);
                t.rows.push_back({format_compact(wf.phi_axis(i)),
                                  format_compact(wf.theta_axis(j)), format_compact(a.real()),
                                  format_compact(a.imag()), format_compact(std::norm(a))});
            }
        write_text_file(outpath(rs, "wf_state" + std::to_string(n) + ".csv"), t.to_text());
    }

    LogicalAssignment la = assign_logical_states(spec, grid);
    nlohmann::json meta = base_meta("wavefunction", rs);
    meta["circuit"] = p;
    meta["flux"] = flux_json(flux);
    meta["states"] = states;
    std::vector<double> energies(k);
    for (int i = 0; i < k; ++i) energies[i] = spec.eigenvalues(i);
    meta["energies_GHz"] = energies;
    meta["logical"] = {{"zero", la.zero_l},
                       {"one", la.one_l},
                       {"method", la.method},
                       {"well_type", std::string(la.well_type.begin(), la.well_type.end())}};
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "wavefunction.json"), meta);
}

namespace {

// The logical pair for coherence and decay runs: an explicit [i, j] or
// "auto", which classifies low-lying wavefunctions (reduced model only).
std::pair<int, int> logical_pair(const nlohmann::json& sc, const Spectrum& spec,
                                 CircuitModel model) {
    int i0 = 0, i1 = 1;
    if (sc.contains("logical")) {
        const nlohmann::json& lg = sc.at("logical");
        if (lg.is_string()) {
            if (lg.get<std::string>() != "auto")
                throw invalid_input("logical must be [i, j] or \"auto\"");
            if (model != CircuitModel::reduced)
                throw invalid_input("logical \"auto\" needs the reduced model");
            LogicalAssignment la = assign_logical_states(spec, GridSpec::default_span());
            i0 = la.zero_l;
            i1 = la.one_l;
        } else {
            std::vector<int> v = lg.get<std::vector<int>>();
            if (v.size() != 2) throw invalid_input("logical must be [i, j] or \"auto\"");
            i0 = v[0];
            i1 = v[1];
        }
    }
    if (i0 == i1 || i0 < 0 || i1 < 0 || i0 >= spec.k() || i1 >= spec.k())
        throw invalid_input("logical pair must be two distinct computed states");
    if (i0 > i1) std::swap(i0, i1);
    return {i0, i1};
}

}  // namespace

void run_coherence(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "coherence");
    CircuitParams p = load_circuit(cfg);
    NoiseParams noise = load_noise(cfg);
    CircuitModel model = load_model(cfg);
    if (!sc.contains("flux")) throw invalid_input("coherence config needs a 'flux'");
    FluxPoint flux = parse_flux(sc.at("flux"), flux_scale(rs), "flux");
    const int k = sc.value("levels", 6);
    if (k < 2) throw invalid_input("coherence needs at least 2 levels");

    SweepOptions so{model, load_trunc(cfg), diag_from(cfg, {}), rs.threads};
    Spectrum spec = circuit_spectrum(p, flux, k, so);
    auto [i0, i1] = logical_pair(sc, spec, model);
    RateTable table = build_rate_table(spec, k, p, noise, rs.threads);

    CsvTable t;
    t.header = {"from", "to", "f_GHz", "capacitive_per_s", "inductive_per_s",
                "quasiparticle_per_s", "total_per_s"};
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            t.rows.push_back({std::to_string(i), std::to_string(j),
                              format_compact(table.energies(j) - table.energies(i)),
                              format_compact(table.gamma[0](i, j)),
                              format_compact(table.gamma[1](i, j)),
                              format_compact(table.gamma[2](i, j)),
                              format_compact(table.total(i, j))});
        }
    write_text_file(outpath(rs, "rates.csv"), t.to_text());

    nlohmann::json states = nlohmann::json::array();
    for (int n = 0; n < k; ++n) {
        double out = state_rate(table, n);
        int best_c = 0, best_j = n == 0 ? 1 : 0;
        double best_rate = -1.0;
        for (int c = 0; c < n_channels; ++c)
            for (int j = 0; j < k; ++j) {
                if (j == n) continue;
                if (table.gamma[c](n, j) > best_rate) {
                    best_rate = table.gamma[c](n, j);
                    best_c = c;
                    best_j = j;
                }
            }
        states.push_back({{"state", n},
                          {"energy_GHz", table.energies(n)},
                          {"gamma1_per_s", out},
                          {"t1_s", finite_or_null(out > 0 ? 1.0 / out : INFINITY)},
                          {"dominant",
                           {{"channel", to_string(static_cast<NoiseChannel>(best_c))},
                            {"to", best_j},
                            {"rate_per_s", best_rate}}}});
    }

    double g1l = logical_rate(table, i0, i1);
    double g2 = gamma2(table, i0, i1);
    nlohmann::json split;
    for (int c = 0; c < n_channels; ++c)
        split[to_string(static_cast<NoiseChannel>(c))] =
            table.gamma[c](i0, i1) + table.gamma[c](i1, i0);
    DephasingResult deph = flux_dephasing_rate(spec, p, i0, i1, noise, so.diag);

    nlohmann::json meta = base_meta("coherence", rs);
    meta["circuit"] = p;
    meta["noise"] = noise;
    meta["model"] = to_string(model);
    meta["truncation"] = so.trunc;
    meta["flux"] = flux_json(flux);
    meta["levels"] = k;
    meta["states"] = std::move(states);
    meta["logical"] = {{"zero", i0},
                       {"one", i1},
                       {"gamma1_logical_per_s", g1l},
                       {"t1_logical_s", finite_or_null(g1l > 0 ? 1.0 / g1l : INFINITY)},
                       {"channel_split_per_s", std::move(split)},
                       {"gamma2_per_s", g2},
                       {"t2_limit_s", finite_or_null(g2 > 0 ? 1.0 / g2 : INFINITY)}};
    meta["flux_dephasing"] = {{"rate_per_s", deph.rate},
                              {"unresolved", deph.unresolved},
                              {"log_warning", deph.log_warning}};
    nlohmann::json unresolved = nlohmann::json::array();
    for (auto [a, b] : table.unresolved) unresolved.push_back({a, b});
    meta["unresolved_pairs"] = std::move(unresolved);
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "coherence.json"), meta);
}

void run_decay(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "decay");

    RateTable table;
    nlohmann::json source;
    Spectrum spec;
    CircuitModel model = load_model(cfg);
    if (sc.contains("table")) {
        const nlohmann::json& tj = sc.at("table");
        std::vector<double> energies = tj.at("energies_GHz").get<std::vector<double>>();
        auto rates = tj.at("rates_per_s").get<std::vector<std::vector<double>>>();
        const int k = static_cast<int>(energies.size());
        if (k < 2) throw invalid_input("synthetic table needs at least 2 levels");
        if (static_cast<int>(rates.size()) != k)
            throw invalid_input("rates_per_s must be a k x k matrix");
        table.energies = Eigen::Map<Eigen::VectorXd>(energies.data(), k);
        for (auto& g : table.gamma) g = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            if (static_cast<int>(rates[i].size()) != k)
                throw invalid_input("rates_per_s must be a k x k matrix");
            for (int j = 0; j < k; ++j)
                if (i != j) table.gamma[0](i, j) = rates[i][j];
        }
        table.validate();
        spec.eigenvalues = table.energies;
        source = {{"kind", "table"}, {"levels", k}};
    } else {
        CircuitParams p = load_circuit(cfg);
        NoiseParams noise = load_noise(cfg);
        if (!sc.contains("flux")) throw invalid_input("decay config needs a 'flux' or a 'table'");
        FluxPoint flux = parse_flux(sc.at("flux"), flux_scale(rs), "flux");
        const int k = sc.value("levels", 6);
        SweepOptions so{model, load_trunc(cfg), diag_from(cfg, {}), rs.threads};
        spec = circuit_spectrum(p, flux, k, so);
        table = build_rate_table(spec, k, p, noise, rs.threads);
        source = {{"kind", "circuit"}, {"levels", k}, {"flux", flux_json(flux)},
                  {"model", to_string(model)}};
    }
    const int k = table.k();

    std::vector<double> times = sample_times(sc);
    const std::string protocol = sc.value("protocol", std::string("t1s"));
    std::vector<int> subspace = sc.value("subspace", std::vector<int>{0, 1});
    for (int s : subspace)
        if (s < 0 || s >= k) throw invalid_input("subspace state outside the computed levels");
    const double noise_frac = sc.value("noise_frac", 0.0);

    EvolveOptions eo;
    nlohmann::json fit_json;
    CsvTable t;
    std::vector<double> pg;
    DensityTrajectory traj;

    if (protocol == "t1s") {
        const int init = sc.value("initial_state", 1);
        if (init < 0 || init >= k) throw invalid_input("initial_state outside the computed levels");
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(k, k);
        rho0(init, init) = 1.0;
        traj = lindblad_evolve(table.energies, table, rho0, times, eo);
        pg = subspace_probability(traj, subspace);
        source["initial_state"] = init;
    } else if (protocol == "t2rs") {
        Spectrum for_pair = spec;
        if (for_pair.eigenvalues.size() == 0) for_pair.eigenvalues = table.energies;
        auto [i0, i1] = logical_pair(sc, for_pair, model);
        const double detuning = sc.value("detuning_hz", 0.0);
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(k, k);
        rho0(i0, i0) = rho0(i1, i1) = 0.5;
        rho0(i0, i1) = rho0(i1, i0) = 0.5;
        traj = lindblad_evolve(table.energies, table, rho0, times, eo);
        // Ramsey readout in the drive frame, detuned from the transition: the
        // in-subspace baseline plus the rotating coherence.
        const double omega01 = two_pi * 1e9 * (table.energies(i1) - table.energies(i0));
        pg.resize(times.size());
        for (size_t i = 0; i < times.size(); ++i) {
            const Eigen::MatrixXcd& rho = traj.rho[i];
            double base = 0.5 * (rho(i0, i0).real() + rho(i1, i1).real());
            std::complex<double> frame =
                std::exp(std::complex<double>(0.0, -(omega01 + two_pi * detuning) * times[i]));
            pg[i] = base + (rho(i0, i1) * frame).real();
        }
        source["logical"] = {i0, i1};
        source["detuning_hz"] = detuning;
    } else {
        throw invalid_input("protocol must be 't1s' or 't2rs'");
    }

    if (noise_frac > 0.0) {
        std::mt19937_64 rng(rs.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& v : pg) v *= 1.0 + noise_frac * normal(rng);
    }

    t.header = {"t_s", "p_g"};
    for (int s = 0; s < k; ++s) t.header.push_back("p" + std::to_string(s));
    for (size_t i = 0; i < times.size(); ++i) {
        std::vector<std::string> row{format_compact(times[i]), format_compact(pg[i])};
        for (int s = 0; s < k; ++s)
            row.push_back(format_compact(traj.rho[i](s, s).real()));
        t.rows.push_back(std::move(row));
    }
    write_text_file(outpath(rs, "decay.csv"), t.to_text());

    if (protocol == "t1s") {
        ExpDecayFit fit = fit_t1s(times, pg);
        fit_json = {{"a", fit.a},          {"b", fit.b},
                    {"t1s_s", fit.t_const}, {"rms", fit.rms},
                    {"converged", fit.converged}, {"few_samples", fit.few_samples}};
    } else {
        RamseyFit fit = fit_t2rs(times, pg);
        fit_json = {{"a", fit.a},
                    {"b", fit.b},
                    {"t2rs_s", fit.t_const},
                    {"freq_hz", fit.freq_hz},
                    {"phase", fit.phase},
                    {"rms", fit.rms},
                    {"converged", fit.converged},
                    {"envelope_only", fit.envelope_only},
                    {"few_samples", fit.few_samples}};
    }

    nlohmann::json meta = base_meta("decay", rs);
    meta["protocol"] = protocol;
    meta["subspace"] = subspace;
    meta["source"] = std::move(source);
    meta["noise_frac"] = noise_frac;
    meta["fit"] = std::move(fit_json);
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "decay.json"), meta);
}

void run_calibrate(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "calibrate");

    std::vector<CalibrationAnchor> anchors;
    if (sc.contains("anchors")) {
        for (const auto& a : sc.at("anchors"))
            anchors.push_back({a.at("v_m_V").get<double>(), a.at("v_l_V").get<double>(),
                               a.at("n_c").get<int>(), a.at("n_d").get<int>()});
    } else if (sc.contains("anchors_file")) {
        CsvTable t = parse_csv(read_text_file(sc.at("anchors_file").get<std::string>()));
        int ivm = t.column("v_m_V"), ivl = t.column("v_l_V");
        int inc = t.column("n_c"), ind = t.column("n_d");
        if (ivm < 0 || ivl < 0 || inc < 0 || ind < 0)
            throw invalid_input("anchors file needs v_m_V, v_l_V, n_c, n_d columns");
        for (const auto& row : t.rows)
            anchors.push_back({std::stod(row[ivm]), std::stod(row[ivl]), std::stoi(row[inc]),
                               std::stoi(row[ind])});
    } else {
        throw invalid_input("calibrate config needs 'anchors' or 'anchors_file'");
    }

    FluxCalibration cal = fit_calibration(anchors);
    double ss = 0.0;
    for (const CalibrationAnchor& a : anchors) {
        FluxPoint f = flux_from_voltages(cal, a.v_m, a.v_l);
        double dc = f.phi_c - two_pi * a.n_c;
        double dd = f.phi_d - two_pi * a.n_d;
        ss += dc * dc + dd * dd;
    }

    nlohmann::json meta = base_meta("calibrate", rs);
    meta["calibration"] = cal;
    meta["anchors"] = anchors.size();
    meta["residual_rms_rad"] = std::sqrt(ss / (2.0 * anchors.size()));
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "calibration.json"), meta);
}

void run_fit(const nlohmann::json& cfg, const RunSettings& rs) {
    const auto t0 = Clock::now();
    const nlohmann::json& sc = section(cfg, "fit");

    FluxCalibration cal;
    bool have_cal = false;
    if (sc.contains("calibration_file")) {
        nlohmann::json cj = read_json_file(sc.at("calibration_file").get<std::string>());
        if (cj.contains("calibration")) {
            if (cj.contains("schema") &&
                cj.value("schema", std::string{}) != artifact_schema)
                throw invalid_input("calibration file carries an unsupported schema tag");
            cal = cj.at("calibration").get<FluxCalibration>();
        } else {
            cal = cj.get<FluxCalibration>();
        }
        cal.validate();
        have_cal = true;
    }

    if (!sc.contains("data_file")) throw invalid_input("fit config needs a 'data_file'");
    TwoToneDataset data = TwoToneDataset::from_csv_text(
        read_text_file(sc.at("data_file").get<std::string>()), have_cal ? &cal : nullptr);

    CircuitParams initial;
    if (sc.contains("initial"))
        initial = sc.at("initial").get<CircuitParams>();
    else
        initial = load_circuit(cfg);
    initial.validate();

    FitBounds bounds;
    if (sc.contains("bounds") && sc.at("bounds").is_object() &&
        sc.at("bounds").contains("lower")) {
        bounds.lower = sc.at("bounds").at("lower").get<CircuitParams>();
        bounds.upper = sc.at("bounds").at("upper").get<CircuitParams>();
    } else {
        double frac = 0.5;
        if (sc.contains("bounds")) frac = sc.at("bounds").value("fraction", frac);
        bounds = FitBounds::fractional(initial, frac);
    }

    CircuitFitOptions fo;
    fo.trunc = sc.contains("truncation") ? sc.at("truncation").get<BasisTruncation>()
                                         : load_trunc(cfg);
    fo.diag = diag_from(sc, diag_from(cfg, {}));
    fo.restarts = sc.value("restarts", fo.restarts);
    fo.restart_spread = sc.value("restart_spread", fo.restart_spread);
    fo.assign_window_ghz = sc.value("window_GHz", fo.assign_window_ghz);
    fo.max_states = sc.value("max_states", fo.max_states);
    fo.from_states = sc.value("from_states", fo.from_states);
    fo.lm.max_iter = sc.value("max_iter", fo.lm.max_iter);
    fo.seed = rs.seed;
    fo.threads = rs.threads;

    CircuitFitResult res = fit_circuit_params(data, initial, bounds, fo);

    nlohmann::json meta = base_meta("fit", rs);
    meta["result"] = fit_result_to_json(res);
    meta["data_records"] = data.records.size();
    meta["truncation"] = fo.trunc;
    meta["restarts"] = fo.restarts;
    meta["window_GHz"] = fo.assign_window_ghz;
    meta["wall_time_s"] = seconds_since(t0);
    write_artifact(outpath(rs, "fit.json"), meta);
}

void run_command(const std::string& name, const nlohmann::json& cfg, const RunSettings& rs) {
    if (rs.threads < 1) throw invalid_input("threads must be at least 1");
    std::error_code ec;
    std::filesystem::create_directories(rs.out_dir, ec);
    if (ec) throw io_failure("cannot create output directory " + rs.out_dir);

    if (name == "spectrum")
        run_spectrum(cfg, rs);
    else if (name == "sweetspots")
        run_sweetspots(cfg, rs);
    else if (name == "wavefunction")
        run_wavefunction(cfg, rs);
    else if (name == "coherence")
        run_coherence(cfg, rs);
    else if (name == "decay")
        run_decay(cfg, rs);
    else if (name == "calibrate")
        run_calibrate(cfg, rs);
    else if (name == "fit")
        run_fit(cfg, rs);
    else
        throw invalid_input("unknown command '" + name +
                            "' (spectrum|sweetspots|wavefunction|coherence|decay|calibrate|fit)");
}

}  // namespace fluxmol
