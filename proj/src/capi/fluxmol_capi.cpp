#include "fluxmol/fluxmol.h"

#include <cstdio>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "core/commands.h"
#include "core/errors.h"
#include "core/hamiltonian.h"
#include "core/sweep.h"
#include "core/types.h"

using namespace fluxmol;

struct fm_circuit {
    CircuitParams params;
    CircuitModel model = CircuitModel::reduced;
    BasisTruncation trunc;
    DiagOptions diag;
};

struct fm_spectrum {
    Spectrum s;
};

namespace {

void set_err(char* err, size_t err_len, const char* msg) {
    if (err == nullptr || err_len == 0) return;
    std::snprintf(err, err_len, "%s", msg);
}

template <typename Fn>
fm_status guarded(char* err, size_t err_len, Fn&& fn) {
    try {
        fn();
        if (err != nullptr && err_len > 0) err[0] = '\0';
        return FM_OK;
    } catch (const invalid_input& e) {
        set_err(err, err_len, e.what());
        return FM_ERR_INVALID;
    } catch (const io_failure& e) {
        set_err(err, err_len, e.what());
        return FM_ERR_IO;
    } catch (const numeric_failure& e) {
        set_err(err, err_len, e.what());
        return FM_ERR_NUMERIC;
    } catch (const std::exception& e) {
        set_err(err, err_len, e.what());
        return FM_ERR_INVALID;
    }
}

nlohmann::json parse_config(const char* text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw invalid_input(std::string("config: ") + e.what());
    }
}

}  // namespace

extern "C" {

const char* fm_version(void) { return "1.0.0"; }

fm_status fm_circuit_create_json(const char* json_text, fm_circuit** out, char* err,
                                 size_t err_len) {
    if (out != nullptr) *out = nullptr;
    return guarded(err, err_len, [&] {
        if (json_text == nullptr || out == nullptr)
            throw invalid_input("json_text and out must not be NULL");
        nlohmann::json j = parse_config(json_text);
        auto c = std::make_unique<fm_circuit>();
        if (!j.contains("circuit")) throw invalid_input("config needs a 'circuit' object");
        c->params = j.at("circuit").get<CircuitParams>();
        c->params.validate();
        c->model = model_from_string(j.value("model", std::string("reduced")));
        if (j.contains("truncation")) c->trunc = j.at("truncation").get<BasisTruncation>();
        c->trunc.validate();
        if (j.contains("diag")) {
            const nlohmann::json& d = j.at("diag");
            c->diag.dense_threshold = d.value("dense_threshold", c->diag.dense_threshold);
            c->diag.tol = d.value("tol", c->diag.tol);
            c->diag.max_iter = d.value("max_iter", c->diag.max_iter);
        }
        *out = c.release();
    });
}

void fm_circuit_destroy(fm_circuit* c) { delete c; }

fm_status fm_zeta_frequency(const fm_circuit* c, double* out_ghz, char* err, size_t err_len) {
    return guarded(err, err_len, [&] {
        if (c == nullptr || out_ghz == nullptr)
            throw invalid_input("circuit and out_ghz must not be NULL");
        *out_ghz = zeta_frequency(c->params);
    });
}

fm_status fm_diagonalize(const fm_circuit* c, double phi_c, double phi_d, int k,
                         fm_spectrum** out, char* err, size_t err_len) {
    if (out != nullptr) *out = nullptr;
    return guarded(err, err_len, [&] {
        if (c == nullptr || out == nullptr)
            throw invalid_input("circuit and out must not be NULL");
        SweepOptions so{c->model, c->trunc, c->diag, 1};
        auto s = std::make_unique<fm_spectrum>();
        s->s = circuit_spectrum(c->params, FluxPoint{phi_c, phi_d}, k, so);
        *out = s.release();
    });
}

void fm_spectrum_destroy(fm_spectrum* s) { delete s; }

int fm_spectrum_size(const fm_spectrum* s) { return s == nullptr ? -1 : s->s.k(); }

fm_status fm_spectrum_eigenvalues(const fm_spectrum* s, double* out, int cap, char* err,
                                  size_t err_len) {
    return guarded(err, err_len, [&] {
        if (s == nullptr || out == nullptr)
            throw invalid_input("spectrum and out must not be NULL");
        if (cap < s->s.k())
            throw invalid_input("buffer holds " + std::to_string(cap) + " values, need " +
                                std::to_string(s->s.k()));
        for (int i = 0; i < s->s.k(); ++i) out[i] = s->s.eigenvalues(i);
    });
}

fm_status fm_run_command(const char* name, const char* config_json, const char* out_dir,
                         long long seed, int threads, fm_flux_units flux_units, char* err,
                         size_t err_len) {
    return guarded(err, err_len, [&] {
        if (name == nullptr || config_json == nullptr)
            throw invalid_input("name and config_json must not be NULL");
        nlohmann::json cfg = parse_config(config_json);
        RunSettings rs = settings_from_config(cfg);
        if (out_dir != nullptr && out_dir[0] != '\0') rs.out_dir = out_dir;
        if (seed >= 0) rs.seed = static_cast<std::uint64_t>(seed);
        if (threads >= 1) rs.threads = threads;
        if (flux_units == FM_FLUX_RADIANS)
            rs.flux_two_pi = false;
        else if (flux_units == FM_FLUX_TWO_PI)
            rs.flux_two_pi = true;
        else if (flux_units != FM_FLUX_FROM_CONFIG)
            throw invalid_input("unknown flux_units value");
        run_command(name, cfg, rs);
    });
}

}  // extern "C"
