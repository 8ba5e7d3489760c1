#include "core/types.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "core/errors.h"

namespace fluxmol {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw invalid_input(std::string(name) + " must be a positive finite number");
}

void require_fraction(double v, const char* name) {
    if (!std::isfinite(v) || !(v > -1.0 && v < 1.0))
        throw invalid_input(std::string(name) + " must lie strictly inside (-1, 1)");
}

}  // namespace

void CircuitParams::validate() const {
    require_positive(e_j, "EJ_GHz");
    require_positive(e_l, "EL_GHz");
    require_positive(e_ls, "ELs_GHz");
    require_positive(e_cj, "ECJ_GHz");
    require_positive(e_c, "EC_GHz");
    require_fraction(d_cj, "dCJ");
    require_fraction(d_l, "dL");
    require_fraction(d_ej, "dEJ");
}

void to_json(nlohmann::json& j, const CircuitParams& p) {
    j = nlohmann::json{{"EJ_GHz", p.e_j},   {"EL_GHz", p.e_l}, {"ELs_GHz", p.e_ls},
                       {"ECJ_GHz", p.e_cj}, {"EC_GHz", p.e_c}, {"dCJ", p.d_cj},
                       {"dL", p.d_l},       {"dEJ", p.d_ej}};
}

void from_json(const nlohmann::json& j, CircuitParams& p) {
    for (const char* key : {"EJ_GHz", "EL_GHz", "ELs_GHz", "ECJ_GHz", "EC_GHz"}) {
        if (!j.contains(key))
            throw invalid_input("circuit parameters: missing required key \"" +
                                std::string(key) + "\"");
    }
    p.e_j = j.at("EJ_GHz").get<double>();
    p.e_l = j.at("EL_GHz").get<double>();
    p.e_ls = j.at("ELs_GHz").get<double>();
    p.e_cj = j.at("ECJ_GHz").get<double>();
    p.e_c = j.at("EC_GHz").get<double>();
    p.d_cj = j.value("dCJ", 0.0);
    p.d_l = j.value("dL", 0.0);
    p.d_ej = j.value("dEJ", 0.0);
}

void FluxPoint::validate() const {
    if (!std::isfinite(phi_c) || !std::isfinite(phi_d))
        throw invalid_input("flux bias must be finite");
}

void BasisTruncation::validate() const {
    if (n_phi < 4 || n_theta < 4 || n_zeta < 4)
        throw invalid_input("basis truncation: every mode cutoff must be at least 4");
    // Guard against accidental multi-gigabyte requests; the dense eigensolver
    // and the iterative one both key off the product dimension.
    constexpr long guard = 2'000'000;
    if (total_dim() > guard)
        throw invalid_input("basis truncation: total dimension exceeds the memory guard");
}

void to_json(nlohmann::json& j, const BasisTruncation& t) {
    j = nlohmann::json{{"n_phi", t.n_phi}, {"n_theta", t.n_theta}, {"n_zeta", t.n_zeta}};
}

void from_json(const nlohmann::json& j, BasisTruncation& t) {
    t.n_phi = j.value("n_phi", 35);
    t.n_theta = j.value("n_theta", 35);
    t.n_zeta = j.value("n_zeta", 6);
}

CircuitModel model_from_string(const std::string& s) {
    if (s == "full") return CircuitModel::full;
    if (s == "reduced") return CircuitModel::reduced;
    throw invalid_input("unknown circuit model \"" + s + "\" (expected \"full\" or \"reduced\")");
}

const char* to_string(CircuitModel m) {
    return m == CircuitModel::full ? "full" : "reduced";
}

}  // namespace fluxmol
