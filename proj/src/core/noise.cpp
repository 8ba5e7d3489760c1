#include "core/noise.h"

#include <cmath>
#include <string>

#include <gsl/gsl_sf_bessel.h>
#include <nlohmann/json.hpp>

#include "core/constants.h"
#include "core/errors.h"
#include "core/parallel.h"
#include "core/sweep.h"

namespace fluxmol {

namespace cn = constants;

void NoiseParams::validate() const {
    if (!(temperature > 0.0)) throw invalid_input("noise: temperature must be positive");
    if (!(q_cap_ref > 0.0) || !(q_ind_ref > 0.0))
        throw invalid_input("noise: quality factors must be positive");
    if (!(gap_delta > 0.0)) throw invalid_input("noise: gap must be positive");
    if (x_qp < 0.0) throw invalid_input("noise: quasiparticle fraction must be non-negative");
    if (flux_noise_amp_c < 0.0 || flux_noise_amp_d < 0.0)
        throw invalid_input("noise: flux-noise amplitudes must be non-negative");
    if (!(omega_ir > 0.0) || !(ramsey_time > 0.0))
        throw invalid_input("noise: infrared cutoff and probe time must be positive");
}

void to_json(nlohmann::json& j, const NoiseParams& p) {
    j = nlohmann::json{{"temperature_K", p.temperature},
                       {"q_cap_ref", p.q_cap_ref},
                       {"q_ind_ref", p.q_ind_ref},
                       {"gap_delta_eV", p.gap_delta},
                       {"x_qp", p.x_qp},
                       {"flux_noise_amp_c_rad", p.flux_noise_amp_c},
                       {"flux_noise_amp_d_rad", p.flux_noise_amp_d},
                       {"omega_ir_rad_s", p.omega_ir},
                       {"ramsey_time_s", p.ramsey_time}};
}

void from_json(const nlohmann::json& j, NoiseParams& p) {
    NoiseParams d;
    p.temperature = j.value("temperature_K", d.temperature);
    p.q_cap_ref = j.value("q_cap_ref", d.q_cap_ref);
    p.q_ind_ref = j.value("q_ind_ref", d.q_ind_ref);
    p.gap_delta = j.value("gap_delta_eV", d.gap_delta);
    p.x_qp = j.value("x_qp", d.x_qp);
    p.flux_noise_amp_c = j.value("flux_noise_amp_c_rad", d.flux_noise_amp_c);
    p.flux_noise_amp_d = j.value("flux_noise_amp_d_rad", d.flux_noise_amp_d);
    p.omega_ir = j.value("omega_ir_rad_s", d.omega_ir);
    p.ramsey_time = j.value("ramsey_time_s", d.ramsey_time);
}

double k0_sinh_product(double x) {
    if (!(x > 0.0)) throw invalid_input("k0_sinh_product: argument must be positive");
    // K0(x) sinh(x) = [K0(x) e^x] (1 - e^{-2x}) / 2, overflow-free.
    return gsl_sf_bessel_K0_scaled(x) * (1.0 - std::exp(-2.0 * x)) / 2.0;
}

namespace {

double half_thermal_arg(double omega, double temperature) {
    // |x| = hbar |omega| / (2 kB T)
    return cn::hbar_Js * std::abs(omega) / (2.0 * cn::kB_J_per_K * temperature);
}

}  // namespace

double thermal_factor(double omega, double temperature) {
    if (omega == 0.0) throw invalid_input("thermal factor diverges at zero frequency");
    if (!(temperature > 0.0)) throw invalid_input("thermal factor: temperature must be positive");
    const double x = half_thermal_arg(omega, temperature);
    // coth(x)+1 on the emission side, coth(x)-1 on the absorption side; the
    // two branches keep the factor positive and preserve the detailed-balance
    // ratio exp(hbar omega / kB T).
    if (omega > 0.0) return 2.0 / (1.0 - std::exp(-2.0 * x));
    return 2.0 / (std::exp(2.0 * x) - 1.0);
}

double q_cap_at(double omega, const NoiseParams& noise) {
    if (omega == 0.0) throw invalid_input("q_cap_at: frequency must be nonzero");
    return noise.q_cap_ref * std::pow(cn::two_pi * 6e9 / std::abs(omega), 0.7);
}

double q_ind_at(double omega, const NoiseParams& noise) {
    if (omega == 0.0) throw invalid_input("q_ind_at: frequency must be nonzero");
    const double x_ref = cn::hbar_Js * cn::two_pi * 0.5e9 / (2.0 * cn::kB_J_per_K * noise.temperature);
    const double x = half_thermal_arg(omega, noise.temperature);
    return noise.q_ind_ref * k0_sinh_product(x_ref) / k0_sinh_product(x);
}

double junction_capacitance(const CircuitParams& p) {
    return cn::e_C * cn::e_C / (2.0 * p.e_cj * cn::GHz_to_J);
}

double arm_inductance(const CircuitParams& p) {
    return cn::phi0_Wb * cn::phi0_Wb / (p.e_l * cn::GHz_to_J);
}

double s_cap(double omega, const CircuitParams& p, const NoiseParams& noise) {
    noise.validate();
    return cn::hbar_Js / (junction_capacitance(p) * q_cap_at(omega, noise)) *
           thermal_factor(omega, noise.temperature);
}

double s_ind(double omega, const CircuitParams& p, const NoiseParams& noise) {
    noise.validate();
    return cn::hbar_Js / (arm_inductance(p) * q_ind_at(omega, noise)) *
           thermal_factor(omega, noise.temperature);
}

namespace {

// Common admittance prefactor of the quasiparticle channel, with every
// magnitude-like factor taken at |omega|.
double qp_prefactor(double omega, const CircuitParams& p, const NoiseParams& noise) {
    if (omega == 0.0) throw invalid_input("quasiparticle density: frequency must be nonzero");
    const double gap_J = noise.gap_delta * cn::e_C;
    const double hw = cn::hbar_Js * std::abs(omega);
    if (hw >= 2.0 * gap_J)
        throw invalid_input("quasiparticle density: frequency at or above the pair-breaking gap");
    const double x = half_thermal_arg(omega, noise.temperature);
    const double ej_J = p.e_j * cn::GHz_to_J;
    return std::sqrt(2.0 / cn::pi) * (8.0 * ej_J / (cn::R_K_Ohm * gap_J)) *
           std::pow(2.0 * gap_J / hw, 1.5) * noise.x_qp * std::sqrt(x);
}

}  // namespace

double re_y_qp(double omega, const CircuitParams& p, const NoiseParams& noise) {
    noise.validate();
    const double x = half_thermal_arg(omega, noise.temperature);
    return qp_prefactor(omega, p, noise) * k0_sinh_product(x);
}

double s_qp(double omega, const CircuitParams& p, const NoiseParams& noise) {
    noise.validate();
    const double x = half_thermal_arg(omega, noise.temperature);
    // hbar|w| * pref * K0(x) e^{sign(w) x}, written with the scaled Bessel
    // function so large x cannot overflow.
    const double k0exp = gsl_sf_bessel_K0_scaled(x) * (omega > 0.0 ? 1.0 : std::exp(-2.0 * x));
    return cn::hbar_Js * std::abs(omega) * qp_prefactor(omega, p, noise) * k0exp;
}

const char* to_string(NoiseChannel c) {
    switch (c) {
        case NoiseChannel::capacitive: return "capacitive";
        case NoiseChannel::inductive: return "inductive";
        case NoiseChannel::quasiparticle: return "quasiparticle";
    }
    return "?";
}

std::vector<OperatorMatrix> channel_operators(NoiseChannel c, const BasisDescriptor& basis) {
    if (basis.generic || basis.modes.size() < 2)
        throw invalid_input("channel_operators: needs a circuit basis");
    const bool full = basis.modes.size() >= 3;
    const auto& mb = basis.modes;
    const std::complex<double> im{0.0, 1.0};

    auto term = [&](int mode, const Eigen::MatrixXd& f, std::complex<double> coeff) {
        KronTerm t;
        t.coeff = coeff;
        t.factors.assign(mb.size(), Eigen::MatrixXd());
        t.factors[static_cast<size_t>(mode)] = f;
        return t;
    };

    std::vector<OperatorMatrix> ops;
    switch (c) {
        case NoiseChannel::capacitive: {
            // e (n_phi +- n_theta), one operator per junction.
            const Eigen::MatrixXd mp = momentum_antisym(mb[0].n, mb[0].ell);
            const Eigen::MatrixXd mt = momentum_antisym(mb[1].n, mb[1].ell);
            for (double sign : {1.0, -1.0}) {
                ops.emplace_back(basis, std::vector<KronTerm>{
                                            term(0, mp, im * cn::e_C),
                                            term(1, mt, sign * im * cn::e_C)});
            }
            break;
        }
        case NoiseChannel::inductive: {
            // phi0 (+-phi + theta - zeta) for the two arm inductors and
            // phi0 zeta for the shared one; the reduced basis has no zeta.
            const Eigen::MatrixXd xp = position_matrix(mb[0].n, mb[0].ell);
            const Eigen::MatrixXd xt = position_matrix(mb[1].n, mb[1].ell);
            for (double sign : {1.0, -1.0}) {
                std::vector<KronTerm> ts = {term(0, xp, sign * cn::phi0_Wb),
                                            term(1, xt, cn::phi0_Wb)};
                if (full)
                    ts.push_back(term(2, position_matrix(mb[2].n, mb[2].ell), -cn::phi0_Wb));
                ops.emplace_back(basis, std::move(ts));
            }
            if (full) {
                ops.emplace_back(basis, std::vector<KronTerm>{term(
                                            2, position_matrix(mb[2].n, mb[2].ell), cn::phi0_Wb)});
            }
            break;
        }
        case NoiseChannel::quasiparticle: {
            // 2 phi0 sin((phi +- theta)/2), expanded through the half-angle
            // sines and cosines of each mode.
            PositionTrig hp = trig_of_position(mb[0].n, mb[0].ell, 0.5, 0.0);
            PositionTrig ht = trig_of_position(mb[1].n, mb[1].ell, 0.5, 0.0);
            for (double sign : {1.0, -1.0}) {
                KronTerm t1;
                t1.coeff = 2.0 * cn::phi0_Wb;
                t1.factors.assign(mb.size(), Eigen::MatrixXd());
                t1.factors[0] = hp.sin_m;
                t1.factors[1] = ht.cos_m;
                KronTerm t2;
                t2.coeff = sign * 2.0 * cn::phi0_Wb;
                t2.factors.assign(mb.size(), Eigen::MatrixXd());
                t2.factors[0] = hp.cos_m;
                t2.factors[1] = ht.sin_m;
                ops.emplace_back(basis, std::vector<KronTerm>{t1, t2});
            }
            break;
        }
    }
    return ops;
}

namespace {

constexpr double degenerate_floor_ghz = 1e-6;

double channel_density(NoiseChannel c, double omega, const CircuitParams& p,
                       const NoiseParams& noise) {
    switch (c) {
        case NoiseChannel::capacitive: return s_cap(omega, p, noise);
        case NoiseChannel::inductive: return s_ind(omega, p, noise);
        case NoiseChannel::quasiparticle: return s_qp(omega, p, noise);
    }
    return 0.0;
}

}  // namespace

GoldenRate golden_rule_rate(const Spectrum& s, int i, int j, NoiseChannel c,
                            const CircuitParams& p, const NoiseParams& noise) {
    if (i == j) throw invalid_input("golden_rule_rate: states must differ");
    if (i < 0 || j < 0 || i >= s.k() || j >= s.k())
        throw invalid_input("golden_rule_rate: state index out of range");
    noise.validate();
    const double de_ghz = s.eigenvalues[i] - s.eigenvalues[j];
    if (std::abs(de_ghz) < degenerate_floor_ghz) return {0.0, true};
    const double omega = cn::two_pi * 1e9 * de_ghz;
    const double dens = channel_density(c, omega, p, noise);
    double rate = 0.0;
    for (const auto& op : channel_operators(c, s.basis)) {
        const std::complex<double> me = matrix_element(s, op, i, j);
        rate += std::norm(me) * dens / (cn::hbar_Js * cn::hbar_Js);
    }
    return {rate, false};
}

double RateTable::total(int i, int j) const {
    double r = 0.0;
    for (const auto& g : gamma) r += g(i, j);
    return r;
}

void RateTable::validate() const {
    for (const auto& g : gamma) {
        if (g.rows() != k() || g.cols() != k())
            throw invalid_input("rate table: matrix size does not match state count");
        for (int i = 0; i < k(); ++i) {
            if (g(i, i) != 0.0) throw invalid_input("rate table: diagonal must be zero");
            for (int j = 0; j < k(); ++j)
                if (g(i, j) < 0.0) throw invalid_input("rate table: negative rate");
        }
    }
}

RateTable build_rate_table(const Spectrum& s, int k, const CircuitParams& p,
                           const NoiseParams& noise, int threads) {
    if (k < 2 || k > s.k())
        throw invalid_input("build_rate_table: state count must lie in [2, spectrum size]");
    RateTable t;
    t.energies = s.eigenvalues.head(k);
    for (auto& g : t.gamma) g = Eigen::MatrixXd::Zero(k, k);

    // Matrix elements are symmetric under i <-> j up to conjugation, but the
    // spectral density is not, so every ordered pair is evaluated.
    struct Job {
        int i, j, c;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j)
                for (int c = 0; c < n_channels; ++c) jobs.push_back({i, j, c});

    std::vector<char> flagged(jobs.size(), 0);
    parallel_for(static_cast<long>(jobs.size()), threads, [&](long idx) {
        const Job& jb = jobs[static_cast<size_t>(idx)];
        GoldenRate g = golden_rule_rate(s, jb.i, jb.j, static_cast<NoiseChannel>(jb.c), p, noise);
        t.gamma[static_cast<size_t>(jb.c)](jb.i, jb.j) = g.rate;
        flagged[static_cast<size_t>(idx)] = g.unresolved ? 1 : 0;
    });
    for (size_t idx = 0; idx < jobs.size(); ++idx) {
        if (!flagged[idx]) continue;
        const auto [i, j, c] = jobs[idx];
        const auto pr = std::make_pair(std::min(i, j), std::max(i, j));
        bool seen = false;
        for (const auto& u : t.unresolved)
            if (u == pr) {
                seen = true;
                break;
            }
        if (!seen) t.unresolved.push_back(pr);
    }
    return t;
}

double state_rate(const RateTable& t, int n) {
    if (n < 0 || n >= t.k()) throw invalid_input("state_rate: index out of range");
    double r = 0.0;
    for (int j = 0; j < t.k(); ++j)
        if (j != n) r += t.total(n, j);
    return r;
}

double logical_rate(const RateTable& t, int i_l, int j_l) {
    if (i_l < 0 || j_l < 0 || i_l >= t.k() || j_l >= t.k() || i_l == j_l)
        throw invalid_input("logical_rate: bad logical state indices");
    return t.total(i_l, j_l) + t.total(j_l, i_l);
}

double gamma2(const RateTable& t, int i_l, int j_l) {
    if (i_l < 0 || j_l < 0 || i_l >= t.k() || j_l >= t.k() || i_l == j_l)
        throw invalid_input("gamma2: bad logical state indices");
    return 0.5 * (state_rate(t, i_l) + state_rate(t, j_l));
}

DephasingResult flux_dephasing_rate(const Spectrum& s, const CircuitParams& p, int i, int j,
                                    const NoiseParams& noise, const DiagOptions& diag) {
    if (!s.has_flux_context)
        throw invalid_input("flux_dephasing_rate: spectrum lacks flux context");
    if (i == j) throw invalid_input("flux_dephasing_rate: states must differ");
    noise.validate();

    DispersionOptions dopts;
    dopts.model = s.basis.model;
    dopts.trunc.n_phi = s.basis.modes[0].n;
    dopts.trunc.n_theta = s.basis.modes[1].n;
    dopts.trunc.n_zeta = s.basis.modes.size() > 2 ? s.basis.modes[2].n : 4;
    dopts.diag = diag;
    DispersionResult disp = flux_dispersion(p, s.flux, i, j, dopts);

    DephasingResult out;
    out.unresolved = disp.unresolved;
    out.log_warning = noise.omega_ir * noise.ramsey_time >= 0.5;
    const double logf = std::sqrt(std::abs(std::log(2.0 * noise.omega_ir * noise.ramsey_time)));
    out.rate = (noise.flux_noise_amp_c * std::abs(disp.grad[0]) +
                noise.flux_noise_amp_d * std::abs(disp.grad[1])) *
               logf * cn::two_pi * 1e9;
    return out;
}

}  // namespace fluxmol
