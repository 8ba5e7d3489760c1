#include "core/fluxcal.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "core/errors.h"
#include "core/hamiltonian.h"
#include "core/io.h"
#include "core/parallel.h"

namespace fluxmol {

void FluxCalibration::validate() const {
    for (double v : {alpha_m, alpha_l, beta_m, beta_l, phi_offset_c, phi_offset_d})
        if (!std::isfinite(v)) throw invalid_input("calibration entries must be finite");
    if (std::abs(det()) <= 1e-12) throw invalid_input("calibration matrix is singular");
}

void to_json(nlohmann::json& j, const FluxCalibration& c) {
    j = nlohmann::json{{"alpha_m_rad_per_V", c.alpha_m}, {"alpha_l_rad_per_V", c.alpha_l},
                       {"beta_m_rad_per_V", c.beta_m},   {"beta_l_rad_per_V", c.beta_l},
                       {"phi_offset_c_rad", c.phi_offset_c},
                       {"phi_offset_d_rad", c.phi_offset_d}};
}

void from_json(const nlohmann::json& j, FluxCalibration& c) {
    for (const char* key : {"alpha_m_rad_per_V", "alpha_l_rad_per_V", "beta_m_rad_per_V",
                            "beta_l_rad_per_V", "phi_offset_c_rad", "phi_offset_d_rad"})
        if (!j.contains(key)) throw invalid_input(std::string("calibration is missing ") + key);
    c.alpha_m = j.at("alpha_m_rad_per_V").get<double>();
    c.alpha_l = j.at("alpha_l_rad_per_V").get<double>();
    c.beta_m = j.at("beta_m_rad_per_V").get<double>();
    c.beta_l = j.at("beta_l_rad_per_V").get<double>();
    c.phi_offset_c = j.at("phi_offset_c_rad").get<double>();
    c.phi_offset_d = j.at("phi_offset_d_rad").get<double>();
}

FluxPoint flux_from_voltages(const FluxCalibration& cal, double v_m, double v_l) {
    cal.validate();
    if (!std::isfinite(v_m) || !std::isfinite(v_l))
        throw invalid_input("voltages must be finite");
    return {cal.alpha_m * v_m + cal.alpha_l * v_l + cal.phi_offset_c,
            cal.beta_m * v_m + cal.beta_l * v_l + cal.phi_offset_d};
}

void voltages_from_flux(const FluxCalibration& cal, const FluxPoint& flux, double& v_m,
                        double& v_l) {
    cal.validate();
    flux.validate();
    double rc = flux.phi_c - cal.phi_offset_c;
    double rd = flux.phi_d - cal.phi_offset_d;
    double d = cal.det();
    v_m = (cal.beta_l * rc - cal.alpha_l * rd) / d;
    v_l = (cal.alpha_m * rd - cal.beta_m * rc) / d;
}

FluxCalibration fit_calibration(const std::vector<CalibrationAnchor>& anchors) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    if (anchors.size() < 4)
        throw invalid_input("calibration needs at least 4 anchors, got " +
                            std::to_string(anchors.size()));
    const int n = static_cast<int>(anchors.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd bc(n), bd(n);
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(anchors[i].v_m) || !std::isfinite(anchors[i].v_l))
            throw invalid_input("anchor voltages must be finite");
        a(i, 0) = anchors[i].v_m;
        a(i, 1) = anchors[i].v_l;
        a(i, 2) = 1.0;
        bc(i) = two_pi * anchors[i].n_c;
        bd(i) = two_pi * anchors[i].n_d;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(2) <= 1e-10 * sv(0))
        throw invalid_input("calibration anchors are rank deficient: voltages must span both axes");
    Eigen::Vector3d xc = svd.solve(bc);
    Eigen::Vector3d xd = svd.solve(bd);
    FluxCalibration cal;
    cal.alpha_m = xc(0);
    cal.alpha_l = xc(1);
    cal.phi_offset_c = xc(2);
    cal.beta_m = xd(0);
    cal.beta_l = xd(1);
    cal.phi_offset_d = xd(2);
    cal.validate();
    return cal;
}

void TwoToneDataset::validate() const {
    for (size_t i = 0; i < records.size(); ++i) {
        const TwoToneRecord& r = records[i];
        const std::string at = "record " + std::to_string(i) + ": ";
        r.flux.validate();
        if (!(std::isfinite(r.f_ghz) && r.f_ghz > 0.0))
            throw invalid_input(at + "transition frequency must be positive");
        if (!(std::isfinite(r.sigma_ghz) && r.sigma_ghz > 0.0))
            throw invalid_input(at + "sigma must be positive");
        if (r.from_state.has_value() != r.to_state.has_value())
            throw invalid_input(at + "labels need both from_state and to_state");
        if (r.labeled() && (*r.from_state < 0 || *r.to_state <= *r.from_state))
            throw invalid_input(at + "labels need 0 <= from_state < to_state");
    }
}

namespace {

double parse_cell_double(const std::string& cell, const char* what, size_t row) {
    try {
        size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw invalid_input("data row " + std::to_string(row) + ": bad " + what + " value '" +
                            cell + "'");
    }
}

int parse_cell_int(const std::string& cell, const char* what, size_t row) {
    try {
        size_t pos = 0;
        int v = std::stoi(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw invalid_input("data row " + std::to_string(row) + ": bad " + what + " value '" +
                            cell + "'");
    }
}

}  // namespace

TwoToneDataset TwoToneDataset::from_csv_text(const std::string& text,
                                             const FluxCalibration* cal) {
    CsvTable t = parse_csv(text);
    const int ic = t.column("phi_c_rad"), idd = t.column("phi_d_rad");
    const int ivm = t.column("v_m_V"), ivl = t.column("v_l_V");
    const int iff = t.column("f_GHz"), isg = t.column("sigma_GHz");
    const int ifr = t.column("from_state"), ito = t.column("to_state");
    const bool flux_cols = ic >= 0 && idd >= 0;
    const bool volt_cols = ivm >= 0 && ivl >= 0;
    if (!flux_cols && !volt_cols)
        throw invalid_input("dataset needs phi_c_rad/phi_d_rad or v_m_V/v_l_V columns");
    if (!flux_cols && cal == nullptr)
        throw invalid_input("voltage-space dataset needs a calibration to convert to flux");
    if (iff < 0) throw invalid_input("dataset needs an f_GHz column");

    TwoToneDataset out;
    out.records.reserve(t.rows.size());
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const size_t line = r + 1;  // 1-based in messages, header not counted
        TwoToneRecord rec;
        if (flux_cols) {
            rec.flux.phi_c = parse_cell_double(row[ic], "phi_c_rad", line);
            rec.flux.phi_d = parse_cell_double(row[idd], "phi_d_rad", line);
        } else {
            double vm = parse_cell_double(row[ivm], "v_m_V", line);
            double vl = parse_cell_double(row[ivl], "v_l_V", line);
            rec.flux = flux_from_voltages(*cal, vm, vl);
        }
        rec.f_ghz = parse_cell_double(row[iff], "f_GHz", line);
        if (isg >= 0 && !row[isg].empty())
            rec.sigma_ghz = parse_cell_double(row[isg], "sigma_GHz", line);
        const bool has_from = ifr >= 0 && !row[ifr].empty();
        const bool has_to = ito >= 0 && !row[ito].empty();
        if (has_from != has_to)
            throw invalid_input("data row " + std::to_string(line) +
                                ": labels need both from_state and to_state");
        if (has_from) {
            rec.from_state = parse_cell_int(row[ifr], "from_state", line);
            rec.to_state = parse_cell_int(row[ito], "to_state", line);
        }
        out.records.push_back(rec);
    }
    out.validate();
    return out;
}

std::string TwoToneDataset::to_csv_text() const {
    CsvTable t;
    t.header = {"phi_c_rad", "phi_d_rad", "f_GHz", "sigma_GHz", "from_state", "to_state"};
    for (const TwoToneRecord& r : records) {
        std::vector<std::string> row{format_compact(r.flux.phi_c), format_compact(r.flux.phi_d),
                                     format_compact(r.f_ghz), format_compact(r.sigma_ghz),
                                     r.labeled() ? std::to_string(*r.from_state) : std::string{},
                                     r.labeled() ? std::to_string(*r.to_state) : std::string{}};
        t.rows.push_back(std::move(row));
    }
    return t.to_text();
}

namespace {

std::vector<int> clean_from_states(const std::vector<int>& from_states, int max_states) {
    if (from_states.empty()) throw invalid_input("from_states must not be empty");
    std::vector<int> out = from_states;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.front() < 0) throw invalid_input("from_states must be nonnegative");
    if (out.back() + 1 >= max_states)
        throw invalid_input("max_states must exceed every from state by at least 2");
    return out;
}

}  // namespace

std::vector<PredictedTransition> predict_transitions(const CircuitParams& params,
                                                     const FluxPoint& flux,
                                                     const PredictOptions& opt) {
    params.validate();
    flux.validate();
    opt.trunc.validate();
    if (!(opt.max_f_ghz > 0.0)) throw invalid_input("max_f must be positive");
    std::vector<int> from = clean_from_states(opt.from_states, opt.max_states);

    OperatorMatrix h = build_hamiltonian(params, flux, opt.trunc, CircuitModel::full);
    int k = static_cast<int>(std::min<long>(opt.max_states, opt.trunc.total_dim()));
    Spectrum s = diagonalize(h, k, opt.diag);

    std::vector<PredictedTransition> out;
    for (int i : from) {
        if (i >= s.k()) break;
        for (int j = i + 1; j < s.k(); ++j) {
            double f = s.eigenvalues(j) - s.eigenvalues(i);
            if (f < opt.max_f_ghz) out.push_back({i, j, f});
        }
    }
    std::sort(out.begin(), out.end(), [](const PredictedTransition& a,
                                         const PredictedTransition& b) {
        if (a.from != b.from) return a.from < b.from;
        if (a.f_ghz != b.f_ghz) return a.f_ghz < b.f_ghz;
        return a.to < b.to;
    });
    return out;
}

namespace {

std::array<double, 5> pack_energies(const CircuitParams& p) {
    return {p.e_j, p.e_l, p.e_ls, p.e_cj, p.e_c};
}

CircuitParams unpack_energies(const Eigen::VectorXd& x) {
    CircuitParams p;
    p.e_j = x(0);
    p.e_l = x(1);
    p.e_ls = x(2);
    p.e_cj = x(3);
    p.e_c = x(4);
    return p;
}

}  // namespace

void FitBounds::validate() const {
    lower.validate();
    upper.validate();
    auto lo = pack_energies(lower), hi = pack_energies(upper);
    for (int i = 0; i < 5; ++i)
        if (!(lo[i] < hi[i]))
            throw invalid_input("fit bounds need lower < upper for every energy");
}

FitBounds FitBounds::fractional(const CircuitParams& center, double frac) {
    center.validate();
    if (!(frac > 0.0 && frac < 1.0))
        throw invalid_input("bounds fraction must lie in (0, 1)");
    FitBounds b;
    b.lower = center;
    b.upper = center;
    b.lower.e_j = center.e_j * (1 - frac);
    b.lower.e_l = center.e_l * (1 - frac);
    b.lower.e_ls = center.e_ls * (1 - frac);
    b.lower.e_cj = center.e_cj * (1 - frac);
    b.lower.e_c = center.e_c * (1 - frac);
    b.upper.e_j = center.e_j * (1 + frac);
    b.upper.e_l = center.e_l * (1 + frac);
    b.upper.e_ls = center.e_ls * (1 + frac);
    b.upper.e_cj = center.e_cj * (1 + frac);
    b.upper.e_c = center.e_c * (1 + frac);
    b.lower.d_cj = b.lower.d_l = b.lower.d_ej = 0.0;
    b.upper.d_cj = b.upper.d_l = b.upper.d_ej = 0.0;
    return b;
}

namespace {

struct AssignmentEntry {
    int from = -1;  // -1 marks a rejected peak
    int to = -1;
    bool ambiguous = false;

    bool operator==(const AssignmentEntry&) const = default;
};
using Assignment = std::vector<AssignmentEntry>;

struct FitProblem {
    const TwoToneDataset* data = nullptr;
    const CircuitFitOptions* opt = nullptr;
    std::vector<FluxPoint> unique_flux;
    std::vector<int> flux_of_record;
    std::vector<int> from_states;
    int kmax = 0;

    // Lowest kmax eigenvalues of the three-mode model at every distinct flux
    // in the dataset.
    std::vector<Eigen::VectorXd> evaluate(const Eigen::VectorXd& x) const {
        CircuitParams p = unpack_energies(x);
        std::vector<Eigen::VectorXd> evals(unique_flux.size());
        parallel_for(static_cast<long>(unique_flux.size()), opt->threads, [&](long i) {
            OperatorMatrix h = build_full_hamiltonian(p, unique_flux[i], opt->trunc);
            evals[i] = diagonalize(h, kmax, opt->diag).eigenvalues;
        });
        return evals;
    }

    Assignment assign(const std::vector<Eigen::VectorXd>& evals) const {
        const double window = opt->assign_window_ghz;
        Assignment asg(data->records.size());
        for (size_t r = 0; r < data->records.size(); ++r) {
            const TwoToneRecord& rec = data->records[r];
            if (rec.labeled()) {
                asg[r] = {*rec.from_state, *rec.to_state, false};
                continue;
            }
            const Eigen::VectorXd& ev = evals[flux_of_record[r]];
            double best = std::numeric_limits<double>::infinity(), second = best;
            int bi = -1, bj = -1;
            for (int i : from_states) {
                for (int j = i + 1; j < ev.size(); ++j) {
                    double d = std::abs(rec.f_ghz - (ev(j) - ev(i)));
                    if (d < best) {
                        second = best;
                        best = d;
                        bi = i;
                        bj = j;
                    } else if (d < second) {
                        second = d;
                    }
                }
            }
            if (bi < 0 || best > window)
                asg[r] = {};
            else
                asg[r] = {bi, bj, second <= window};
        }
        return asg;
    }

    Eigen::VectorXd residuals(const Assignment& asg,
                              const std::vector<Eigen::VectorXd>& evals) const {
        long m = 0;
        for (const AssignmentEntry& e : asg) m += e.from >= 0;
        Eigen::VectorXd res(m);
        long idx = 0;
        for (size_t r = 0; r < asg.size(); ++r) {
            if (asg[r].from < 0) continue;
            const TwoToneRecord& rec = data->records[r];
            const Eigen::VectorXd& ev = evals[flux_of_record[r]];
            double f_model = ev(asg[r].to) - ev(asg[r].from);
            double w = asg[r].ambiguous ? std::sqrt(0.5) : 1.0;
            res(idx++) = w * (rec.f_ghz - f_model) / rec.sigma_ghz;
        }
        return res;
    }

    // Records outside the window still count against a candidate solution, at
    // the window edge; otherwise a start could win by explaining nothing.
    double rejection_penalty(const Assignment& asg) const {
        double pen = 0.0;
        for (size_t r = 0; r < asg.size(); ++r)
            if (asg[r].from < 0) {
                double q = opt->assign_window_ghz / data->records[r].sigma_ghz;
                pen += q * q;
            }
        return pen;
    }
};

struct StartOutcome {
    LMResult lm;
    Assignment asg;
    double ranked_cost = std::numeric_limits<double>::infinity();
    int total_iterations = 0;
};

StartOutcome run_one_start(const FitProblem& pr, const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           bool any_unlabeled) {
    const CircuitFitOptions& opt = *pr.opt;
    StartOutcome out;
    Eigen::VectorXd x = x0;
    Assignment asg = pr.assign(pr.evaluate(x));
    out.lm.x = x;
    for (int round = 0; round < opt.max_assignment_rounds; ++round) {
        bool any_included = false;
        for (const AssignmentEntry& e : asg) any_included |= e.from >= 0;
        if (!any_included) break;
        ResidualFn f = [&](const Eigen::VectorXd& p) {
            return pr.residuals(asg, pr.evaluate(p));
        };
        out.lm = levenberg_marquardt(f, x, lo, hi, opt.lm);
        out.total_iterations += out.lm.iterations;
        x = out.lm.x;
        if (!any_unlabeled) break;
        Assignment next = pr.assign(pr.evaluate(x));
        if (next == asg) break;
        asg = std::move(next);
    }
    out.asg = std::move(asg);
    out.ranked_cost = out.lm.residual.size() > 0 ? out.lm.sum_sq : 0.0;
    out.ranked_cost += pr.rejection_penalty(out.asg);
    return out;
}

}  // namespace

nlohmann::json fit_result_to_json(const CircuitFitResult& r) {
    nlohmann::json jp;
    to_json(jp, r.params);
    auto hw = [&](double v) {
        return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json("unbounded");
    };
    return nlohmann::json{
        {"params", jp},
        {"half_width_GHz",
         {{"EJ", hw(r.half_width_ghz[0])},
          {"EL", hw(r.half_width_ghz[1])},
          {"ELs", hw(r.half_width_ghz[2])},
          {"ECJ", hw(r.half_width_ghz[3])},
          {"EC", hw(r.half_width_ghz[4])}}},
        {"residual_rms_GHz", r.residual_rms_ghz},
        {"cost", r.cost},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"misfit", r.misfit},
        {"rejected", r.rejected},
        {"ambiguous", r.ambiguous}};
}

CircuitFitResult fit_circuit_params(const TwoToneDataset& data, const CircuitParams& initial,
                                    const FitBounds& bounds, const CircuitFitOptions& opt) {
    data.validate();
    if (data.records.size() < 15)
        throw invalid_input("fitting five energies needs at least 15 records, got " +
                            std::to_string(data.records.size()));
    initial.validate();
    bounds.validate();
    opt.trunc.validate();
    if (opt.restarts < 0) throw invalid_input("restarts must be nonnegative");
    if (!(opt.restart_spread >= 0.0 && opt.restart_spread < 1.0))
        throw invalid_input("restart_spread must lie in [0, 1)");
    if (!(opt.assign_window_ghz > 0.0)) throw invalid_input("assignment window must be positive");
    if (opt.max_assignment_rounds < 1)
        throw invalid_input("max_assignment_rounds must be at least 1");

    FitProblem pr;
    pr.data = &data;
    pr.opt = &opt;
    pr.kmax = static_cast<int>(std::min<long>(opt.max_states, opt.trunc.total_dim()));
    pr.from_states = clean_from_states(opt.from_states, pr.kmax);
    for (const TwoToneRecord& rec : data.records)
        if (rec.labeled() && *rec.to_state >= pr.kmax)
            throw invalid_input("label to_state " + std::to_string(*rec.to_state) +
                                " is outside the resolved states (max_states " +
                                std::to_string(pr.kmax) + ")");

    std::map<std::pair<double, double>, int> flux_index;
    for (const TwoToneRecord& rec : data.records) {
        auto key = std::make_pair(rec.flux.phi_c, rec.flux.phi_d);
        auto it = flux_index.find(key);
        if (it == flux_index.end()) {
            it = flux_index.emplace(key, static_cast<int>(pr.unique_flux.size())).first;
            pr.unique_flux.push_back(rec.flux);
        }
        pr.flux_of_record.push_back(it->second);
    }

    const auto p0 = pack_energies(initial);
    const auto plo = pack_energies(bounds.lower);
    const auto phi = pack_energies(bounds.upper);
    Eigen::VectorXd x0(5), lo(5), hi(5);
    for (int i = 0; i < 5; ++i) {
        if (p0[i] < plo[i] || p0[i] > phi[i])
            throw invalid_input("initial guess lies outside the fit bounds");
        x0(i) = p0[i];
        lo(i) = plo[i];
        hi(i) = phi[i];
    }

    bool any_unlabeled = false;
    for (const TwoToneRecord& rec : data.records) any_unlabeled |= !rec.labeled();

    // The initial guess plus Latin-hypercube perturbations of it: one stratum
    // per restart and axis, visited in shuffled order.
    std::vector<Eigen::VectorXd> starts{x0};
    if (opt.restarts > 0) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const int n = opt.restarts;
        std::array<std::vector<int>, 5> strata;
        for (auto& s : strata) {
            s.resize(n);
            for (int i = 0; i < n; ++i) s[i] = i;
            std::shuffle(s.begin(), s.end(), rng);
        }
        for (int r = 0; r < n; ++r) {
            Eigen::VectorXd x(5);
            for (int d = 0; d < 5; ++d) {
                double u = (strata[d][r] + uni(rng)) / n;
                double v = x0(d) * (1.0 + opt.restart_spread * (2.0 * u - 1.0));
                x(d) = std::clamp(v, lo(d), hi(d));
            }
            starts.push_back(x);
        }
    }

    StartOutcome best;
    bool have_best = false;
    for (const Eigen::VectorXd& s : starts) {
        StartOutcome o = run_one_start(pr, s, lo, hi, any_unlabeled);
        if (!have_best || o.ranked_cost < best.ranked_cost) {
            best = std::move(o);
            have_best = true;
        }
        // A numerically exact fit cannot be improved on; skip the rest.
        if (best.ranked_cost <= 1e-16) break;
    }

    CircuitFitResult result;
    result.params = unpack_energies(best.lm.x);
    result.params.d_cj = result.params.d_l = result.params.d_ej = 0.0;
    result.cost = best.lm.sum_sq;
    result.iterations = best.total_iterations;
    result.converged = best.lm.converged;

    const auto evals = pr.evaluate(best.lm.x);
    double ss = 0.0;
    long m = 0;
    for (size_t r = 0; r < best.asg.size(); ++r) {
        const AssignmentEntry& e = best.asg[r];
        if (e.from < 0) {
            ++result.rejected;
            continue;
        }
        result.ambiguous += e.ambiguous;
        const Eigen::VectorXd& ev = evals[pr.flux_of_record[r]];
        double diff = data.records[r].f_ghz - (ev(e.to) - ev(e.from));
        ss += diff * diff;
        ++m;
    }
    result.residual_rms_ghz = m > 0 ? std::sqrt(ss / m) : 0.0;

    std::vector<double> sigmas;
    sigmas.reserve(data.records.size());
    for (const TwoToneRecord& rec : data.records) sigmas.push_back(rec.sigma_ghz);
    std::nth_element(sigmas.begin(), sigmas.begin() + sigmas.size() / 2, sigmas.end());
    const double median_sigma = sigmas[sigmas.size() / 2];
    result.misfit = result.residual_rms_ghz > 5.0 * median_sigma;

    // Local confidence half-widths: diagonal of s^2 (J^T J)^-1 at the
    // solution, with unconstrained directions reported as infinite.
    result.half_width_ghz.fill(std::numeric_limits<double>::infinity());
    const long rows = best.lm.jacobian.rows();
    if (rows > 5 && best.lm.jacobian.cols() == 5) {
        Eigen::MatrixXd jtj = best.lm.jacobian.transpose() * best.lm.jacobian;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jtj);
        if (es.info() == Eigen::Success) {
            const Eigen::VectorXd& lam = es.eigenvalues();
            const Eigen::MatrixXd& v = es.eigenvectors();
            const double lam_floor = lam(4) * 1e-14;
            const double s2 = best.lm.sum_sq / static_cast<double>(rows - 5);
            for (int i = 0; i < 5; ++i) {
                double inv_ii = 0.0;
                bool bounded = true;
                for (int k = 0; k < 5; ++k) {
                    if (lam(k) <= lam_floor) {
                        if (std::abs(v(i, k)) > 1e-10) bounded = false;
                        continue;
                    }
                    inv_ii += v(i, k) * v(i, k) / lam(k);
                }
                if (bounded) result.half_width_ghz[i] = std::sqrt(s2 * inv_ii);
            }
        }
    }
    return result;
}

}  // namespace fluxmol
