#include "core/fitting.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Cholesky>

#include "core/constants.h"
#include "core/errors.h"

namespace fluxmol {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi) {
    for (long i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

Eigen::MatrixXd forward_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& r0, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, double step_scale) {
    const long n = x.size();
    Eigen::MatrixXd jac(r0.size(), n);
    for (long i = 0; i < n; ++i) {
        // Relative step so that second-scale time constants and 1e6-scale
        // frequencies are both resolved; absolute fallback at exact zero.
        double h = step_scale * std::abs(x[i]);
        if (h == 0.0) h = step_scale;
        Eigen::VectorXd xp = x;
        if (x[i] + h > hi[i]) h = -h;  // step backward at the upper wall
        xp[i] = std::clamp(x[i] + h, lo[i], hi[i]);
        const double actual = xp[i] - x[i];
        if (actual == 0.0) {
            jac.col(i).setZero();
            continue;
        }
        jac.col(i) = (f(xp) - r0) / actual;
    }
    return jac;
}

}  // namespace

LMResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, const LMOptions& opts) {
    const long n = x0.size();
    if (lo.size() != n || hi.size() != n)
        throw invalid_input("levenberg_marquardt: bound sizes do not match the parameter count");
    for (long i = 0; i < n; ++i)
        if (!(lo[i] <= hi[i])) throw invalid_input("levenberg_marquardt: empty box");

    LMResult res;
    Eigen::VectorXd x = clamp_to_box(std::move(x0), lo, hi);
    Eigen::VectorXd r = f(x);
    double cost = r.squaredNorm();

    Eigen::MatrixXd jac = forward_jacobian(f, x, r, lo, hi, opts.jac_step);
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;

    double mu = opts.tau * jtj.diagonal().maxCoeff();
    if (!(mu > 0.0)) mu = opts.tau;
    double nu = 2.0;

    int iter = 0;
    bool converged = g.lpNorm<Eigen::Infinity>() <= opts.gtol * std::max(1.0, cost);
    for (; iter < opts.max_iter && !converged; ++iter) {
        Eigen::MatrixXd a = jtj;
        a.diagonal().array() += mu;
        Eigen::VectorXd h = a.ldlt().solve(-g);
        Eigen::VectorXd x_new = clamp_to_box(x + h, lo, hi);
        Eigen::VectorXd h_eff = x_new - x;

        // Per-component so a second-scale time constant is not judged
        // against a megahertz-scale frequency living in the same vector.
        bool step_negligible = true;
        for (long i = 0; i < n; ++i)
            if (std::abs(h_eff[i]) > opts.xtol * (std::abs(x[i]) + opts.xtol))
                step_negligible = false;
        if (step_negligible) {
            converged = true;
            break;
        }

        Eigen::VectorXd r_new = f(x_new);
        const double cost_new = r_new.squaredNorm();
        const double predicted = h_eff.dot(mu * h_eff - g);  // > 0 for a descent step
        const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;

        if (rho > 0.0 && cost_new < cost) {
            x = x_new;
            r = std::move(r_new);
            cost = cost_new;
            jac = forward_jacobian(f, x, r, lo, hi, opts.jac_step);
            jtj = jac.transpose() * jac;
            g = jac.transpose() * r;
            mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
            nu = 2.0;
            if (g.lpNorm<Eigen::Infinity>() <= opts.gtol * std::max(1.0, cost)) converged = true;
        } else {
            mu *= nu;
            nu *= 2.0;
            if (!std::isfinite(mu)) break;
        }
    }

    res.x = x;
    res.sum_sq = cost;
    res.iterations = iter;
    res.converged = converged;
    res.residual = r;
    res.jacobian = jac;
    return res;
}

namespace {

void check_series(const std::vector<double>& t, const std::vector<double>& p) {
    if (t.size() != p.size()) throw invalid_input("decay fit: time and value counts differ");
    if (t.size() < 4) throw invalid_input("decay fit: need at least four samples");
    for (size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(p[i]))
            throw invalid_input("decay fit: non-finite sample");
        if (t[i] < 0.0 || (i > 0 && t[i] <= t[i - 1]))
            throw invalid_input("decay fit: times must be non-negative and increasing");
    }
}

double series_rms(const Eigen::VectorXd& r) {
    return std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

}  // namespace

ExpDecayFit fit_t1s(const std::vector<double>& t_s, const std::vector<double>& pg) {
    check_series(t_s, pg);
    const long m = static_cast<long>(t_s.size());
    const double span = t_s.back() - t_s.front();
    if (!(span > 0.0)) throw invalid_input("decay fit: zero time span");

    // Tail average for the offset, first point for the amplitude.
    double tail = 0.0;
    const long ntail = std::max<long>(1, m / 10);
    for (long i = m - ntail; i < m; ++i) tail += pg[static_cast<size_t>(i)];
    tail /= static_cast<double>(ntail);

    Eigen::Vector3d x0(tail, pg.front() - tail, span / 3.0);
    Eigen::Vector3d lo(-10.0, -10.0, span * 1e-4);
    Eigen::Vector3d hi(10.0, 10.0, span * 1e3);

    auto model = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(m);
        for (long i = 0; i < m; ++i)
            r[i] = x[0] + x[1] * std::exp(-t_s[static_cast<size_t>(i)] / x[2]) -
                   pg[static_cast<size_t>(i)];
        return r;
    };
    LMResult lm = levenberg_marquardt(model, x0, lo, hi);
    if (!lm.converged) throw numeric_failure("relaxation fit did not converge");
    if (!(lm.x[2] > 0.0)) throw numeric_failure("relaxation fit produced a non-positive time constant");

    ExpDecayFit out;
    out.a = lm.x[0];
    out.b = lm.x[1];
    out.t_const = lm.x[2];
    out.rms = series_rms(lm.residual);
    out.converged = true;
    out.few_samples = m < 10 || span < 2.0 * out.t_const;
    return out;
}

RamseyFit fit_t2rs(const std::vector<double>& t_s, const std::vector<double>& pg) {
    check_series(t_s, pg);
    const long m = static_cast<long>(t_s.size());
    const double span = t_s.back() - t_s.front();
    if (!(span > 0.0)) throw invalid_input("decay fit: zero time span");

    double mean = 0.0;
    for (double v : pg) mean += v;
    mean /= static_cast<double>(m);
    double vmin = pg[0], vmax = pg[0];
    for (double v : pg) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }

    // Coarse frequency scan: strongest single-tone correlation of the
    // detrended series, between half a cycle over the window and Nyquist.
    double dt_min = span;
    for (long i = 1; i < m; ++i)
        dt_min = std::min(dt_min, t_s[static_cast<size_t>(i)] - t_s[static_cast<size_t>(i - 1)]);
    const double f_lo = 0.5 / span;
    const double f_hi = 0.5 / dt_min;
    double best_f = 0.0, best_amp = 0.0;
    std::complex<double> best_corr{0.0, 0.0};
    const int nf = 400;
    for (int i = 0; i <= nf; ++i) {
        const double fr = f_lo * std::pow(f_hi / f_lo, static_cast<double>(i) / nf);
        std::complex<double> corr{0.0, 0.0};
        for (long s = 0; s < m; ++s) {
            const double ph = constants::two_pi * fr * t_s[static_cast<size_t>(s)];
            corr += (pg[static_cast<size_t>(s)] - mean) *
                    std::complex<double>(std::cos(ph), -std::sin(ph));
        }
        const double amp = std::abs(corr) * 2.0 / static_cast<double>(m);
        if (amp > best_amp) {
            best_amp = amp;
            best_f = fr;
            best_corr = corr;
        }
    }

    RamseyFit out;
    // An oscillation is treated as resolved when its correlation amplitude
    // rises above a twentieth of the data range and at least one full cycle
    // fits in the window.
    const bool resolved = best_amp > 0.05 * std::max(vmax - vmin, 1e-300) && best_f * span >= 1.0;

    if (!resolved) {
        ExpDecayFit env = fit_t1s(t_s, pg);
        out.a = env.a;
        out.b = env.b;
        out.t_const = env.t_const;
        out.rms = env.rms;
        out.converged = env.converged;
        out.envelope_only = true;
        out.few_samples = env.few_samples;
        return out;
    }

    Eigen::VectorXd x0(5);
    x0 << mean, best_amp, span / 3.0, best_f, std::atan2(-best_corr.imag(), best_corr.real());
    Eigen::VectorXd lo(5), hi(5);
    lo << -10.0, -10.0, span * 1e-4, f_lo / 4.0, -2.0 * constants::two_pi;
    hi << 10.0, 10.0, span * 1e3, f_hi * 2.0, 2.0 * constants::two_pi;

    auto model = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(m);
        for (long i = 0; i < m; ++i) {
            const double t = t_s[static_cast<size_t>(i)];
            r[i] = x[0] + x[1] * std::exp(-t / x[2]) *
                              std::cos(constants::two_pi * x[3] * t + x[4]) -
                   pg[static_cast<size_t>(i)];
        }
        return r;
    };
    LMResult lm = levenberg_marquardt(model, x0, lo, hi);
    if (!lm.converged) throw numeric_failure("ramsey fit did not converge");
    if (!(lm.x[2] > 0.0)) throw numeric_failure("ramsey fit produced a non-positive time constant");

    out.a = lm.x[0];
    out.b = lm.x[1];
    out.t_const = lm.x[2];
    out.freq_hz = lm.x[3];
    out.phase = lm.x[4];
    out.rms = series_rms(lm.residual);
    out.converged = true;
    out.few_samples = m < 10 || span < 2.0 * out.t_const;
    return out;
}

}  // namespace fluxmol
