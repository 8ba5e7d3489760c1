// Nonlinear least squares: a small box-constrained Levenberg-Marquardt core
// and the two decay-curve fits built on it.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace fluxmol {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LMOptions {
    int max_iter = 200;
    double gtol = 1e-12;     // infinity norm of the gradient
    double xtol = 1e-12;     // relative step size
    double jac_step = 1e-7;  // forward-difference scale
    double tau = 1e-3;       // initial damping relative to max diag(J^T J)
};

struct LMResult {
    Eigen::VectorXd x;
    double sum_sq = 0.0;  // residual two-norm squared at x
    int iterations = 0;
    bool converged = false;
    Eigen::VectorXd residual;
    Eigen::MatrixXd jacobian;  // at the solution, forward differences
};

// Minimize |f(x)|^2 over the box [lo, hi] starting from x0 (projected into
// the box).  Deterministic: no randomness, fixed evaluation order.
LMResult levenberg_marquardt(const ResidualFn& f, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, const LMOptions& opts = {});

// a + b exp(-t / t_const) fitted to a subspace-probability series.
struct ExpDecayFit {
    double a = 0.0, b = 0.0;
    double t_const = 0.0;  // s
    double rms = 0.0;
    bool converged = false;
    bool few_samples = false;  // advisory: fewer than 10 points or short span
};

ExpDecayFit fit_t1s(const std::vector<double>& t_s, const std::vector<double>& pg);

// a + b exp(-t / t_const) cos(2 pi f t + phase).  When no oscillation can be
// resolved in the data the cosine is dropped and only the envelope is fitted
// (envelope_only set, freq and phase zero).
struct RamseyFit {
    double a = 0.0, b = 0.0;
    double t_const = 0.0;   // s
    double freq_hz = 0.0;
    double phase = 0.0;
    double rms = 0.0;
    bool converged = false;
    bool envelope_only = false;
    bool few_samples = false;
};

RamseyFit fit_t2rs(const std::vector<double>& t_s, const std::vector<double>& pg);

}  // namespace fluxmol
