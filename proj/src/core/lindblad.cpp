#include "core/lindblad.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "core/constants.h"
#include "core/errors.h"

namespace fluxmol {

namespace {

// Dormand-Prince 5(4) pair with standard step control.
struct Rk45 {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

// Integrate y' = q y from t0 to t1 adaptively, in place.
void integrate_linear(const Eigen::MatrixXd& q, Eigen::VectorXd& y, double t0, double t1,
                      const EvolveOptions& opts) {
    if (t1 <= t0) return;
    double t = t0;
    double h = (t1 - t0) / 16.0;
    const double h_floor = (t1 - t0) * 1e-14;
    long steps = 0;

    Eigen::VectorXd k1 = q * y;
    while (t < t1) {
        if (++steps > 2'000'000)
            throw numeric_failure("lindblad integrator: step budget exhausted");
        h = std::min(h, t1 - t);

        Eigen::VectorXd k2 = q * (y + h * Rk45::a21 * k1);
        Eigen::VectorXd k3 = q * (y + h * (Rk45::a31 * k1 + Rk45::a32 * k2));
        Eigen::VectorXd k4 = q * (y + h * (Rk45::a41 * k1 + Rk45::a42 * k2 + Rk45::a43 * k3));
        Eigen::VectorXd k5 =
            q * (y + h * (Rk45::a51 * k1 + Rk45::a52 * k2 + Rk45::a53 * k3 + Rk45::a54 * k4));
        Eigen::VectorXd k6 = q * (y + h * (Rk45::a61 * k1 + Rk45::a62 * k2 + Rk45::a63 * k3 +
                                           Rk45::a64 * k4 + Rk45::a65 * k5));
        Eigen::VectorXd ynew = y + h * (Rk45::b1 * k1 + Rk45::b3 * k3 + Rk45::b4 * k4 +
                                        Rk45::b5 * k5 + Rk45::b6 * k6);
        Eigen::VectorXd k7 = q * ynew;
        Eigen::VectorXd err = h * (Rk45::e1 * k1 + Rk45::e3 * k3 + Rk45::e4 * k4 +
                                   Rk45::e5 * k5 + Rk45::e6 * k6 + Rk45::e7 * k7);

        double acc = 0.0;
        for (long i = 0; i < y.size(); ++i) {
            const double sc =
                opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = err[i] / sc;
            acc += r * r;
        }
        const double enorm = std::sqrt(acc / static_cast<double>(y.size()));

        if (enorm <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // first-same-as-last
        }
        const double fac = std::clamp(0.9 * std::pow(std::max(enorm, 1e-10), -0.2), 0.2, 5.0);
        h *= fac;
        if (h < h_floor)
            throw numeric_failure("lindblad integrator: step size underflow");
    }
}

void check_density_matrix(const Eigen::MatrixXcd& rho) {
    const double scale = std::max(1.0, rho.norm());
    if ((rho - rho.adjoint().eval()).norm() > 1e-8 * scale)
        throw invalid_input("initial state is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-8)
        throw invalid_input("initial state must have unit trace");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw invalid_input("initial state has a negative eigenvalue");
}

}  // namespace

DensityTrajectory lindblad_evolve(const Eigen::VectorXd& energies_ghz, const RateTable& table,
                                  const Eigen::MatrixXcd& rho0, const std::vector<double>& times,
                                  const EvolveOptions& opts) {
    const int k = table.k();
    if (energies_ghz.size() != k)
        throw invalid_input("lindblad_evolve: energy count does not match the rate table");
    if (rho0.rows() != k || rho0.cols() != k)
        throw invalid_input("lindblad_evolve: initial state size does not match the rate table");
    table.validate();
    check_density_matrix(rho0);
    if (times.empty()) throw invalid_input("lindblad_evolve: no output times");
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
            throw invalid_input("lindblad_evolve: times must be non-negative and ascending");
    }

    // Jump operators |j><i| with rate T(i, j) give a closed population system
    // plus independently damped coherences; the Hamiltonian adds exact phases.
    Eigen::MatrixXd qgen = Eigen::MatrixXd::Zero(k, k);  // d p / dt = qgen p
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            const double r = table.total(i, j);
            qgen(j, i) += r;
            out[i] += r;
        }
        qgen(i, i) -= out[i];
    }

    DensityTrajectory traj;
    traj.times = times;
    traj.rho.reserve(times.size());

    Eigen::VectorXd pop = rho0.diagonal().real();
    double t_prev = 0.0;
    for (double t : times) {
        integrate_linear(qgen, pop, t_prev, t, opts);
        t_prev = t;

        Eigen::MatrixXcd r(k, k);
        for (int a = 0; a < k; ++a) {
            r(a, a) = pop[a];
            for (int b = 0; b < k; ++b) {
                if (a == b) continue;
                const double damp = std::exp(-0.5 * (out[a] + out[b]) * t);
                const double w_ab =
                    constants::two_pi * 1e9 * (energies_ghz[a] - energies_ghz[b]);
                r(a, b) = rho0(a, b) * damp *
                          std::exp(std::complex<double>(0.0, -w_ab * t));
            }
        }
        traj.rho.push_back(std::move(r));
    }
    return traj;
}

std::vector<double> subspace_probability(const DensityTrajectory& traj,
                                         const std::vector<int>& subspace) {
    if (subspace.empty()) throw invalid_input("subspace_probability: empty subspace");
    if (traj.rho.empty()) throw invalid_input("subspace_probability: empty trajectory");
    const int k = static_cast<int>(traj.rho[0].rows());
    for (int idx : subspace)
        if (idx < 0 || idx >= k)
            throw invalid_input("subspace_probability: state index out of range");
    std::vector<double> p;
    p.reserve(traj.times.size());
    for (const auto& r : traj.rho) {
        double acc = 0.0;
        for (int idx : subspace) acc += r(idx, idx).real();
        p.push_back(acc);
    }
    return p;
}

}  // namespace fluxmol
