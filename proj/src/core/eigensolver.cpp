#include "core/eigensolver.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "core/errors.h"
#include "core/linalg.h"

namespace fluxmol {

namespace {

void fix_vector_signs(Eigen::MatrixXd& vecs) {
    for (long c = 0; c < vecs.cols(); ++c) {
        long imax = 0;
        double best = -1.0;
        for (long r = 0; r < vecs.rows(); ++r) {
            const double a = std::abs(vecs(r, c));
            if (a > best) {
                best = a;
                imax = r;
            }
        }
        if (vecs(imax, c) < 0.0) vecs.col(c) = -vecs.col(c);
    }
}

// The solver assumes a symmetric operator; verify with a few random probes
// instead of assembling anything dense.
void check_symmetry(const OperatorMatrix& h) {
    const long n = h.dim();
    std::mt19937_64 rng(0x73796d63u);
    std::normal_distribution<double> dist;
    Eigen::VectorXd x(n), yf(n), yt(n);
    for (int probe = 0; probe < 3; ++probe) {
        for (long i = 0; i < n; ++i) x[i] = dist(rng);
        h.apply_real(x.data(), yf.data());
        h.apply_transpose_real(x.data(), yt.data());
        const double scale = std::max(1.0, yf.norm());
        if ((yf - yt).norm() > 1e-10 * scale)
            throw invalid_input("diagonalize: operator is not symmetric");
    }
}

Spectrum dense_lowest(const OperatorMatrix& h, int k) {
    Eigen::VectorXd vals;
    Eigen::MatrixXd vecs;
    sym_eig(h.dense_real(), vals, vecs);
    Spectrum s;
    s.eigenvalues = vals.head(k);
    s.eigenvectors = vecs.leftCols(k);
    s.basis = h.basis();
    fix_vector_signs(s.eigenvectors);
    return s;
}

Spectrum lanczos_lowest(const OperatorMatrix& h, int k, const DiagOptions& opts) {
    const long n = h.dim();
    int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(std::min<long>(n, 1200));
    // Keep the stored Krylov basis within a sane memory envelope.
    const long cap = 300'000'000 / std::max<long>(n, 1);
    if (cap < max_iter) max_iter = static_cast<int>(std::max<long>(cap, 2 * k + 2));
    if (max_iter > n) max_iter = static_cast<int>(n);

    Eigen::MatrixXd v(n, max_iter + 1);
    Eigen::VectorXd alpha(max_iter), beta(max_iter);
    Eigen::VectorXd w(n);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> dist;
    for (long i = 0; i < n; ++i) v(i, 0) = dist(rng);
    v.col(0) /= v.col(0).norm();

    auto reorthogonalize = [&](Eigen::VectorXd& vec, int j) {
        // Two classical Gram-Schmidt sweeps against everything kept so far,
        // each as a pair of matrix-vector products.
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd proj = v.leftCols(j + 1).transpose() * vec;
            vec.noalias() -= v.leftCols(j + 1) * proj;
        }
    };

    int j = 0;
    int restarts = 0;
    double scale = 1.0;
    Eigen::VectorXd ritz_vals;
    Eigen::MatrixXd ritz_s;

    auto converged = [&](int steps) -> bool {
        Eigen::VectorXd d = alpha.head(steps);
        Eigen::VectorXd e = beta.head(steps - 1);
        tridiag_eig(d, e, ritz_vals, ritz_s);
        scale = std::max(std::abs(ritz_vals[0]), std::abs(ritz_vals[steps - 1]));
        scale = std::max(scale, 1e-300);
        const double bj = beta[steps - 1];
        for (int i = 0; i < k; ++i) {
            const double resid = std::abs(bj * ritz_s(steps - 1, i));
            if (resid > opts.tol * scale) return false;
        }
        return true;
    };

    bool done = false;
    while (j < max_iter) {
        h.apply_real(v.col(j).data(), w.data());
        alpha[j] = v.col(j).dot(w);
        w -= alpha[j] * v.col(j);
        if (j > 0) w -= beta[j - 1] * v.col(j - 1);
        reorthogonalize(w, j);
        beta[j] = w.norm();

        if (beta[j] < 1e-13 * std::max(1.0, scale)) {
            // Krylov space exhausted.  If the wanted part already converged we
            // are finished; otherwise continue in a fresh random direction
            // orthogonal to everything found so far.
            if (j + 1 >= k && converged(j + 1)) {
                done = true;
                j += 1;
                break;
            }
            if (++restarts > 8)
                throw numeric_failure("lanczos: repeated breakdown before convergence");
            for (long i = 0; i < n; ++i) w[i] = dist(rng);
            reorthogonalize(w, j);
            beta[j] = w.norm();
            if (beta[j] < 1e-13)
                throw numeric_failure("lanczos: unable to continue after breakdown");
        }

        v.col(j + 1) = w / beta[j];
        ++j;

        if (j >= std::max(2 * k, k + 10) && j % 10 == 0 && converged(j)) {
            done = true;
            break;
        }
    }

    if (!done && !(j >= k && converged(j)))
        throw numeric_failure("lanczos: no convergence within " + std::to_string(j) +
                              " iterations");

    Spectrum s;
    s.eigenvalues = ritz_vals.head(k);
    s.eigenvectors.noalias() = v.leftCols(j) * ritz_s.leftCols(k);
    s.basis = h.basis();
    // Ritz vectors are orthonormal to working precision already; normalize to
    // tidy up the last digits.
    for (int c = 0; c < k; ++c) s.eigenvectors.col(c).normalize();
    fix_vector_signs(s.eigenvectors);
    return s;
}

}  // namespace

Spectrum diagonalize(const OperatorMatrix& h, int k, const DiagOptions& opts) {
    const long n = h.dim();
    if (n <= 0) throw invalid_input("diagonalize: empty operator");
    if (k <= 0 || k > n)
        throw invalid_input("diagonalize: requested state count must lie in [1, dim]");
    if (!h.real_coeffs())
        throw invalid_input("diagonalize: operator must have real coefficients");
    check_symmetry(h);
    if (n <= opts.dense_threshold) return dense_lowest(h, k);
    return lanczos_lowest(h, k, opts);
}

std::complex<double> matrix_element(const Spectrum& s, const OperatorMatrix& op, int i, int j) {
    if (i < 0 || j < 0 || i >= s.k() || j >= s.k())
        throw invalid_input("matrix_element: state index out of range");
    if (!s.basis.compatible(op.basis()))
        throw invalid_input("matrix_element: operator and spectrum use different bases");
    return op.bilinear(s.eigenvectors.col(i), s.eigenvectors.col(j));
}

}  // namespace fluxmol
