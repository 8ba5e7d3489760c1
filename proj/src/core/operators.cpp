#include "core/operators.h"

#include <cmath>
#include <string>

#include "core/errors.h"
#include "core/linalg.h"

namespace fluxmol {

long BasisDescriptor::dim() const {
    long d = 1;
    for (const auto& m : modes) d *= m.n;
    return d;
}

bool BasisDescriptor::compatible(const BasisDescriptor& other) const {
    if (model != other.model || generic != other.generic) return false;
    if (modes.size() != other.modes.size()) return false;
    for (size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].n != other.modes[i].n) return false;
        double scale = std::max({1.0, std::abs(modes[i].ell), std::abs(other.modes[i].ell)});
        if (std::abs(modes[i].ell - other.modes[i].ell) > 1e-12 * scale) return false;
    }
    return true;
}

BasisDescriptor BasisDescriptor::generic_single(int n) {
    BasisDescriptor b;
    b.generic = true;
    b.modes = {ModeBasis{n, 1.0}};
    return b;
}

OperatorMatrix::OperatorMatrix(BasisDescriptor basis, std::vector<KronTerm> terms)
    : basis_(std::move(basis)), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (t.factors.size() != basis_.modes.size())
            throw invalid_input("operator term: factor count does not match the basis");
        for (size_t m = 0; m < t.factors.size(); ++m) {
            const auto& f = t.factors[m];
            if (f.size() == 0) continue;  // identity placeholder
            if (f.rows() != basis_.modes[m].n || f.cols() != basis_.modes[m].n)
                throw invalid_input("operator term: factor shape does not match mode " +
                                    std::to_string(m));
        }
    }
}

OperatorMatrix OperatorMatrix::from_dense(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw invalid_input("from_dense: matrix must be square");
    KronTerm t;
    t.coeff = 1.0;
    t.factors = {m};
    return OperatorMatrix(BasisDescriptor::generic_single(static_cast<int>(m.rows())), {t});
}

bool OperatorMatrix::real_coeffs() const {
    for (const auto& t : terms_)
        if (t.coeff.imag() != 0.0) return false;
    return true;
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRow = Eigen::Map<RowMat>;
using MapRowConst = Eigen::Map<const RowMat>;

// Apply factor F (or F^T) on mode m of the flattened tensor x, writing into y.
// Mode 0 is outermost, the last mode is contiguous.
void contract_mode(const Eigen::MatrixXd& f, bool transpose, long left, long mid, long right,
                   const double* x, double* y) {
    auto fop = [&](auto&& xin, auto&& yout) {
        if (transpose)
            yout.noalias() = f.transpose() * xin;
        else
            yout.noalias() = f * xin;
    };
    if (right == 1) {
        // y(left x mid) = x(left x mid) * F^T
        MapRowConst xm(x, left, mid);
        MapRow ym(y, left, mid);
        if (transpose)
            ym.noalias() = xm * f;
        else
            ym.noalias() = xm * f.transpose();
        return;
    }
    for (long l = 0; l < left; ++l) {
        MapRowConst xm(x + l * mid * right, mid, right);
        MapRow ym(y + l * mid * right, mid, right);
        fop(xm, ym);
    }
}

}  // namespace

void OperatorMatrix::apply_term_factors(const KronTerm& t, bool transpose, const double* x,
                                        double* y, std::vector<double>& scratch) const {
    const long n = dim();
    const size_t nm = basis_.modes.size();
    scratch.resize(static_cast<size_t>(n));

    const double* src = x;
    double* dst = y;
    double* spare = scratch.data();
    bool wrote = false;

    long left = 1;
    for (size_t m = 0; m < nm; ++m) {
        const long mid = basis_.modes[m].n;
        long right = 1;
        for (size_t j = m + 1; j < nm; ++j) right *= basis_.modes[j].n;

        if (t.factors[m].size() != 0) {
            contract_mode(t.factors[m], transpose, left, mid, right, src, dst);
            src = dst;
            dst = (dst == y) ? spare : y;
            wrote = true;
        }
        left *= mid;
    }

    if (!wrote) {
        std::copy(x, x + n, y);
    } else if (src != y) {
        std::copy(src, src + n, y);
    }
}

void OperatorMatrix::apply_real(const double* x, double* y) const {
    if (!real_coeffs())
        throw invalid_input("apply_real: operator has complex coefficients");
    const long n = dim();
    std::fill(y, y + n, 0.0);
    std::vector<double> term_out(static_cast<size_t>(n));
    std::vector<double> scratch;
    for (const auto& t : terms_) {
        apply_term_factors(t, false, x, term_out.data(), scratch);
        const double c = t.coeff.real();
        for (long i = 0; i < n; ++i) y[i] += c * term_out[i];
    }
}

void OperatorMatrix::apply_transpose_real(const double* x, double* y) const {
    if (!real_coeffs())
        throw invalid_input("apply_transpose_real: operator has complex coefficients");
    const long n = dim();
    std::fill(y, y + n, 0.0);
    std::vector<double> term_out(static_cast<size_t>(n));
    std::vector<double> scratch;
    for (const auto& t : terms_) {
        apply_term_factors(t, true, x, term_out.data(), scratch);
        const double c = t.coeff.real();
        for (long i = 0; i < n; ++i) y[i] += c * term_out[i];
    }
}

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

Eigen::MatrixXd OperatorMatrix::dense_real() const {
    if (!real_coeffs())
        throw invalid_input("dense_real: operator has complex coefficients");
    const long n = dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : terms_) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(1, 1);
        for (size_t m = 0; m < basis_.modes.size(); ++m) {
            const auto& f = t.factors[m];
            if (f.size() == 0)
                acc = kron(acc, Eigen::MatrixXd::Identity(basis_.modes[m].n, basis_.modes[m].n));
            else
                acc = kron(acc, f);
        }
        out += t.coeff.real() * acc;
    }
    return out;
}

Eigen::MatrixXcd OperatorMatrix::dense_complex() const {
    const long n = dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& t : terms_) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(1, 1);
        for (size_t m = 0; m < basis_.modes.size(); ++m) {
            const auto& f = t.factors[m];
            if (f.size() == 0)
                acc = kron(acc, Eigen::MatrixXd::Identity(basis_.modes[m].n, basis_.modes[m].n));
            else
                acc = kron(acc, f);
        }
        out += t.coeff * acc.cast<std::complex<double>>();
    }
    return out;
}

double OperatorMatrix::hermiticity_defect() const {
    Eigen::MatrixXcd d = dense_complex();
    double num = (d - d.adjoint().eval()).norm();
    return num / std::max(1.0, d.norm());
}

std::complex<double> OperatorMatrix::bilinear(const Eigen::VectorXd& v,
                                              const Eigen::VectorXd& w) const {
    const long n = dim();
    if (v.size() != n || w.size() != n)
        throw invalid_input("bilinear: vector length does not match the operator dimension");
    std::vector<double> term_out(static_cast<size_t>(n));
    std::vector<double> scratch;
    std::complex<double> acc{0.0, 0.0};
    for (const auto& t : terms_) {
        apply_term_factors(t, false, w.data(), term_out.data(), scratch);
        double dot = 0.0;
        for (long i = 0; i < n; ++i) dot += v[i] * term_out[i];
        acc += t.coeff * dot;
    }
    return acc;
}

Eigen::MatrixXd position_matrix(int n, double ell) {
    if (n < 1) throw invalid_input("position_matrix: cutoff must be positive");
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m + 1 < n; ++m) {
        const double v = ell * std::sqrt((m + 1) / 2.0);
        x(m, m + 1) = v;
        x(m + 1, m) = v;
    }
    return x;
}

Eigen::MatrixXd momentum_antisym(int n, double ell) {
    if (n < 1) throw invalid_input("momentum_antisym: cutoff must be positive");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        const double v = std::sqrt((k + 1) / 2.0) / ell;
        m(k, k + 1) = -v;
        m(k + 1, k) = v;
    }
    return m;
}

Eigen::MatrixXd position_squared(int n, double ell) {
    if (n < 1) throw invalid_input("position_squared: cutoff must be positive");
    Eigen::MatrixXd x2 = Eigen::MatrixXd::Zero(n, n);
    const double s = ell * ell / 2.0;
    for (int m = 0; m < n; ++m) x2(m, m) = s * (2.0 * m + 1.0);
    for (int m = 0; m + 2 < n; ++m) {
        const double v = s * std::sqrt((m + 1.0) * (m + 2.0));
        x2(m, m + 2) = v;
        x2(m + 2, m) = v;
    }
    return x2;
}

Eigen::MatrixXd momentum_squared(int n, double ell) {
    if (n < 1) throw invalid_input("momentum_squared: cutoff must be positive");
    Eigen::MatrixXd n2 = Eigen::MatrixXd::Zero(n, n);
    const double s = 1.0 / (2.0 * ell * ell);
    for (int m = 0; m < n; ++m) n2(m, m) = s * (2.0 * m + 1.0);
    for (int m = 0; m + 2 < n; ++m) {
        const double v = -s * std::sqrt((m + 1.0) * (m + 2.0));
        n2(m, m + 2) = v;
        n2(m + 2, m) = v;
    }
    return n2;
}

PositionTrig trig_of_position(int n, double ell, double scale, double shift) {
    Eigen::MatrixXd x = position_matrix(n, ell);
    Eigen::VectorXd d;
    Eigen::MatrixXd v;
    sym_eig(x, d, v);
    Eigen::VectorXd arg = (scale * d.array() + shift).matrix();
    PositionTrig out;
    out.cos_m = v * arg.array().cos().matrix().asDiagonal() * v.transpose();
    out.sin_m = v * arg.array().sin().matrix().asDiagonal() * v.transpose();
    // Symmetrize away the last rounding dust so downstream symmetry checks
    // see exactly Hermitian blocks.
    out.cos_m = ((out.cos_m + out.cos_m.transpose()) / 2.0).eval();
    out.sin_m = ((out.sin_m + out.sin_m.transpose()) / 2.0).eval();
    return out;
}

BasisDescriptor circuit_basis(const CircuitParams& p, const BasisTruncation& t,
                              CircuitModel model) {
    p.validate();
    t.validate();
    BasisDescriptor b;
    b.model = model;
    const double ell_phi = std::pow(2.0 * p.e_cj / p.e_l, 0.25);
    if (model == CircuitModel::full) {
        const double ell_zeta = std::pow(4.0 * p.e_c / (p.e_l + p.e_ls / 2.0), 0.25);
        b.modes = {ModeBasis{t.n_phi, ell_phi}, ModeBasis{t.n_theta, ell_phi},
                   ModeBasis{t.n_zeta, ell_zeta}};
    } else {
        const double stiff = p.e_l * p.e_ls / (2.0 * p.e_l + p.e_ls);
        const double ell_theta = std::pow(2.0 * p.e_cj / stiff, 0.25);
        b.modes = {ModeBasis{t.n_phi, ell_phi}, ModeBasis{t.n_theta, ell_theta}};
    }
    return b;
}

OperatorMatrix lift_single(const BasisDescriptor& basis, int mode, const Eigen::MatrixXd& factor,
                           std::complex<double> coeff) {
    if (mode < 0 || mode >= static_cast<int>(basis.modes.size()))
        throw invalid_input("lift_single: mode index out of range");
    KronTerm t;
    t.coeff = coeff;
    t.factors.assign(basis.modes.size(), Eigen::MatrixXd());
    t.factors[static_cast<size_t>(mode)] = factor;
    return OperatorMatrix(basis, {t});
}

ModeOperatorSet operator_set(const BasisDescriptor& basis) {
    if (basis.modes.size() < 2)
        throw invalid_input("operator_set: circuit basis needs at least two modes");
    ModeOperatorSet s;
    const auto& mb = basis.modes;
    s.phi = lift_single(basis, 0, position_matrix(mb[0].n, mb[0].ell));
    s.theta = lift_single(basis, 1, position_matrix(mb[1].n, mb[1].ell));
    s.n_phi = lift_single(basis, 0, momentum_antisym(mb[0].n, mb[0].ell),
                          std::complex<double>(0.0, 1.0));
    s.n_theta = lift_single(basis, 1, momentum_antisym(mb[1].n, mb[1].ell),
                            std::complex<double>(0.0, 1.0));
    if (basis.modes.size() >= 3) {
        s.zeta = lift_single(basis, 2, position_matrix(mb[2].n, mb[2].ell));
        s.n_zeta = lift_single(basis, 2, momentum_antisym(mb[2].n, mb[2].ell),
                               std::complex<double>(0.0, 1.0));
    }
    return s;
}

}  // namespace fluxmol
