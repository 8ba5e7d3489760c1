#include "core/linalg.h"

#include <string>
#include <vector>

#include "core/errors.h"

// Fortran LAPACK entry points.  The BLAS library on the link line ships them
// without the C wrapper layer, so declare the symbols directly.
extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork,
             int* info);
void dstevd_(const char* jobz, const int* n, double* d, double* e, double* z, const int* ldz,
             double* work, const int* lwork, int* iwork, const int* liwork, int* info);
}

namespace fluxmol {

void sym_eig(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const int n = static_cast<int>(a.rows());
    if (n == 0) throw invalid_input("sym_eig: empty matrix");
    if (a.cols() != n) throw invalid_input("sym_eig: matrix must be square");

    vectors = a;  // overwritten with eigenvectors
    values.resize(n);

    int info = 0;
    int lwork = -1, liwork = -1;
    double work_query = 0.0;
    int iwork_query = 0;
    dsyevd_("V", "L", &n, vectors.data(), &n, values.data(), &work_query, &lwork,
            &iwork_query, &liwork, &info);
    if (info != 0) throw numeric_failure("dsyevd workspace query failed");

    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(static_cast<size_t>(lwork));
    std::vector<int> iwork(static_cast<size_t>(liwork));
    dsyevd_("V", "L", &n, vectors.data(), &n, values.data(), work.data(), &lwork,
            iwork.data(), &liwork, &info);
    if (info != 0)
        throw numeric_failure("dsyevd failed to converge (info = " + std::to_string(info) + ")");
}

void tridiag_eig(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                 Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const int n = static_cast<int>(diag.size());
    if (n == 0) throw invalid_input("tridiag_eig: empty matrix");
    if (sub.size() != n - 1 && !(n == 1 && sub.size() == 0))
        throw invalid_input("tridiag_eig: subdiagonal length must be n - 1");

    values = diag;
    Eigen::VectorXd offdiag = sub;
    vectors.resize(n, n);

    int info = 0;
    int lwork = -1, liwork = -1;
    double work_query = 0.0;
    int iwork_query = 0;
    dstevd_("V", &n, values.data(), offdiag.data(), vectors.data(), &n, &work_query,
            &lwork, &iwork_query, &liwork, &info);
    if (info != 0) throw numeric_failure("dstevd workspace query failed");

    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(static_cast<size_t>(lwork));
    std::vector<int> iwork(static_cast<size_t>(liwork));
    dstevd_("V", &n, values.data(), offdiag.data(), vectors.data(), &n, work.data(),
            &lwork, iwork.data(), &liwork, &info);
    if (info != 0)
        throw numeric_failure("dstevd failed to converge (info = " + std::to_string(info) + ")");
}

}  // namespace fluxmol
