#ifndef CJSR_LINALG_HPP
#define CJSR_LINALG_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace cjsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest singular value.
inline double spectral_norm(const Matrix& a)
{
    if (a.size() == 0)
        return 0.0;
    if (a.rows() == 1 && a.cols() == 1)
        return std::abs(a(0, 0));
    if (a.rows() == 2 && a.cols() == 2) {
        // sigma_max^2 is the largest root of the 2x2 Gram characteristic polynomial
        const double p = a.squaredNorm();
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const double disc = std::max(0.0, p * p - 4.0 * det * det);
        return std::sqrt(0.5 * (p + std::sqrt(disc)));
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

/// Largest eigenvalue modulus.
inline double spectral_radius(const Matrix& a)
{
    if (a.size() == 0)
        return 0.0;
    if (a.rows() == 1)
        return std::abs(a(0, 0));
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

inline double min_eigenvalue(const Matrix& sym)
{
    if (sym.rows() == 1)
        return sym(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline double max_eigenvalue(const Matrix& sym)
{
    if (sym.rows() == 1)
        return sym(0, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(sym.rows() - 1);
}

/// Largest eigenvalue of the pencil (lhs, rhs), rhs positive definite.
inline double max_generalized_eigenvalue(const Matrix& lhs, const Matrix& rhs)
{
    if (lhs.rows() == 1)
        return lhs(0, 0) / rhs(0, 0);
    Eigen::LLT<Matrix> llt(rhs);
    // L^{-1} lhs L^{-T} has the same spectrum as the pencil
    Matrix tmp = llt.matrixL().solve(lhs);
    Matrix sym = llt.matrixL().solve(tmp.transpose()).transpose();
    return max_eigenvalue(symmetrize(sym));
}

inline double max_abs_entry(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

} // namespace cjsr

#endif
