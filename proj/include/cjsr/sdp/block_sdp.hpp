#ifndef CJSR_SDP_BLOCK_SDP_HPP
#define CJSR_SDP_BLOCK_SDP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace cjsr::sdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Block-diagonal semidefinite program
///
///     minimize    c' x
///     subject to  X = sum_i x_i F_i - F_0  >= 0   (block-diagonal, PSD)
///
/// with dual
///
///     maximize    F_0 . Y
///     subject to  F_i . Y = c_i,   Y >= 0.
///
/// The data are stored block by block: every block keeps the list of
/// variables that touch it together with their (symmetric) coefficient.
class Problem {
public:
    struct Term {
        std::size_t variable;
        Matrix coeff;
    };

    std::size_t add_block(std::size_t dim)
    {
        const auto d = static_cast<Eigen::Index>(dim);
        dims_.push_back(dim);
        constants_.push_back(Matrix::Zero(d, d));
        terms_.emplace_back();
        return dims_.size() - 1;
    }

    std::size_t add_variable(double cost)
    {
        costs_.push_back(cost);
        return costs_.size() - 1;
    }

    /// F_0 of the block (the constraint reads sum x_i F_i - F_0 >= 0).
    void set_constant(std::size_t block, const Matrix& f0) { constants_.at(block) = f0; }

    /// Adds coeff to F_var restricted to block; repeated calls accumulate.
    void add_term(std::size_t var, std::size_t block, const Matrix& coeff)
    {
        auto& ts = terms_.at(block);
        for (auto& t : ts) {
            if (t.variable == var) {
                t.coeff += coeff;
                return;
            }
        }
        ts.push_back({var, coeff});
    }

    std::size_t num_blocks() const { return dims_.size(); }
    std::size_t num_variables() const { return costs_.size(); }
    std::size_t block_dim(std::size_t b) const { return dims_[b]; }
    const Matrix& constant(std::size_t b) const { return constants_[b]; }
    const std::vector<Term>& terms(std::size_t b) const { return terms_[b]; }
    double cost(std::size_t i) const { return costs_[i]; }

    std::size_t total_dim() const
    {
        std::size_t n = 0;
        for (auto d : dims_)
            n += d;
        return n;
    }

    /// Plain-text dump: one line per block term, "block <b> var <i|F0> <dim> <entries row-major>".
    void write_text(std::ostream& os) const
    {
        os.precision(17);
        os << "sdp blocks " << num_blocks() << " variables " << num_variables() << "\n";
        os << "cost";
        for (auto c : costs_)
            os << ' ' << c;
        os << "\n";
        for (std::size_t b = 0; b < num_blocks(); ++b) {
            auto row = [&](const std::string& tag, const Matrix& m) {
                os << "block " << b << ' ' << tag << ' ' << dims_[b];
                for (Eigen::Index r = 0; r < m.rows(); ++r)
                    for (Eigen::Index c = 0; c < m.cols(); ++c)
                        os << ' ' << m(r, c);
                os << "\n";
            };
            row("F0", constants_[b]);
            for (const auto& t : terms_[b])
                row("x" + std::to_string(t.variable), t.coeff);
        }
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<Matrix> constants_;
    std::vector<std::vector<Term>> terms_;
    std::vector<double> costs_;
};

struct Settings {
    int max_iterations = 120;
    double gap_tolerance = 1e-9;
    double feasibility_tolerance = 1e-9;
    double step_fraction = 0.98;
    /// Dense Cholesky of the Schur complement up to this many variables,
    /// sparse LDL' beyond.
    std::size_t dense_limit = 400;
    /// Optional early exit once a (nearly) primal-feasible iterate has
    /// objective below this value...
    double stop_below = -std::numeric_limits<double>::infinity();
    /// ...or a (nearly) dual-feasible iterate has dual objective above this.
    double stop_above = std::numeric_limits<double>::infinity();
    /// Residual accepted for the early exits.
    double stop_residual = 1e-9;
};

enum class Status { optimal, target_reached, iteration_limit, stalled, numerical_failure };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::optimal: return "optimal";
    case Status::target_reached: return "target_reached";
    case Status::iteration_limit: return "iteration_limit";
    case Status::stalled: return "stalled";
    case Status::numerical_failure: return "numerical_failure";
    }
    return "?";
}

struct Result {
    Status status = Status::numerical_failure;
    Vector x;
    std::vector<Matrix> X; ///< primal slack blocks
    std::vector<Matrix> Y; ///< dual blocks
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_infeasibility = 0.0;
    double dual_infeasibility = 0.0;
    double relative_gap = 0.0;
    int iterations = 0;
};

namespace detail {

inline double frobenius_dot(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

/// Largest alpha with M + alpha dM >= 0, for M positive definite with factor L.
inline double max_step(const Eigen::LLT<Matrix>& llt, const Matrix& dm)
{
    if (dm.rows() == 1) {
        const double m = llt.matrixLLT()(0, 0) * llt.matrixLLT()(0, 0);
        return dm(0, 0) < 0 ? -m / dm(0, 0) : std::numeric_limits<double>::infinity();
    }
    Matrix t = llt.matrixL().solve(dm);
    Matrix s = llt.matrixL().solve(t.transpose());
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

/// Schur complement storage: dense, or sparse with a fixed pattern whose
/// value slots are precomputed per block.
class SchurSystem {
public:
    SchurSystem(const Problem& p, std::size_t dense_limit) : m_(p.num_variables())
    {
        dense_ = m_ <= dense_limit;
        if (dense_) {
            dense_b_ = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
            return;
        }
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t b = 0; b < p.num_blocks(); ++b) {
            const auto& ts = p.terms(b);
            for (std::size_t a = 0; a < ts.size(); ++a)
                for (std::size_t c = 0; c <= a; ++c) {
                    auto i = std::max(ts[a].variable, ts[c].variable);
                    auto j = std::min(ts[a].variable, ts[c].variable);
                    trip.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
                }
        }
        for (std::size_t i = 0; i < m_; ++i)
            trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
        sparse_b_.resize(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
        sparse_b_.setFromTriplets(trip.begin(), trip.end());
        sparse_b_.makeCompressed();

        slots_.resize(p.num_blocks());
        for (std::size_t b = 0; b < p.num_blocks(); ++b) {
            const auto& ts = p.terms(b);
            for (std::size_t a = 0; a < ts.size(); ++a)
                for (std::size_t c = 0; c <= a; ++c) {
                    auto i = std::max(ts[a].variable, ts[c].variable);
                    auto j = std::min(ts[a].variable, ts[c].variable);
                    slots_[b].push_back(slot(static_cast<int>(i), static_cast<int>(j)));
                }
        }
        diag_slots_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i)
            diag_slots_[i] = slot(static_cast<int>(i), static_cast<int>(i));
        ldlt_.analyzePattern(sparse_b_);
    }

    void clear()
    {
        if (dense_)
            dense_b_.setZero();
        else
            std::fill(sparse_b_.valuePtr(), sparse_b_.valuePtr() + sparse_b_.nonZeros(), 0.0);
    }

    /// Adds value at pair number k of block b (pairs enumerated a >= c).
    void add(std::size_t b, std::size_t k, std::size_t i, std::size_t j, double value)
    {
        if (dense_) {
            const auto r = static_cast<Eigen::Index>(std::max(i, j));
            const auto c = static_cast<Eigen::Index>(std::min(i, j));
            dense_b_(r, c) += value;
        } else {
            sparse_b_.valuePtr()[slots_[b][k]] += value;
        }
    }

    /// Factorizes, adding diagonal regularization if the plain factorization fails.
    bool factorize()
    {
        double reg = 0.0;
        double scale = 0.0;
        if (dense_) {
            scale = dense_b_.diagonal().cwiseAbs().maxCoeff();
        } else {
            for (auto s : diag_slots_)
                scale = std::max(scale, std::abs(sparse_b_.valuePtr()[s]));
        }
        if (!(scale > 0.0) || !std::isfinite(scale))
            scale = 1.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            if (dense_) {
                Matrix full = dense_b_.selfadjointView<Eigen::Lower>();
                full.diagonal().array() += reg;
                dense_llt_.compute(full);
                if (dense_llt_.info() == Eigen::Success)
                    return true;
            } else {
                if (reg > 0.0)
                    for (auto s : diag_slots_)
                        sparse_b_.valuePtr()[s] += reg - last_reg_;
                last_reg_ = reg;
                ldlt_.factorize(sparse_b_);
                if (ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0).all())
                    return true;
            }
            reg = reg == 0.0 ? 1e-14 * scale : reg * 100.0;
        }
        return false;
    }

    /// Solve with two steps of iterative refinement against the
    /// unregularized matrix.
    Vector solve(const Vector& rhs) const
    {
        Vector x = raw_solve(rhs);
        for (int k = 0; k < 2; ++k) {
            Vector res = rhs - multiply(x);
            if (!res.allFinite())
                break;
            x += raw_solve(res);
        }
        return x;
    }

    void reset_regularization() { last_reg_ = 0.0; }

private:
    Vector raw_solve(const Vector& rhs) const
    {
        if (dense_)
            return dense_llt_.solve(rhs);
        return ldlt_.solve(rhs);
    }

    Vector multiply(const Vector& x) const
    {
        if (dense_)
            return dense_b_.selfadjointView<Eigen::Lower>() * x;
        Vector y = sparse_b_.selfadjointView<Eigen::Lower>() * x;
        return y - last_reg_ * x;
    }

    int slot(int i, int j) const
    {
        const int* inner = sparse_b_.innerIndexPtr();
        const int begin = sparse_b_.outerIndexPtr()[j];
        const int end = sparse_b_.outerIndexPtr()[j + 1];
        const int* it = std::lower_bound(inner + begin, inner + end, i);
        return static_cast<int>(it - sparse_b_.innerIndexPtr());
    }

    std::size_t m_;
    bool dense_ = true;
    Matrix dense_b_;
    Eigen::LLT<Matrix> dense_llt_;
    Eigen::SparseMatrix<double> sparse_b_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    std::vector<std::vector<int>> slots_;
    std::vector<int> diag_slots_;
    double last_reg_ = 0.0;
};

} // namespace detail

/// Infeasible-start primal-dual path-following method with the HKM search
/// direction and Mehrotra predictor-corrector steps.
inline Result solve(const Problem& p, const Settings& settings = {})
{
    using detail::frobenius_dot;
    const std::size_t nb = p.num_blocks();
    const std::size_t m = p.num_variables();
    const double n_total = static_cast<double>(p.total_dim());

    Vector c(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        c(static_cast<Eigen::Index>(i)) = p.cost(i);

    double f0_norm = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
        f0_norm += p.constant(b).squaredNorm();
    f0_norm = std::sqrt(f0_norm);
    const double c_norm = c.norm();

    Result r;
    r.x = Vector::Zero(static_cast<Eigen::Index>(m));
    r.X.resize(nb);
    r.Y.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const double nbd = static_cast<double>(p.block_dim(b));
        double fmax = p.constant(b).norm();
        double ratio = 0.0;
        for (const auto& t : p.terms(b)) {
            const double fn = t.coeff.norm();
            fmax = std::max(fmax, fn);
            ratio = std::max(ratio, (1.0 + std::abs(p.cost(t.variable))) / (1.0 + fn));
        }
        const double xi = std::max({10.0, std::sqrt(nbd), fmax});
        const double eta = std::max({10.0, std::sqrt(nbd), nbd * ratio});
        const auto d = static_cast<Eigen::Index>(p.block_dim(b));
        r.X[b] = xi * Matrix::Identity(d, d);
        r.Y[b] = eta * Matrix::Identity(d, d);
    }

    detail::SchurSystem schur(p, settings.dense_limit);
    std::vector<Matrix> P(nb), Xinv(nb), dX(nb), dY(nb), dXa(nb), dYa(nb);
    std::vector<Eigen::LLT<Matrix>> xchol(nb), ychol(nb);
    Vector rhs(static_cast<Eigen::Index>(m));

    auto primal_residual = [&]() {
        double s = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            P[b] = -p.constant(b) - r.X[b];
            for (const auto& t : p.terms(b))
                P[b] += r.x(static_cast<Eigen::Index>(t.variable)) * t.coeff;
            s += P[b].squaredNorm();
        }
        return std::sqrt(s);
    };
    auto dual_residual = [&]() {
        Vector d = c;
        for (std::size_t b = 0; b < nb; ++b)
            for (const auto& t : p.terms(b))
                d(static_cast<Eigen::Index>(t.variable)) -= frobenius_dot(t.coeff, r.Y[b]);
        return d.norm();
    };

    // rhs_i = F_i . (X^{-1} (R - P Y)) - c_i, with R given per block
    auto build_rhs = [&](const std::vector<Matrix>* R) {
        rhs = -c;
        for (std::size_t b = 0; b < nb; ++b) {
            Matrix w = -(P[b] * r.Y[b]);
            if (R)
                w += (*R)[b];
            Matrix g = Xinv[b] * w;
            for (const auto& t : p.terms(b))
                rhs(static_cast<Eigen::Index>(t.variable)) += frobenius_dot(t.coeff, g);
        }
    };

    auto directions = [&](const Vector& dx, const std::vector<Matrix>* R, std::vector<Matrix>& ox,
                          std::vector<Matrix>& oy) {
        for (std::size_t b = 0; b < nb; ++b) {
            ox[b] = P[b];
            for (const auto& t : p.terms(b))
                ox[b] += dx(static_cast<Eigen::Index>(t.variable)) * t.coeff;
            Matrix w = -(ox[b] * r.Y[b]);
            if (R)
                w += (*R)[b];
            Matrix g = Xinv[b] * w;
            oy[b] = 0.5 * (g + g.transpose()) - r.Y[b];
        }
    };

    auto step_lengths = [&](const std::vector<Matrix>& ox, const std::vector<Matrix>& oy) {
        double ap = std::numeric_limits<double>::infinity();
        double ad = ap;
        for (std::size_t b = 0; b < nb; ++b) {
            ap = std::min(ap, detail::max_step(xchol[b], ox[b]));
            ad = std::min(ad, detail::max_step(ychol[b], oy[b]));
        }
        return std::pair{ap, ad};
    };

    // iterates can degrade once the Schur complement gets ill-conditioned,
    // so the best one seen is what gets returned on early termination
    int stall = 0;
    double best_merit = std::numeric_limits<double>::infinity();
    double stall_reference = best_merit;
    Result best;
    auto finish = [&](Status st) {
        if (best.x.size() == 0)
            best = r;
        best.status = st;
        best.iterations = r.iterations;
        return best;
    };
    for (int it = 0;; ++it) {
        const double pres = primal_residual();
        const double dres = dual_residual();
        double xy = 0.0;
        for (std::size_t b = 0; b < nb; ++b)
            xy += frobenius_dot(r.X[b], r.Y[b]);
        r.primal_objective = c.dot(r.x);
        r.dual_objective = 0.0;
        for (std::size_t b = 0; b < nb; ++b)
            r.dual_objective += frobenius_dot(p.constant(b), r.Y[b]);
        r.primal_infeasibility = pres / (1.0 + f0_norm);
        r.dual_infeasibility = dres / (1.0 + c_norm);
        r.relative_gap = std::max(std::abs(r.primal_objective - r.dual_objective), xy) /
                         (1.0 + std::abs(r.primal_objective) + std::abs(r.dual_objective));
        r.iterations = it;

        if (r.primal_infeasibility <= settings.feasibility_tolerance &&
            r.dual_infeasibility <= settings.feasibility_tolerance && r.relative_gap <= settings.gap_tolerance) {
            r.status = Status::optimal;
            return r;
        }
        if ((r.primal_infeasibility <= settings.stop_residual && r.primal_objective < settings.stop_below) ||
            (r.dual_infeasibility <= settings.stop_residual && r.dual_objective > settings.stop_above)) {
            r.status = Status::target_reached;
            return r;
        }
        const double merit = std::max({r.primal_infeasibility, r.dual_infeasibility, r.relative_gap});
        if (merit < best_merit) {
            best_merit = merit;
            best = r;
        }
        if (it >= settings.max_iterations)
            return finish(Status::iteration_limit);
        if (merit < 0.9 * stall_reference) {
            stall_reference = merit;
            stall = 0;
        } else if (++stall > 12) {
            return finish(Status::stalled);
        }

        const double mu = xy / n_total;
        for (std::size_t b = 0; b < nb; ++b) {
            xchol[b].compute(r.X[b]);
            ychol[b].compute(r.Y[b]);
            if (xchol[b].info() != Eigen::Success || ychol[b].info() != Eigen::Success)
                return finish(Status::numerical_failure);
            const auto d = r.X[b].rows();
            Xinv[b] = xchol[b].solve(Matrix::Identity(d, d));
        }

        // Schur complement B_ij = tr(F_i X^{-1} F_j Y)
        schur.clear();
        schur.reset_regularization();
        for (std::size_t b = 0; b < nb; ++b) {
            const auto& ts = p.terms(b);
            std::vector<Matrix> g(ts.size());
            for (std::size_t a = 0; a < ts.size(); ++a)
                g[a] = Xinv[b] * ts[a].coeff * r.Y[b];
            std::size_t k = 0;
            for (std::size_t a = 0; a < ts.size(); ++a)
                for (std::size_t cc = 0; cc <= a; ++cc, ++k)
                    schur.add(b, k, ts[a].variable, ts[cc].variable, frobenius_dot(ts[cc].coeff, g[a]));
        }
        if (!schur.factorize())
            return finish(Status::numerical_failure);

        // predictor
        build_rhs(nullptr);
        Vector dx = schur.solve(rhs);
        directions(dx, nullptr, dXa, dYa);
        auto [ap_aff, ad_aff] = step_lengths(dXa, dYa);
        ap_aff = std::min(1.0, ap_aff);
        ad_aff = std::min(1.0, ad_aff);
        double xy_aff = 0.0;
        for (std::size_t b = 0; b < nb; ++b)
            xy_aff += frobenius_dot(r.X[b] + ap_aff * dXa[b], r.Y[b] + ad_aff * dYa[b]);
        const double mu_aff = std::max(0.0, xy_aff / n_total);
        double sigma = std::pow(std::min(1.0, mu_aff / mu), 3.0);
        sigma = std::clamp(sigma, 0.0, 1.0);

        // corrector
        std::vector<Matrix> R(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            const auto d = r.X[b].rows();
            R[b] = sigma * mu * Matrix::Identity(d, d) - dXa[b] * dYa[b];
        }
        build_rhs(&R);
        dx = schur.solve(rhs);
        directions(dx, &R, dX, dY);
        auto [ap, ad] = step_lengths(dX, dY);
        ap = std::min(1.0, settings.step_fraction * ap);
        ad = std::min(1.0, settings.step_fraction * ad);
        if (!std::isfinite(ap) || !std::isfinite(ad) || !dx.allFinite())
            return finish(Status::numerical_failure);

        r.x += ap * dx;
        for (std::size_t b = 0; b < nb; ++b) {
            r.X[b] += ap * dX[b];
            r.Y[b] += ad * dY[b];
            r.X[b] = 0.5 * (r.X[b] + r.X[b].transpose());
            r.Y[b] = 0.5 * (r.Y[b] + r.Y[b].transpose());
        }
    }
}

} // namespace cjsr::sdp

#endif
