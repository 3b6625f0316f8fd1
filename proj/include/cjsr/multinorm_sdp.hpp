#ifndef CJSR_MULTINORM_SDP_HPP
#define CJSR_MULTINORM_SDP_HPP

#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <cjsr/errors.hpp>
#include <cjsr/linalg.hpp>
#include <cjsr/sdp/block_sdp.hpp>
#include <cjsr/switched_system.hpp>

namespace cjsr {

/// One positive-definite form per automaton node, indexed like the nodes.
struct QuadraticMultinorm {
    std::vector<Matrix> forms;

    static QuadraticMultinorm identity(std::size_t nodes, std::size_t dim)
    {
        const auto d = static_cast<Eigen::Index>(dim);
        return {std::vector<Matrix>(nodes, Matrix::Identity(d, d))};
    }
};

/// Value of a quadratic multinorm: the smallest gamma with
/// |A x|_{Q,w} <= gamma |x|_{Q,v} on every edge (v, w, sigma).
inline double multinorm_value(const ConstrainedSystem& s, const QuadraticMultinorm& m)
{
    const auto& a = s.automaton();
    if (m.forms.size() != a.num_nodes())
        throw InputError("multinorm has " + std::to_string(m.forms.size()) + " forms for " +
                         std::to_string(a.num_nodes()) + " nodes");
    const auto n = static_cast<Eigen::Index>(s.dimension());
    for (std::size_t v = 0; v < m.forms.size(); ++v) {
        if (m.forms[v].rows() != n || m.forms[v].cols() != n)
            throw InputError("form of node '" + a.node_name(v) + "' has the wrong size");
        if (!(min_eigenvalue(symmetrize(m.forms[v])) > 0.0))
            throw InputError("form of node '" + a.node_name(v) + "' is not positive definite");
    }
    double best = 0.0;
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        const Matrix& A = s.edge_matrix(e);
        Matrix lhs = symmetrize(A.transpose() * m.forms[ed.target] * A);
        const double g2 = max_generalized_eigenvalue(lhs, symmetrize(m.forms[ed.source]));
        best = std::max(best, std::sqrt(std::max(0.0, g2)));
    }
    return best;
}

enum class Feasibility { feasible, infeasible, numerically_indeterminate };

inline const char* to_string(Feasibility f)
{
    switch (f) {
    case Feasibility::feasible: return "feasible";
    case Feasibility::infeasible: return "infeasible";
    case Feasibility::numerically_indeterminate: return "numerically_indeterminate";
    }
    return "?";
}

struct FeasibilityOptions {
    /// Decision threshold on the optimal slack t*.
    double tol = 1e-8;
    /// Forms are confined to I <= Q_v <= condition_bound * I.
    double condition_bound = 1e6;
    /// Dual residual accepted when certifying infeasibility.
    double dual_certificate_tol = 1e-7;
    /// Stop the solver as soon as the sign of t* is settled.
    bool early_exit = true;
    sdp::Settings solver;
};

struct FeasibilityOutcome {
    Feasibility status = Feasibility::numerically_indeterminate;
    /// t evaluated exactly on the returned forms (scaled program).
    double slack = 0.0;
    /// Dual objective: lower bound on t* when the dual iterate is feasible.
    double dual_bound = 0.0;
    std::optional<QuadraticMultinorm> witness;
    /// Sigma was divided by this before solving.
    double scale = 1.0;
    sdp::Status solver_status = sdp::Status::numerical_failure;
    int iterations = 0;
    std::string diagnostics;
};

/// Largest spectral norm over the matrices carried by edges.
inline double max_edge_norm(const ConstrainedSystem& s)
{
    double m = 0.0;
    for (std::size_t e = 0; e < s.automaton().num_edges(); ++e)
        m = std::max(m, spectral_norm(s.edge_matrix(e)));
    return m;
}

namespace detail {

inline Matrix sym_basis(Eigen::Index n, Eigen::Index k, Eigen::Index l)
{
    Matrix e = Matrix::Zero(n, n);
    e(k, l) = 1.0;
    e(l, k) = 1.0;
    return e;
}

struct SlackProgram {
    sdp::Problem problem;
    std::size_t t_var = 0;
    std::size_t per_node = 0;
};

/// minimize t  s.t.  t I + g^2 Q_v - A' Q_w A >= 0   for every edge,
///                   Q_v - I >= 0,  c I - Q_v >= 0    for every node,
/// with A and g already divided by `scale`.
///
/// Without the slack variable the edge blocks read g^2 Q_v - A' Q_w A >= 0
/// and the objective is zero (a pure feasibility program).
inline SlackProgram build_slack_program(const ConstrainedSystem& s, double gamma, double scale,
                                        double condition_bound, bool with_slack = true)
{
    const auto& a = s.automaton();
    const auto n = static_cast<Eigen::Index>(s.dimension());
    SlackProgram sp;
    auto& p = sp.problem;
    sp.per_node = static_cast<std::size_t>(n * (n + 1) / 2);

    std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = k; l < n; ++l)
            entries.emplace_back(k, l);
    std::vector<Matrix> basis;
    for (auto [k, l] : entries)
        basis.push_back(sym_basis(n, k, l));

    for (std::size_t v = 0; v < a.num_nodes(); ++v)
        for (std::size_t q = 0; q < sp.per_node; ++q)
            p.add_variable(0.0);
    if (with_slack)
        sp.t_var = p.add_variable(1.0);

    const double g2 = (gamma / scale) * (gamma / scale);
    const Matrix I = Matrix::Identity(n, n);
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        const Matrix A = s.edge_matrix(e) / scale;
        const auto b = p.add_block(static_cast<std::size_t>(n));
        if (with_slack)
            p.add_term(sp.t_var, b, I);
        for (std::size_t q = 0; q < sp.per_node; ++q) {
            p.add_term(ed.source * sp.per_node + q, b, g2 * basis[q]);
            p.add_term(ed.target * sp.per_node + q, b, -(A.transpose() * basis[q] * A));
        }
    }
    for (std::size_t v = 0; v < a.num_nodes(); ++v) {
        const auto lo = p.add_block(static_cast<std::size_t>(n));
        p.set_constant(lo, I);
        const auto hi = p.add_block(static_cast<std::size_t>(n));
        p.set_constant(hi, -condition_bound * I);
        for (std::size_t q = 0; q < sp.per_node; ++q) {
            p.add_term(v * sp.per_node + q, lo, basis[q]);
            p.add_term(v * sp.per_node + q, hi, -basis[q]);
        }
    }
    return sp;
}

inline QuadraticMultinorm extract_forms(const SlackProgram& sp, const Vector& x, std::size_t nodes, Eigen::Index n)
{
    QuadraticMultinorm m;
    for (std::size_t v = 0; v < nodes; ++v) {
        Matrix q(n, n);
        std::size_t idx = v * sp.per_node;
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index l = k; l < n; ++l) {
                q(k, l) = x(static_cast<Eigen::Index>(idx));
                q(l, k) = x(static_cast<Eigen::Index>(idx));
                ++idx;
            }
        m.forms.push_back(std::move(q));
    }
    return m;
}

/// max over edges of lambda_max(A' Q_w A - g^2 Q_v), on the scaled data.
inline double exact_slack(const ConstrainedSystem& s, const QuadraticMultinorm& m, double gamma, double scale)
{
    const auto& a = s.automaton();
    const double g2 = (gamma / scale) * (gamma / scale);
    double t = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        const Matrix A = s.edge_matrix(e) / scale;
        t = std::max(t, max_eigenvalue(symmetrize(A.transpose() * m.forms[ed.target] * A - g2 * m.forms[ed.source])));
    }
    return t;
}

} // namespace detail

/// Writes the slack program assembled by feasibility_at in the plain-text
/// block format of sdp::Problem::write_text.
inline void write_feasibility_program(std::ostream& os, const ConstrainedSystem& s, double gamma,
                                      const FeasibilityOptions& opts = {})
{
    double scale = max_edge_norm(s);
    if (!(scale > 0.0))
        scale = 1.0;
    auto sp = detail::build_slack_program(s, gamma, scale, opts.condition_bound);
    os << "# gamma " << gamma << " scale " << scale << " t_var " << sp.t_var << "\n";
    sp.problem.write_text(os);
}

/// Decides whether a quadratic multinorm of value gamma exists.
///
/// Solves the normalized slack program (see build_slack_program) on Sigma
/// rescaled to unit largest edge norm. Feasible iff the exact slack of the
/// returned forms is <= tol; infeasible iff the dual objective, with a
/// dual residual below dual_certificate_tol, exceeds tol. A feasible witness
/// satisfies multinorm_value <= sqrt(gamma^2 + tol * scale^2).
inline FeasibilityOutcome feasibility_at(const ConstrainedSystem& s, double gamma, const FeasibilityOptions& opts = {})
{
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InputError("gamma must be positive and finite");
    if (!(opts.tol > 0.0))
        throw InputError("feasibility tolerance must be positive");
    const auto& a = s.automaton();
    const auto n = static_cast<Eigen::Index>(s.dimension());

    FeasibilityOutcome out;
    const double scale = max_edge_norm(s);
    if (!(scale > 0.0)) {
        // every edge matrix is zero: Q = I works at any level
        out.status = Feasibility::feasible;
        out.witness = QuadraticMultinorm::identity(a.num_nodes(), s.dimension());
        out.slack = -gamma * gamma;
        out.dual_bound = out.slack;
        out.solver_status = sdp::Status::optimal;
        out.diagnostics = "all edge matrices are zero";
        return out;
    }
    out.scale = scale;

    auto sp = detail::build_slack_program(s, gamma, scale, opts.condition_bound);
    auto settings = opts.solver;
    if (opts.early_exit) {
        settings.stop_below = std::min(settings.stop_below, -opts.tol);
        settings.stop_above = std::min(settings.stop_above, 2.0 * opts.tol);
    }
    auto res = sdp::solve(sp.problem, settings);
    out.solver_status = res.status;
    out.iterations = res.iterations;
    out.dual_bound = res.dual_objective;

    std::ostringstream diag;
    diag << "solver " << sdp::to_string(res.status) << " after " << res.iterations << " iterations, pobj "
         << res.primal_objective << ", dobj " << res.dual_objective << ", pinf " << res.primal_infeasibility
         << ", dinf " << res.dual_infeasibility;

    bool forms_ok = res.x.allFinite();
    QuadraticMultinorm m;
    if (forms_ok) {
        m = detail::extract_forms(sp, res.x, a.num_nodes(), n);
        for (const auto& q : m.forms)
            if (!(min_eigenvalue(q) > 0.0))
                forms_ok = false;
    }
    if (forms_ok) {
        out.slack = detail::exact_slack(s, m, gamma, scale);
        if (out.slack <= opts.tol) {
            out.status = Feasibility::feasible;
            out.witness = std::move(m);
            out.diagnostics = diag.str();
            return out;
        }
    } else {
        out.slack = res.primal_objective;
    }
    if (res.dual_infeasibility <= opts.dual_certificate_tol && res.dual_objective > opts.tol)
        out.status = Feasibility::infeasible;
    else
        out.status = Feasibility::numerically_indeterminate;
    out.diagnostics = diag.str();
    return out;
}

/// Forms near the analytic center of { I <= Q_v <= c I, edge LMIs at gamma }.
///
/// Unlike the slack-minimizing witness of feasibility_at, constraints that
/// are not forced to be tight keep a visible margin here. Returns nothing
/// when gamma is not (numerically) feasible.
inline std::optional<QuadraticMultinorm> centered_multinorm(const ConstrainedSystem& s, double gamma,
                                                            const FeasibilityOptions& opts = {})
{
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw InputError("gamma must be positive and finite");
    const auto& a = s.automaton();
    double scale = max_edge_norm(s);
    if (!(scale > 0.0))
        return QuadraticMultinorm::identity(a.num_nodes(), s.dimension());
    auto sp = detail::build_slack_program(s, gamma, scale, opts.condition_bound, false);
    auto res = sdp::solve(sp.problem, opts.solver);
    if (!res.x.allFinite() || res.primal_infeasibility > 1e-6)
        return std::nullopt;
    auto m = detail::extract_forms(sp, res.x, a.num_nodes(), static_cast<Eigen::Index>(s.dimension()));
    for (const auto& q : m.forms)
        if (!(min_eigenvalue(q) > 0.0))
            return std::nullopt;
    return m;
}

} // namespace cjsr

#endif
