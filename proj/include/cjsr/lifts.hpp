#ifndef CJSR_LIFTS_HPP
#define CJSR_LIFTS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <cjsr/automaton.hpp>
#include <cjsr/errors.hpp>
#include <cjsr/linalg.hpp>
#include <cjsr/switched_system.hpp>

namespace cjsr {

enum class LiftKind { t_product, path_dependent, d_lift, kronecker };

inline const char* to_string(LiftKind k)
{
    switch (k) {
    case LiftKind::t_product: return "tproduct";
    case LiftKind::path_dependent: return "pathdep";
    case LiftKind::d_lift: return "dlift";
    case LiftKind::kronecker: return "kronecker";
    }
    return "?";
}

/// Where a lifted node or edge comes from in the base automaton.
///
/// For nodes: `base_node` is the base node (t_product, d_lift) or the end
/// node of the memory path (path_dependent), and `base_edges` is the memory
/// path. For edges: `base_edges` is the base path the lifted edge stands
/// for; its labels, read in order, form the lifted label word.
struct Origin {
    std::size_t base_node = 0;
    std::vector<std::size_t> base_edges;
};

struct LiftDescriptor {
    LiftKind kind = LiftKind::t_product;
    std::optional<std::size_t> parameter;
    std::vector<Origin> node_backmap;
    std::vector<Origin> edge_backmap;
};

struct LiftedSystem {
    ConstrainedSystem system;
    LiftDescriptor descriptor;
    /// CJSR(lifted) = CJSR(base)^exponent.
    std::size_t exponent = 1;
};

struct LiftLimits {
    EnumerationLimits enumeration;
    std::size_t max_dimension = 2000;
};

namespace detail {

inline LiftDescriptor identity_descriptor(const Automaton& a, LiftKind kind, std::optional<std::size_t> param)
{
    LiftDescriptor d;
    d.kind = kind;
    d.parameter = param;
    for (std::size_t v = 0; v < a.num_nodes(); ++v)
        d.node_backmap.push_back({v, {}});
    for (std::size_t e = 0; e < a.num_edges(); ++e)
        d.edge_backmap.push_back({a.edge(e).source, {e}});
    return d;
}

inline std::string path_name(const Automaton& a, const std::vector<std::size_t>& edges)
{
    // "a-1>b-2>c": visited nodes joined by the edge labels
    std::string name = a.node_name(a.edge(edges.front()).source);
    for (auto e : edges)
        name += "-" + std::to_string(a.edge(e).label) + ">" + a.node_name(a.edge(e).target);
    return name;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace detail

/// Edges are the length-T paths of the base, each carrying its product.
///
/// Every lifted edge gets its own label (and matrix), so two paths with the
/// same label word between the same nodes stay distinct edges.
inline LiftedSystem t_product_lift(const ConstrainedSystem& s, std::size_t T, const LiftLimits& limits = {})
{
    if (T < 1)
        throw InputError("T must be at least 1");
    const auto& a = s.automaton();
    LiftedSystem out;
    out.exponent = T;
    out.descriptor.kind = LiftKind::t_product;
    out.descriptor.parameter = T;
    for (std::size_t v = 0; v < a.num_nodes(); ++v)
        out.descriptor.node_backmap.push_back({v, {}});

    std::vector<Edge> edges;
    std::vector<Matrix> mats;
    for_each_path_of_length(
        a, T,
        [&](const Path& p) {
            const Label l = static_cast<Label>(edges.size() + 1);
            edges.push_back({p.source, p.target, l});
            mats.push_back(product_along_path(s, p));
            out.descriptor.edge_backmap.push_back({p.source, p.edges});
        },
        limits.enumeration);

    const int nl = static_cast<int>(mats.size());
    out.system = ConstrainedSystem(Automaton(a.nodes(), std::move(edges), nl), MatrixSet(std::move(mats)));
    return out;
}

/// Nodes are the length-M paths of the base; matrices are unchanged.
inline LiftedSystem path_dependent_lift(const ConstrainedSystem& s, std::size_t M, const LiftLimits& limits = {})
{
    const auto& a = s.automaton();
    LiftedSystem out;
    out.exponent = 1;
    if (M == 0) {
        out.system = s;
        out.descriptor = detail::identity_descriptor(a, LiftKind::path_dependent, 0);
        return out;
    }
    out.descriptor.kind = LiftKind::path_dependent;
    out.descriptor.parameter = M;

    std::map<std::vector<std::size_t>, std::size_t> node_of;
    std::vector<std::string> names;
    for_each_path_of_length(
        a, M,
        [&](const Path& p) {
            node_of.emplace(p.edges, names.size());
            names.push_back(detail::path_name(a, p.edges));
            out.descriptor.node_backmap.push_back({p.target, p.edges});
        },
        limits.enumeration);

    std::vector<Edge> edges;
    std::vector<std::size_t> head(M), tail(M);
    for_each_path_of_length(
        a, M + 1,
        [&](const Path& p) {
            std::copy(p.edges.begin(), p.edges.end() - 1, head.begin());
            std::copy(p.edges.begin() + 1, p.edges.end(), tail.begin());
            edges.push_back({node_of.at(head), node_of.at(tail), a.edge(p.edges.back()).label});
            out.descriptor.edge_backmap.push_back({p.source, p.edges});
        },
        limits.enumeration);

    out.system = ConstrainedSystem(Automaton(std::move(names), std::move(edges), a.num_labels()), s.matrices());
    return out;
}

/// Degree-d multi-indices over n variables, as nondecreasing variable-index
/// tuples in lexicographic order: (0,0), (0,1), (1,1) for n = 2, d = 2.
inline std::vector<std::vector<int>> monomial_exponents(std::size_t n, std::size_t d)
{
    std::vector<std::vector<int>> out;
    std::vector<std::size_t> idx(d, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t from) {
        if (pos == d) {
            std::vector<int> alpha(n, 0);
            for (auto i : idx)
                ++alpha[i];
            out.push_back(std::move(alpha));
            return;
        }
        for (std::size_t i = from; i < n; ++i) {
            idx[pos] = i;
            rec(pos + 1, i);
        }
    };
    rec(0, 0);
    return out;
}

inline std::size_t d_lift_dimension(std::size_t n, std::size_t d)
{
    return static_cast<std::size_t>(detail::binomial(n + d - 1, d));
}

namespace detail {

inline double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

/// sqrt(d! / alpha!)
inline double multinomial_scale(const std::vector<int>& alpha)
{
    int d = std::accumulate(alpha.begin(), alpha.end(), 0);
    double l = log_factorial(d);
    for (auto a : alpha)
        l -= log_factorial(a);
    return std::exp(0.5 * l);
}

} // namespace detail

/// Scaled monomial vector with |x^[d]| = |x|^d in the Euclidean norm.
inline Vector d_lift_vector(const Vector& x, std::size_t d)
{
    if (d < 1)
        throw InputError("d must be at least 1");
    const auto exps = monomial_exponents(static_cast<std::size_t>(x.size()), d);
    Vector out(static_cast<Eigen::Index>(exps.size()));
    for (std::size_t r = 0; r < exps.size(); ++r) {
        double m = detail::multinomial_scale(exps[r]);
        for (Eigen::Index i = 0; i < x.size(); ++i)
            m *= std::pow(x(i), exps[r][static_cast<std::size_t>(i)]);
        out(static_cast<Eigen::Index>(r)) = m;
    }
    return out;
}

/// The matrix with A^[d] x^[d] = (Ax)^[d] for every x.
///
/// Row beta expands prod_k (A_k . x)^{beta_k} as a polynomial and rescales
/// each monomial coefficient into the scaled basis.
inline Matrix d_lift_matrix(const Matrix& a, std::size_t d)
{
    if (d < 1)
        throw InputError("d must be at least 1");
    if (a.rows() != a.cols())
        throw InputError("d_lift_matrix needs a square matrix");
    const auto n = static_cast<std::size_t>(a.rows());
    const auto exps = monomial_exponents(n, d);
    std::map<std::vector<int>, std::size_t> column_of;
    for (std::size_t i = 0; i < exps.size(); ++i)
        column_of.emplace(exps[i], i);

    const auto dim = static_cast<Eigen::Index>(exps.size());
    Matrix out = Matrix::Zero(dim, dim);
    for (std::size_t r = 0; r < exps.size(); ++r) {
        std::map<std::vector<int>, double> poly{{std::vector<int>(n, 0), 1.0}};
        for (std::size_t k = 0; k < n; ++k) {
            for (int rep = 0; rep < exps[r][k]; ++rep) {
                std::map<std::vector<int>, double> next;
                for (const auto& [mono, coef] : poly) {
                    for (std::size_t j = 0; j < n; ++j) {
                        const double ajk = a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
                        if (ajk == 0.0)
                            continue;
                        auto m = mono;
                        ++m[j];
                        next[m] += coef * ajk;
                    }
                }
                poly = std::move(next);
            }
        }
        const double row_scale = detail::multinomial_scale(exps[r]);
        for (const auto& [mono, coef] : poly) {
            const auto c = column_of.at(mono);
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                row_scale * coef / detail::multinomial_scale(mono);
        }
    }
    return out;
}

/// Same automaton, every matrix replaced by its [d]-lift.
inline LiftedSystem d_lift_system(const ConstrainedSystem& s, std::size_t d, const LiftLimits& limits = {})
{
    if (d < 1)
        throw InputError("d must be at least 1");
    const auto dim = d_lift_dimension(s.dimension(), d);
    if (dim > limits.max_dimension)
        throw CapExceeded("[d]-lift dimension", limits.max_dimension);
    std::vector<Matrix> mats;
    for (const auto& m : s.matrices().matrices())
        mats.push_back(d_lift_matrix(m, d));
    LiftedSystem out;
    out.system = ConstrainedSystem(s.automaton(), MatrixSet(std::move(mats)));
    out.descriptor = detail::identity_descriptor(s.automaton(), LiftKind::d_lift, d);
    out.exponent = d;
    return out;
}

/// One matrix (e_j e_i^T) kron A_sigma per edge (v_i, v_j, sigma), in edge order.
inline MatrixSet kronecker_lift(const ConstrainedSystem& s, const LiftLimits& limits = {})
{
    const auto& a = s.automaton();
    const auto n = static_cast<Eigen::Index>(s.dimension());
    const auto nv = static_cast<Eigen::Index>(a.num_nodes());
    if (static_cast<std::size_t>(n * nv) > limits.max_dimension)
        throw CapExceeded("Kronecker lift dimension", limits.max_dimension);
    std::vector<Matrix> mats;
    mats.reserve(a.num_edges());
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        Matrix m = Matrix::Zero(n * nv, n * nv);
        m.block(static_cast<Eigen::Index>(ed.target) * n, static_cast<Eigen::Index>(ed.source) * n, n, n) =
            s.matrices()[ed.label];
        mats.push_back(std::move(m));
    }
    return MatrixSet(std::move(mats));
}

/// The Kronecker-lifted set as an unconstrained system: one node, one
/// self-loop per lifted matrix.
inline LiftedSystem kronecker_lift_system(const ConstrainedSystem& s, const LiftLimits& limits = {})
{
    auto set = kronecker_lift(s, limits);
    const auto& a = s.automaton();
    std::vector<Edge> loops;
    LiftedSystem out;
    out.descriptor.kind = LiftKind::kronecker;
    out.descriptor.node_backmap.push_back({0, {}});
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        loops.push_back({0, 0, static_cast<Label>(e + 1)});
        out.descriptor.edge_backmap.push_back({a.edge(e).source, {e}});
    }
    out.system = ConstrainedSystem(Automaton({"all"}, std::move(loops), static_cast<int>(a.num_edges())),
                                   std::move(set));
    out.exponent = 1;
    return out;
}

} // namespace cjsr

#endif
