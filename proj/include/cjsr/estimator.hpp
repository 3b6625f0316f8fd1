#ifndef CJSR_ESTIMATOR_HPP
#define CJSR_ESTIMATOR_HPP

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <cjsr/automaton.hpp>
#include <cjsr/errors.hpp>
#include <cjsr/lifts.hpp>
#include <cjsr/multinorm_sdp.hpp>
#include <cjsr/switched_system.hpp>

namespace cjsr {

enum class Method { plain, t_product, path_dependent, d_lift, kronecker };

inline const char* to_string(Method m)
{
    switch (m) {
    case Method::plain: return "plain";
    case Method::t_product: return "tproduct";
    case Method::path_dependent: return "pathdep";
    case Method::d_lift: return "dlift";
    case Method::kronecker: return "kronecker";
    }
    return "?";
}

/// Accepts the short names printed by to_string plus the long enum names.
inline Method parse_method(const std::string& name)
{
    static const std::map<std::string, Method> names{
        {"plain", Method::plain},         {"tproduct", Method::t_product},
        {"t_product", Method::t_product}, {"pathdep", Method::path_dependent},
        {"path_dependent", Method::path_dependent}, {"dlift", Method::d_lift},
        {"d_lift", Method::d_lift},       {"kronecker", Method::kronecker},
    };
    auto it = names.find(name);
    if (it == names.end())
        throw InputError("unknown method '" + name + "'");
    return it->second;
}

inline bool method_takes_parameter(Method m)
{
    return m == Method::t_product || m == Method::path_dependent || m == Method::d_lift;
}

/// The smallest T whose T-product factor n^{1/(2T)} is at most 1 + r.
inline std::size_t required_T(std::size_t n, double r)
{
    if (n < 1)
        throw InputError("dimension must be at least 1");
    if (!(r > 0.0))
        throw InputError("r must be positive");
    const double t = std::ceil(std::log(static_cast<double>(n)) / (2.0 * std::log1p(r)));
    return t < 1.0 ? 1 : static_cast<std::size_t>(t);
}

/// Ratio between the upper estimate and the certified lower estimate.
inline double accuracy_factor(Method m, std::size_t n, std::size_t parameter)
{
    const double nd = static_cast<double>(n);
    switch (m) {
    case Method::plain:
    case Method::kronecker: return std::sqrt(nd);
    case Method::t_product: return std::pow(nd, 1.0 / (2.0 * static_cast<double>(parameter)));
    case Method::d_lift:
        return std::pow(static_cast<double>(d_lift_dimension(n, parameter)),
                        1.0 / (2.0 * static_cast<double>(parameter)));
    case Method::path_dependent: return std::pow(nd, 1.0 / (2.0 * static_cast<double>(parameter + 1)));
    }
    return 1.0;
}

struct BisectionOptions {
    double abs_tol = 1e-6;
    /// Known lower bound on gamma* (e.g. from a cycle); 0 if none.
    double lower_hint = 0.0;
    /// Above this fraction of indeterminate probes the interval is widened.
    double max_indeterminate_fraction = 0.25;
    /// Padding subtracted from gamma_lo when widening, in units of abs_tol.
    double indeterminate_padding = 10.0;
    std::size_t max_probes = 200;
    FeasibilityOptions feasibility;
};

struct BisectionResult {
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    QuadraticMultinorm witness;
    std::size_t probes = 0;
    std::size_t indeterminate = 0;
    bool widened = false;
    std::string diagnostics;
};

namespace detail {

/// Continues bisection from the bracket and witness already in `r`.
inline void bisect_from(const ConstrainedSystem& s, const BisectionOptions& opts, BisectionResult& r)
{
    double lo_certified = r.gamma_lo;
    std::size_t probes = 0, indeterminate = 0;
    std::string last_indeterminate;
    while (r.gamma_hi - r.gamma_lo > opts.abs_tol && probes < opts.max_probes) {
        const double mid = 0.5 * (r.gamma_lo + r.gamma_hi);
        if (!(mid > 0.0))
            break;
        auto out = feasibility_at(s, mid, opts.feasibility);
        ++probes;
        if (out.status == Feasibility::feasible) {
            const double v = multinorm_value(s, *out.witness);
            if (v < r.gamma_hi) {
                r.gamma_hi = v;
                r.witness = std::move(*out.witness);
            }
            // the witness may sit marginally above mid; keep the bracket ordered
            r.gamma_lo = std::min(r.gamma_lo, r.gamma_hi);
        } else if (out.status == Feasibility::infeasible) {
            r.gamma_lo = mid;
            lo_certified = mid;
        } else {
            ++indeterminate;
            r.gamma_lo = mid;
            last_indeterminate = out.diagnostics;
        }
    }
    r.probes += probes;
    r.indeterminate += indeterminate;

    if (probes > 0 && indeterminate == probes)
        throw EstimationFailure("every feasibility probe was numerically indeterminate (" + last_indeterminate + ")");
    if (static_cast<double>(indeterminate) > opts.max_indeterminate_fraction * static_cast<double>(probes)) {
        r.widened = true;
        r.gamma_lo = std::max(lo_certified, r.gamma_lo - opts.indeterminate_padding * opts.abs_tol);
    }
    r.diagnostics = std::to_string(r.probes) + " probes, " + std::to_string(r.indeterminate) + " indeterminate";
    if (!last_indeterminate.empty())
        r.diagnostics += "; last indeterminate: " + last_indeterminate;
}

} // namespace detail

/// Bisection on gamma with feasibility_at.
///
/// gamma_hi is always the value of an actual multinorm (the identity one at
/// the start, later the witness of a feasible probe), so it is a valid upper
/// bound on gamma* whatever the solver did. Indeterminate probes move gamma_lo
/// up like infeasible ones.
inline BisectionResult bisect_gamma_star(const ConstrainedSystem& s, const BisectionOptions& opts = {})
{
    if (!(opts.abs_tol > 0.0))
        throw InputError("abs_tol must be positive");
    BisectionResult r;
    r.witness = QuadraticMultinorm::identity(s.automaton().num_nodes(), s.dimension());
    r.gamma_hi = multinorm_value(s, r.witness);
    r.gamma_lo = std::max(0.0, std::min(opts.lower_hint, r.gamma_hi));
    if (r.gamma_hi > 0.0)
        detail::bisect_from(s, opts, r);
    return r;
}

/// Narrows an earlier bisection result to opts.abs_tol.
inline BisectionResult refine_bisection(const ConstrainedSystem& s, BisectionResult r, const BisectionOptions& opts)
{
    if (!(opts.abs_tol > 0.0))
        throw InputError("abs_tol must be positive");
    r.widened = false;
    if (r.gamma_hi > 0.0)
        detail::bisect_from(s, opts, r);
    return r;
}

struct ExactnessCertificate {
    /// Cycle in the solved (possibly lifted) automaton.
    Cycle cycle;
    std::vector<std::size_t> tight_edges;
    /// The same cycle as base edges and labels.
    Cycle base_cycle;
    std::vector<Label> base_labels;
    double cjsr_exact = 0.0;
    double eigenvalue_tolerance = 0.0;
};

/// Edges whose slack gamma^2 Q_v - A' Q_w A is singular up to eig_tol
/// times the largest entry of the two terms.
inline std::vector<std::size_t> tight_edges(const ConstrainedSystem& s, const QuadraticMultinorm& m, double gamma,
                                            double eig_tol)
{
    const auto& a = s.automaton();
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        const Matrix& A = s.edge_matrix(e);
        const Matrix lhs = gamma * gamma * m.forms[ed.source];
        const Matrix rhs = A.transpose() * m.forms[ed.target] * A;
        const Matrix slack = symmetrize(lhs - rhs);
        const double scale = std::max(max_abs_entry(lhs), max_abs_entry(rhs));
        if (min_eigenvalue(slack) <= eig_tol * scale)
            out.push_back(e);
    }
    return out;
}

/// Orders `edges` into one simple cycle if they form exactly that.
inline std::optional<Cycle> as_single_simple_cycle(const Automaton& a, const std::vector<std::size_t>& edges)
{
    if (edges.empty())
        return std::nullopt;
    std::map<std::size_t, std::size_t> out_of;
    std::map<std::size_t, int> in_deg;
    for (auto e : edges) {
        if (!out_of.emplace(a.edge(e).source, e).second)
            return std::nullopt;
        if (++in_deg[a.edge(e).target] > 1)
            return std::nullopt;
    }
    std::vector<std::size_t> order;
    std::size_t e = edges.front();
    const std::size_t start = a.edge(e).source;
    while (order.size() < edges.size()) {
        order.push_back(e);
        const auto next = a.edge(e).target;
        if (next == start)
            break;
        auto it = out_of.find(next);
        if (it == out_of.end())
            return std::nullopt;
        e = it->second;
    }
    if (order.size() != edges.size() || a.edge(order.back()).target != start)
        return std::nullopt;
    return make_cycle(a, canonical_rotation(order));
}

/// Maps a cycle of the solved system back to base edges.
///
/// T-product edges expand to their T base edges; path-dependent edges stand
/// for the last edge of their base path; every other lift keeps edge indices.
inline std::vector<std::size_t> delift_cycle_edges(const LiftDescriptor& d, const Cycle& c)
{
    std::vector<std::size_t> base;
    for (auto e : c.path.edges) {
        const auto& o = d.edge_backmap.at(e).base_edges;
        if (d.kind == LiftKind::t_product)
            base.insert(base.end(), o.begin(), o.end());
        else
            base.push_back(o.back());
    }
    return base;
}

/// Sufficient extremality test: the tight edges form one simple cycle.
///
/// `base`/`descriptor` de-lift the cycle; pass the solved system and an
/// identity descriptor when no lift was used.
inline std::optional<ExactnessCertificate> extremality_certificate(const ConstrainedSystem& solved,
                                                                   const QuadraticMultinorm& witness, double gamma,
                                                                   double eig_tol, const ConstrainedSystem& base,
                                                                   const LiftDescriptor& descriptor)
{
    auto tight = tight_edges(solved, witness, gamma, eig_tol);
    auto cyc = as_single_simple_cycle(solved.automaton(), tight);
    if (!cyc)
        return std::nullopt;
    ExactnessCertificate cert;
    cert.cycle = *cyc;
    cert.tight_edges = std::move(tight);
    cert.eigenvalue_tolerance = eig_tol;
    cert.base_cycle = make_cycle(base.automaton(), delift_cycle_edges(descriptor, *cyc));
    for (auto e : cert.base_cycle.path.edges)
        cert.base_labels.push_back(base.automaton().edge(e).label);
    cert.cjsr_exact = cycle_lower_bound(base, cert.base_cycle);
    return cert;
}

inline std::optional<ExactnessCertificate> extremality_certificate(const ConstrainedSystem& s,
                                                                   const QuadraticMultinorm& witness, double gamma,
                                                                   double eig_tol = 1e-6)
{
    return extremality_certificate(s, witness, gamma, eig_tol, s,
                                   detail::identity_descriptor(s.automaton(), LiftKind::path_dependent, 0));
}

struct EstimateOptions {
    BisectionOptions bisection;
    LiftLimits limits;
    /// Longest closed walk tried for cycle_lower; 0 skips the pass.
    std::size_t cycle_len = 8;
    bool certificate = true;
    double eig_tol = 1e-6;
    /// Bisection width used before testing extremality.
    double certificate_tol = 1e-9;
};

struct CjsrEstimate {
    Method method = Method::plain;
    std::optional<std::size_t> parameter;
    double abs_tol = 0.0;
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    double cjsr_upper = 0.0;
    double cjsr_lower_certified = 0.0;
    double accuracy_factor = 1.0;
    std::optional<double> cycle_lower;
    std::vector<Label> cycle_lower_labels;
    std::optional<ExactnessCertificate> exact;
    QuadraticMultinorm witness;

    std::size_t lifted_nodes = 0;
    std::size_t lifted_edges = 0;
    std::size_t lifted_dimension = 0;
    std::size_t probes = 0;
    std::size_t indeterminate = 0;
    bool widened = false;
    double seconds = 0.0;
    double solve_seconds = 0.0;
    /// Tight edges of the last certificate attempt, for failed attempts.
    std::vector<std::size_t> tight_edges;
    std::string diagnostics;
};

/// Builds the system the method solves.
inline LiftedSystem lift_for(const ConstrainedSystem& s, Method m, std::size_t parameter, const LiftLimits& limits)
{
    switch (m) {
    case Method::plain: {
        LiftedSystem l;
        l.system = s;
        l.descriptor = detail::identity_descriptor(s.automaton(), LiftKind::path_dependent, 0);
        return l;
    }
    case Method::t_product: return t_product_lift(s, parameter, limits);
    case Method::path_dependent: return path_dependent_lift(s, parameter, limits);
    case Method::d_lift: return d_lift_system(s, parameter, limits);
    case Method::kronecker: return kronecker_lift_system(s, limits);
    }
    throw InputError("unknown method");
}

inline CjsrEstimate estimate(const ConstrainedSystem& s, Method method, std::size_t parameter = 0,
                             const EstimateOptions& opts = {})
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    if (method == Method::t_product && parameter < 1)
        throw InputError("tproduct needs T >= 1");
    if (method == Method::d_lift && parameter < 1)
        throw InputError("dlift needs d >= 1");

    CjsrEstimate est;
    est.method = method;
    if (method_takes_parameter(method))
        est.parameter = parameter;
    est.abs_tol = opts.bisection.abs_tol;
    est.accuracy_factor = accuracy_factor(method, s.dimension(), parameter);

    if (opts.cycle_len > 0) {
        try {
            for (auto& c : cycles_up_to(s.automaton(), opts.cycle_len, opts.limits.enumeration)) {
                const double v = cycle_lower_bound(s, c);
                if (!est.cycle_lower || v > *est.cycle_lower) {
                    est.cycle_lower = v;
                    est.cycle_lower_labels.clear();
                    for (auto e : c.path.edges)
                        est.cycle_lower_labels.push_back(s.automaton().edge(e).label);
                }
            }
        } catch (const CapExceeded&) {
            // a partial pass still gives a valid lower bound
        }
    }

    const auto lifted = lift_for(s, method, parameter, opts.limits);
    const auto& ls = lifted.system;
    const double expo = static_cast<double>(lifted.exponent);
    est.lifted_nodes = ls.automaton().num_nodes();
    est.lifted_edges = ls.automaton().num_edges();
    est.lifted_dimension = ls.dimension();

    auto bopts = opts.bisection;
    if (est.cycle_lower)
        bopts.lower_hint = std::max(bopts.lower_hint, std::pow(*est.cycle_lower, expo));
    const auto t1 = clock::now();
    auto br = bisect_gamma_star(ls, bopts);

    est.gamma_lo = br.gamma_lo;
    est.gamma_hi = br.gamma_hi;
    est.witness = br.witness;
    est.probes = br.probes;
    est.indeterminate = br.indeterminate;
    est.widened = br.widened;
    est.diagnostics = br.diagnostics;
    est.cjsr_upper = std::pow(br.gamma_hi, 1.0 / expo);
    est.cjsr_lower_certified = est.cjsr_upper / est.accuracy_factor;

    if (opts.certificate && br.gamma_hi > 0.0) {
        // a narrower bracket and a centered witness leave only the forced
        // constraints tight
        auto fine = bopts;
        fine.abs_tol = std::min(opts.certificate_tol, bopts.abs_tol);
        QuadraticMultinorm w = br.witness;
        double g = br.gamma_hi;
        try {
            auto fb = refine_bisection(ls, br, fine);
            w = fb.witness;
            g = fb.gamma_hi;
            if (auto c = centered_multinorm(ls, g, fine.feasibility)) {
                const double gv = multinorm_value(ls, *c);
                if (gv <= g * (1.0 + 1e-9)) {
                    w = std::move(*c);
                    g = gv;
                }
            }
        } catch (const EstimationFailure&) {
        }
        est.tight_edges = tight_edges(ls, w, g, opts.eig_tol);
        est.exact = extremality_certificate(ls, w, g, opts.eig_tol, s, lifted.descriptor);
    }

    const auto t2 = clock::now();
    est.solve_seconds = std::chrono::duration<double>(t2 - t1).count();
    est.seconds = std::chrono::duration<double>(t2 - t0).count();
    return est;
}

} // namespace cjsr

#endif
