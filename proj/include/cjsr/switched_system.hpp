#ifndef CJSR_SWITCHED_SYSTEM_HPP
#define CJSR_SWITCHED_SYSTEM_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <cjsr/automaton.hpp>
#include <cjsr/errors.hpp>
#include <cjsr/linalg.hpp>

namespace cjsr {

/// One square matrix per label; label l is stored at index l - 1.
class MatrixSet {
public:
    MatrixSet() = default;

    explicit MatrixSet(std::vector<Matrix> matrices) : matrices_(std::move(matrices))
    {
        if (matrices_.empty())
            throw InputError("matrix set is empty");
        dim_ = static_cast<std::size_t>(matrices_.front().rows());
        if (dim_ == 0)
            throw InputError("matrices must have dimension at least 1");
        for (std::size_t i = 0; i < matrices_.size(); ++i) {
            const auto& m = matrices_[i];
            if (m.rows() != m.cols())
                throw InputError("matrix for mode " + std::to_string(i + 1) + " is not square");
            if (static_cast<std::size_t>(m.rows()) != dim_)
                throw InputError("matrix for mode " + std::to_string(i + 1) + " has dimension " +
                                 std::to_string(m.rows()) + ", expected " + std::to_string(dim_));
            if (!m.allFinite())
                throw InputError("matrix for mode " + std::to_string(i + 1) + " has non-finite entries");
        }
    }

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return matrices_.size(); }
    const Matrix& operator[](Label l) const { return matrices_.at(static_cast<std::size_t>(l - 1)); }
    const std::vector<Matrix>& matrices() const { return matrices_; }

    MatrixSet scaled(double alpha) const
    {
        MatrixSet out = *this;
        for (auto& m : out.matrices_)
            m *= alpha;
        return out;
    }

private:
    std::vector<Matrix> matrices_;
    std::size_t dim_ = 0;
};

/// An automaton together with the matrix attached to each of its labels.
class ConstrainedSystem {
public:
    ConstrainedSystem() = default;

    ConstrainedSystem(Automaton automaton, MatrixSet matrices)
        : automaton_(std::move(automaton)), matrices_(std::move(matrices))
    {
        if (static_cast<std::size_t>(automaton_.num_labels()) != matrices_.size())
            throw InputError("automaton has " + std::to_string(automaton_.num_labels()) + " labels but " +
                             std::to_string(matrices_.size()) + " matrices were given");
        for (const auto& e : automaton_.edges())
            if (e.label < 1 || e.label > automaton_.num_labels())
                throw InputError("edge label " + std::to_string(e.label) + " has no matrix");
    }

    const Automaton& automaton() const { return automaton_; }
    const MatrixSet& matrices() const { return matrices_; }
    std::size_t dimension() const { return matrices_.dimension(); }

    /// Matrix carried by edge e.
    const Matrix& edge_matrix(std::size_t e) const { return matrices_[automaton_.edge(e).label]; }

    ConstrainedSystem scaled(double alpha) const { return {automaton_, matrices_.scaled(alpha)}; }

private:
    Automaton automaton_;
    MatrixSet matrices_;
};

/// A_p = A_{sigma(T)} ... A_{sigma(1)}; identity for the empty path.
inline Matrix product_along_path(const ConstrainedSystem& s, const Path& p)
{
    const auto n = static_cast<Eigen::Index>(s.dimension());
    Matrix prod = Matrix::Identity(n, n);
    for (auto e : p.edges)
        prod = s.edge_matrix(e) * prod;
    return prod;
}

/// Product along a label word read left to right (first label acts first).
inline Matrix product_of_labels(const MatrixSet& m, const std::vector<Label>& labels)
{
    const auto n = static_cast<Eigen::Index>(m.dimension());
    Matrix prod = Matrix::Identity(n, n);
    for (auto l : labels)
        prod = m[l] * prod;
    return prod;
}

struct RhoHatResult {
    double value = 0.0;
    Path witness;
};

/// max over accepted length-k paths of ||A_p||_2^{1/k}.
///
/// Depth-first over the path tree with one stored prefix product per depth;
/// the norm of a product does not split over its factors, so every leaf is
/// visited.
inline RhoHatResult rho_hat_k_with_witness(const ConstrainedSystem& s, std::size_t k,
                                           const EnumerationLimits& limits = {})
{
    if (k < 1)
        throw InputError("k must be at least 1");
    const auto& a = s.automaton();
    const auto n = static_cast<Eigen::Index>(s.dimension());
    std::vector<Matrix> prefix(k + 1, Matrix::Identity(n, n));
    std::vector<std::size_t> edges;
    edges.reserve(k);
    std::size_t count = 0;
    RhoHatResult best;
    double best_norm = -1.0;

    std::function<void(std::size_t)> extend = [&](std::size_t at) {
        const auto depth = edges.size();
        if (depth == k) {
            if (++count > limits.max_paths)
                throw CapExceeded("path enumeration", limits.max_paths);
            const double nrm = spectral_norm(prefix[k]);
            if (nrm > best_norm) {
                best_norm = nrm;
                best.witness.edges = edges;
                best.witness.source = a.edge(edges.front()).source;
                best.witness.target = at;
            }
            return;
        }
        for (auto e : a.out_edges(at)) {
            prefix[depth + 1].noalias() = s.edge_matrix(e) * prefix[depth];
            edges.push_back(e);
            extend(a.edge(e).target);
            edges.pop_back();
        }
    };

    for (std::size_t v = 0; v < a.num_nodes(); ++v)
        extend(v);
    best.value = best_norm <= 0.0 ? 0.0 : std::pow(best_norm, 1.0 / static_cast<double>(k));
    return best;
}

inline double rho_hat_k(const ConstrainedSystem& s, std::size_t k, const EnumerationLimits& limits = {})
{
    return rho_hat_k_with_witness(s, k, limits).value;
}

/// rho(A_c)^{1/T}; a lower bound on the CJSR for any cycle c.
inline double cycle_lower_bound(const ConstrainedSystem& s, const Cycle& c)
{
    if (c.length() < 1 || c.path.source != c.path.target)
        throw InputError("cycle_lower_bound needs a closed path of length >= 1");
    const double rho = spectral_radius(product_along_path(s, c.path));
    return std::pow(rho, 1.0 / static_cast<double>(c.length()));
}

/// Lower bound from a label word read as a cycle; the word need not be
/// checked against the automaton.
inline double label_cycle_value(const MatrixSet& m, const std::vector<Label>& labels)
{
    if (labels.empty())
        throw InputError("label cycle must be nonempty");
    return std::pow(spectral_radius(product_of_labels(m, labels)), 1.0 / static_cast<double>(labels.size()));
}

struct CjsrBracket {
    double lower = 0.0;
    std::optional<Cycle> lower_witness;
    double upper = std::numeric_limits<double>::infinity();
    std::size_t upper_k = 0;
    Path upper_witness;
    bool partial = false;
    std::string partial_reason;
};

/// Brute-force CJSR bracket: best closed-walk lower bound and best
/// rho_hat_k upper bound. A cap hit stops that side early and marks the
/// bracket partial.
inline CjsrBracket bracket(const ConstrainedSystem& s, std::size_t max_k, std::size_t max_cycle_len,
                           const EnumerationLimits& limits = {})
{
    if (max_k < 1 || max_cycle_len < 1)
        throw InputError("bracket parameters must be at least 1");
    CjsrBracket b;
    try {
        for (auto& c : cycles_up_to(s.automaton(), max_cycle_len, limits)) {
            const double v = cycle_lower_bound(s, c);
            if (!b.lower_witness || v > b.lower) {
                b.lower = v;
                b.lower_witness = std::move(c);
            }
        }
    } catch (const CapExceeded& e) {
        b.partial = true;
        b.partial_reason = e.what();
    }
    for (std::size_t k = 1; k <= max_k; ++k) {
        try {
            auto r = rho_hat_k_with_witness(s, k, limits);
            if (r.value < b.upper) {
                b.upper = r.value;
                b.upper_k = k;
                b.upper_witness = std::move(r.witness);
            }
        } catch (const CapExceeded& e) {
            b.partial = true;
            if (!b.partial_reason.empty())
                b.partial_reason += "; ";
            b.partial_reason += e.what();
            break;
        }
    }
    return b;
}

} // namespace cjsr

#endif
