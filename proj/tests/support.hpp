#ifndef CJSR_TESTS_SUPPORT_HPP
#define CJSR_TESTS_SUPPORT_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <cjsr/cjsr.hpp>

namespace cjsr::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows)
{
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row)
            m(r, c++) = v;
        ++r;
    }
    return m;
}

/// a -> b (label 1), b -> a (label 2).
inline Automaton two_cycle() { return Automaton::from_names({"a", "b"}, {{"a", "b", 1}, {"b", "a", 2}}, 2); }

/// Scalar modes 2 and 1/8 on the two-node cycle; CJSR 1/2.
inline ConstrainedSystem scalar_cycle()
{
    return ConstrainedSystem(two_cycle(), MatrixSet({mat({{2.0}}), mat({{0.125}})}));
}

/// Mode 1 at most twice in a row.
inline Automaton no_three_ones()
{
    return Automaton::from_names({"a", "b", "c"},
                                 {{"a", "a", 2}, {"a", "b", 1}, {"b", "a", 2}, {"b", "c", 1}, {"c", "a", 2}}, 2);
}

inline Automaton two_node()
{
    return Automaton::from_names({"a", "b"}, {{"a", "a", 1}, {"a", "b", 3}, {"b", "b", 2}, {"b", "a", 4}}, 4);
}

/// Allowed successor modes after each mode in the dropout example.
inline const std::map<int, std::vector<int>>& dropout_rules()
{
    static const std::map<int, std::vector<int>> rules{{1, {1, 2, 3, 4}}, {2, {1, 3}}, {3, {1, 2}}, {4, {1}}};
    return rules;
}

inline std::vector<Matrix> dropout_matrices()
{
    return {mat({{0.94, 0.56}, {-0.35, 0.73}}), mat({{0.94, 0.56}, {0.14, 0.73}}),
            mat({{0.94, 0.56}, {-0.35, 0.46}}), mat({{0.94, 0.56}, {0.14, 0.46}})};
}

/// Nodes keyed by the last mode; edge v -> w carries mode w.
inline ConstrainedSystem dropout()
{
    std::vector<std::tuple<std::string, std::string, Label>> edges;
    for (const auto& [v, ws] : dropout_rules())
        for (int w : ws)
            edges.emplace_back(std::to_string(v), std::to_string(w), w);
    return ConstrainedSystem(Automaton::from_names({"1", "2", "3", "4"}, edges, 4), MatrixSet(dropout_matrices()));
}

/// The extremal cycle of the dropout system, as a label word.
inline const std::vector<Label>& dropout_cycle()
{
    static const std::vector<Label> c{2, 3, 1, 1, 1, 1, 2, 1};
    return c;
}

/// One node with `n` self-loops labelled 1..n.
inline Automaton complete_one_node(int n)
{
    std::vector<Edge> edges;
    for (int l = 1; l <= n; ++l)
        edges.push_back({0, 0, l});
    return Automaton({"x"}, edges, n);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    bool coin(double p) { return uniform(0.0, 1.0) < p; }

    Matrix matrix(Eigen::Index n)
    {
        Matrix m(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c)
                m(r, c) = uniform(-1.0, 1.0);
        return m;
    }

    Vector vector(Eigen::Index n)
    {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = uniform(-1.0, 1.0);
        return v;
    }

    /// Strongly connected: a Hamiltonian cycle plus random extra edges.
    Automaton automaton(int nodes, int labels, double extra = 0.4)
    {
        std::vector<std::string> names;
        for (int v = 0; v < nodes; ++v)
            names.push_back("v" + std::to_string(v));
        std::vector<Edge> edges;
        for (int v = 0; v < nodes; ++v)
            edges.push_back({static_cast<std::size_t>(v), static_cast<std::size_t>((v + 1) % nodes),
                             integer(1, labels)});
        for (int v = 0; v < nodes; ++v)
            for (int w = 0; w < nodes; ++w)
                for (int l = 1; l <= labels; ++l) {
                    Edge e{static_cast<std::size_t>(v), static_cast<std::size_t>(w), l};
                    bool dup = false;
                    for (const auto& f : edges)
                        dup = dup || (f.source == e.source && f.target == e.target && f.label == e.label);
                    if (!dup && coin(extra / labels))
                        edges.push_back(e);
                }
        return Automaton(names, edges, labels);
    }

    /// Random system, entries uniform in [-1, 1], rescaled so that the
    /// largest spectral norm is 1.
    ConstrainedSystem system(Eigen::Index n, int nodes, int labels = 2)
    {
        std::vector<Matrix> mats;
        double top = 0.0;
        for (int l = 0; l < labels; ++l) {
            mats.push_back(matrix(n));
            top = std::max(top, spectral_norm(mats.back()));
        }
        for (auto& m : mats)
            m /= top;
        return ConstrainedSystem(automaton(nodes, labels), MatrixSet(mats));
    }

private:
    std::mt19937_64 gen_;
};

/// Random small systems used by the property and acceptance checks:
/// n = 2, two or three nodes, two modes.
inline std::vector<ConstrainedSystem> random_systems(std::size_t count, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<ConstrainedSystem> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(rng.system(2, rng.integer(2, 3)));
    return out;
}

/// Base bracket over the lengths a T-product lift sees: products of length
/// T k (k <= max_k) and closed walks of length T l (l <= max_cycle_len).
inline CjsrBracket bracket_at_multiples(const ConstrainedSystem& s, std::size_t T, std::size_t max_k,
                                        std::size_t max_cycle_len)
{
    CjsrBracket b;
    for (std::size_t k = 1; k <= max_k; ++k)
        b.upper = std::min(b.upper, rho_hat_k(s, T * k));
    for (const auto& c : cycles_up_to(s.automaton(), T * max_cycle_len))
        if (c.length() % T == 0)
            b.lower = std::max(b.lower, cycle_lower_bound(s, c));
    return b;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

} // namespace cjsr::testing

#endif
