#ifndef CJSR_AUTOMATON_HPP
#define CJSR_AUTOMATON_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <cjsr/errors.hpp>

namespace cjsr {

/// Mode label, 1-based.
using Label = int;

struct Edge {
    std::size_t source;
    std::size_t target;
    Label label;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Bounds on the exponential enumerations. Exceeding a bound is an error,
/// enumeration never truncates silently.
struct EnumerationLimits {
    std::size_t max_paths = 1000000;
    std::size_t max_cycles = 100000;
};

/// A walk through the automaton, stored as edge indices.
struct Path {
    std::size_t source = 0;
    std::size_t target = 0;
    std::vector<std::size_t> edges;

    std::size_t length() const { return edges.size(); }
};

/// Closed path of length >= 1.
struct Cycle {
    Path path;
    bool simple = false;

    std::size_t length() const { return path.length(); }
    std::size_t base() const { return path.source; }
};

struct ValidationReport {
    bool strongly_connected = true;
    std::vector<std::string> problems;

    bool ok() const { return problems.empty(); }
};

/// Labelled directed graph constraining the switching sequences.
///
/// Nodes are opaque strings; they are indexed densely in the order given.
/// The constructor only checks what is needed to index edges (known node
/// names); structural invariants are reported by validate().
class Automaton {
public:
    Automaton() = default;

    Automaton(std::vector<std::string> nodes, std::vector<Edge> edges, int num_labels)
        : nodes_(std::move(nodes)), edges_(std::move(edges)), num_labels_(num_labels)
    {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!index_.emplace(nodes_[i], i).second)
                throw InputError("duplicate node name '" + nodes_[i] + "'");
        }
        out_.resize(nodes_.size());
        in_.resize(nodes_.size());
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const Edge& ed = edges_[e];
            if (ed.source >= nodes_.size() || ed.target >= nodes_.size())
                throw InputError("edge " + std::to_string(e) + " references an unknown node");
            out_[ed.source].push_back(e);
            in_[ed.target].push_back(e);
        }
    }

    /// Convenience constructor from node names.
    static Automaton from_names(std::vector<std::string> nodes,
                                const std::vector<std::tuple<std::string, std::string, Label>>& edges,
                                int num_labels)
    {
        std::unordered_map<std::string, std::size_t> idx;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            idx.emplace(nodes[i], i);
        std::vector<Edge> es;
        es.reserve(edges.size());
        for (const auto& [s, t, l] : edges) {
            auto is = idx.find(s);
            auto it = idx.find(t);
            if (is == idx.end() || it == idx.end())
                throw InputError("edge (" + s + ", " + t + ") references an unknown node");
            es.push_back({is->second, it->second, l});
        }
        return Automaton(std::move(nodes), std::move(es), num_labels);
    }

    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_edges() const { return edges_.size(); }
    int num_labels() const { return num_labels_; }

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t e) const { return edges_.at(e); }
    const std::string& node_name(std::size_t v) const { return nodes_.at(v); }

    std::optional<std::size_t> node_index(const std::string& name) const
    {
        auto it = index_.find(name);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    /// Outgoing edge indices of v, increasing.
    const std::vector<std::size_t>& out_edges(std::size_t v) const { return out_.at(v); }
    const std::vector<std::size_t>& in_edges(std::size_t v) const { return in_.at(v); }

    std::vector<Label> labels_of(const Path& p) const
    {
        std::vector<Label> out;
        out.reserve(p.edges.size());
        for (auto e : p.edges)
            out.push_back(edges_[e].label);
        return out;
    }

private:
    std::vector<std::string> nodes_;
    std::vector<Edge> edges_;
    int num_labels_ = 0;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
};

namespace detail {

inline std::vector<bool> reachable(const Automaton& a, std::size_t start, bool forward)
{
    std::vector<bool> seen(a.num_nodes(), false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        const auto& adj = forward ? a.out_edges(v) : a.in_edges(v);
        for (auto e : adj) {
            auto w = forward ? a.edge(e).target : a.edge(e).source;
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

} // namespace detail

inline bool is_strongly_connected(const Automaton& a)
{
    if (a.num_nodes() == 0)
        return false;
    auto fw = detail::reachable(a, 0, true);
    auto bw = detail::reachable(a, 0, false);
    return std::all_of(fw.begin(), fw.end(), [](bool b) { return b; }) &&
           std::all_of(bw.begin(), bw.end(), [](bool b) { return b; });
}

/// Checks every structural invariant and lists each violation.
inline ValidationReport validate(const Automaton& a)
{
    ValidationReport r;
    if (a.num_nodes() == 0)
        r.problems.push_back("automaton has no nodes");
    if (a.num_labels() < 1)
        r.problems.push_back("number of labels must be positive");
    if (a.num_edges() == 0)
        r.problems.push_back("automaton has no edges");

    std::set<std::tuple<std::size_t, std::size_t, Label>> seen;
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        if (ed.label < 1 || ed.label > a.num_labels())
            r.problems.push_back("edge " + std::to_string(e) + " has label " + std::to_string(ed.label) +
                                 " outside 1.." + std::to_string(a.num_labels()));
        if (!seen.emplace(ed.source, ed.target, ed.label).second)
            r.problems.push_back("duplicate edge (" + a.node_name(ed.source) + ", " + a.node_name(ed.target) +
                                 ", " + std::to_string(ed.label) + ")");
    }
    if (a.num_nodes() > 0 && !is_strongly_connected(a)) {
        r.strongly_connected = false;
        r.problems.push_back("automaton is not strongly connected");
    }
    return r;
}

/// True iff some path, starting anywhere, carries the label sequence.
inline bool accepts(const Automaton& a, const std::vector<Label>& labels)
{
    if (labels.empty())
        throw InputError("label sequence must be nonempty");
    for (auto l : labels)
        if (l < 1 || l > a.num_labels())
            throw InputError("label " + std::to_string(l) + " outside 1.." + std::to_string(a.num_labels()));

    // subset construction over the set of possible current nodes
    std::vector<bool> current(a.num_nodes(), true);
    for (auto l : labels) {
        std::vector<bool> next(a.num_nodes(), false);
        bool any = false;
        for (std::size_t e = 0; e < a.num_edges(); ++e) {
            const auto& ed = a.edge(e);
            if (ed.label == l && current[ed.source]) {
                next[ed.target] = true;
                any = true;
            }
        }
        if (!any)
            return false;
        current = std::move(next);
    }
    return true;
}

/// Calls visit(path) for every path with exactly `length` edges, in
/// lexicographic order of edge indices. Returns the number of paths.
///
/// The path object passed to the visitor is reused between calls.
inline std::size_t for_each_path_of_length(const Automaton& a, std::size_t length,
                                           const std::function<void(const Path&)>& visit,
                                           const EnumerationLimits& limits = {})
{
    if (length < 1)
        throw InputError("path length must be at least 1");
    std::size_t count = 0;
    Path p;
    p.edges.reserve(length);

    std::function<void(std::size_t)> extend = [&](std::size_t at) {
        if (p.edges.size() == length) {
            if (++count > limits.max_paths)
                throw CapExceeded("path enumeration", limits.max_paths);
            p.target = at;
            visit(p);
            return;
        }
        for (auto e : a.out_edges(at)) {
            p.edges.push_back(e);
            extend(a.edge(e).target);
            p.edges.pop_back();
        }
    };

    // lexicographic order over the first edge index, then depth-first
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        p.source = a.edge(e).source;
        p.edges.assign(1, e);
        extend(a.edge(e).target);
    }
    return count;
}

inline std::vector<Path> paths_of_length(const Automaton& a, std::size_t length,
                                         const EnumerationLimits& limits = {})
{
    std::vector<Path> out;
    for_each_path_of_length(a, length, [&](const Path& p) { out.push_back(p); }, limits);
    return out;
}

/// Number of paths of the given length, by dynamic programming (no cap).
inline double count_paths(const Automaton& a, std::size_t length)
{
    std::vector<double> ending(a.num_nodes(), 0.0);
    for (const auto& e : a.edges())
        ending[e.target] += 1.0;
    for (std::size_t k = 1; k < length; ++k) {
        std::vector<double> next(a.num_nodes(), 0.0);
        for (const auto& e : a.edges())
            next[e.target] += ending[e.source];
        ending = std::move(next);
    }
    double total = 0;
    for (auto c : ending)
        total += c;
    return length == 0 ? static_cast<double>(a.num_nodes()) : total;
}

/// Rotates a closed edge sequence to its lexicographically smallest rotation.
inline std::vector<std::size_t> canonical_rotation(const std::vector<std::size_t>& edges)
{
    std::vector<std::size_t> best = edges;
    std::vector<std::size_t> rot = edges;
    for (std::size_t k = 1; k < edges.size(); ++k) {
        std::rotate(rot.begin(), rot.begin() + 1, rot.end());
        if (rot < best)
            best = rot;
    }
    return best;
}

inline Cycle make_cycle(const Automaton& a, std::vector<std::size_t> edges)
{
    if (edges.empty())
        throw InputError("a cycle needs at least one edge");
    Cycle c;
    c.path.edges = std::move(edges);
    c.path.source = a.edge(c.path.edges.front()).source;
    c.path.target = a.edge(c.path.edges.back()).target;
    if (c.path.source != c.path.target)
        throw InputError("edge sequence is not closed");
    for (std::size_t k = 0; k + 1 < c.path.edges.size(); ++k)
        if (a.edge(c.path.edges[k]).target != a.edge(c.path.edges[k + 1]).source)
            throw InputError("edge sequence does not chain");
    std::set<std::size_t> visited;
    c.simple = true;
    for (auto e : c.path.edges)
        if (!visited.insert(a.edge(e).source).second)
            c.simple = false;
    return c;
}

/// All simple cycles of length <= max_length, each reported once in its
/// canonical rotation, sorted by that edge sequence.
inline std::vector<Cycle> simple_cycles_up_to(const Automaton& a, std::size_t max_length,
                                              const EnumerationLimits& limits = {})
{
    if (max_length < 1)
        throw InputError("maximum cycle length must be at least 1");
    std::vector<std::vector<std::size_t>> found;
    std::vector<bool> on_path(a.num_nodes(), false);
    std::vector<std::size_t> stack;

    // each simple cycle is discovered exactly once, from its smallest node
    for (std::size_t s = 0; s < a.num_nodes(); ++s) {
        std::function<void(std::size_t)> dfs = [&](std::size_t v) {
            for (auto e : a.out_edges(v)) {
                auto w = a.edge(e).target;
                if (w < s)
                    continue;
                if (w == s) {
                    stack.push_back(e);
                    if (found.size() >= limits.max_cycles)
                        throw CapExceeded("cycle enumeration", limits.max_cycles);
                    found.push_back(canonical_rotation(stack));
                    stack.pop_back();
                } else if (!on_path[w] && stack.size() + 1 < max_length) {
                    on_path[w] = true;
                    stack.push_back(e);
                    dfs(w);
                    stack.pop_back();
                    on_path[w] = false;
                }
            }
        };
        on_path[s] = true;
        dfs(s);
        on_path[s] = false;
    }
    std::sort(found.begin(), found.end());
    std::vector<Cycle> out;
    out.reserve(found.size());
    for (auto& f : found)
        out.push_back(make_cycle(a, std::move(f)));
    return out;
}

/// All closed walks of length <= max_length (nodes may repeat), each
/// reported once in its canonical rotation, by length then edge sequence.
inline std::vector<Cycle> cycles_up_to(const Automaton& a, std::size_t max_length,
                                       const EnumerationLimits& limits = {})
{
    if (max_length < 1)
        throw InputError("maximum cycle length must be at least 1");
    std::vector<Cycle> out;
    for (std::size_t len = 1; len <= max_length; ++len) {
        for_each_path_of_length(
            a, len,
            [&](const Path& p) {
                if (p.source != p.target || canonical_rotation(p.edges) != p.edges)
                    return;
                if (out.size() >= limits.max_cycles)
                    throw CapExceeded("cycle enumeration", limits.max_cycles);
                out.push_back(make_cycle(a, p.edges));
            },
            limits);
    }
    return out;
}

} // namespace cjsr

#endif
