#ifndef CJSR_IO_HPP
#define CJSR_IO_HPP

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <cjsr/errors.hpp>
#include <cjsr/estimator.hpp>
#include <cjsr/lifts.hpp>
#include <cjsr/switched_system.hpp>

namespace cjsr::io {

using nlohmann::json;

inline constexpr int schema_version = 1;

namespace detail {

inline const json& field(const json& j, const char* name)
{
    auto it = j.find(name);
    if (it == j.end())
        throw ParseError(std::string("missing field '") + name + "'");
    return *it;
}

inline double number(const json& j, const std::string& where)
{
    if (!j.is_number())
        throw ParseError(where + " is not a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        throw InputError(where + " is not finite");
    return v;
}

inline std::string format_double(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace detail

/// Parses a system file:
///   {"schema": 1, "dimension": n, "modes": {"1": [[...], ...], ...},
///    "nodes": ["a", ...], "edges": [["a", "b", 1], ...]}
///
/// Structural problems (bad JSON, wrong types, missing fields) raise
/// ParseError; well-formed but invalid content raises InputError.
inline ConstrainedSystem parse_system(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ParseError("system file must be a JSON object");
    if (auto it = j.find("schema"); it != j.end() && (!it->is_number_integer() || it->get<int>() != schema_version))
        throw ParseError("unsupported schema version");

    const auto& jdim = detail::field(j, "dimension");
    if (!jdim.is_number_integer() || jdim.get<long long>() < 1)
        throw ParseError("'dimension' must be a positive integer");
    const auto n = static_cast<Eigen::Index>(jdim.get<long long>());

    const auto& jmodes = detail::field(j, "modes");
    if (!jmodes.is_object() || jmodes.empty())
        throw ParseError("'modes' must be a nonempty object");
    std::vector<std::optional<Matrix>> slots(jmodes.size());
    for (const auto& [key, rows] : jmodes.items()) {
        std::size_t label = 0;
        const bool digits = !key.empty() && key.size() < 10 &&
                            std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; });
        if (digits && key[0] != '0')
            label = std::stoul(key);
        if (label < 1 || label > slots.size())
            throw InputError("mode keys must be the decimal labels 1.." + std::to_string(slots.size()) + ", got '" +
                             key + "'");
        const std::string where = "mode " + key;
        if (!rows.is_array() || rows.empty())
            throw ParseError(where + " must be a nonempty array of rows");
        const auto nr = static_cast<Eigen::Index>(rows.size());
        const auto nc = rows[0].is_array() ? static_cast<Eigen::Index>(rows[0].size()) : 0;
        Matrix m(nr, nc);
        for (Eigen::Index r = 0; r < nr; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            if (!row.is_array())
                throw ParseError(where + " row " + std::to_string(r + 1) + " is not an array");
            if (static_cast<Eigen::Index>(row.size()) != nc)
                throw InputError(where + " is not rectangular (row " + std::to_string(r + 1) + ")");
            for (Eigen::Index c = 0; c < nc; ++c)
                m(r, c) = detail::number(row[static_cast<std::size_t>(c)], where + " entry");
        }
        if (nr != nc)
            throw InputError(where + " is not square (" + std::to_string(nr) + "x" + std::to_string(nc) + ")");
        if (nr != n)
            throw InputError(where + " has dimension " + std::to_string(nr) + ", expected " + std::to_string(n));
        slots[label - 1] = std::move(m);
    }
    std::vector<Matrix> mats;
    for (auto& s : slots)
        mats.push_back(std::move(*s));

    const auto& jnodes = detail::field(j, "nodes");
    if (!jnodes.is_array())
        throw ParseError("'nodes' must be an array");
    std::vector<std::string> nodes;
    for (const auto& v : jnodes) {
        if (!v.is_string())
            throw ParseError("node names must be strings");
        nodes.push_back(v.get<std::string>());
    }

    const auto& jedges = detail::field(j, "edges");
    if (!jedges.is_array())
        throw ParseError("'edges' must be an array");
    std::vector<std::tuple<std::string, std::string, Label>> edges;
    for (const auto& e : jedges) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[1].is_string() || !e[2].is_number_integer())
            throw ParseError("each edge must be [source, destination, label]");
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<Label>());
    }
    const auto num_labels = static_cast<int>(mats.size());
    auto automaton = Automaton::from_names(nodes, edges, num_labels);
    return ConstrainedSystem(std::move(automaton), MatrixSet(std::move(mats)));
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ConstrainedSystem load_system(const std::string& path) { return parse_system(read_file(path)); }

/// Canonical text: fixed key order, nodes in index order, 17 significant
/// digits per entry. parse_system(serialize_system(s)) reproduces s exactly.
inline std::string serialize_system(const ConstrainedSystem& s)
{
    const auto& a = s.automaton();
    const auto n = static_cast<Eigen::Index>(s.dimension());
    std::ostringstream os;
    os << "{\n  \"schema\": " << schema_version << ",\n  \"dimension\": " << n << ",\n  \"modes\": {";
    for (std::size_t l = 0; l < s.matrices().size(); ++l) {
        const auto& m = s.matrices().matrices()[l];
        os << (l ? ",\n" : "\n") << "    \"" << l + 1 << "\": [";
        for (Eigen::Index r = 0; r < n; ++r) {
            os << (r ? ", [" : "[");
            for (Eigen::Index c = 0; c < n; ++c)
                os << (c ? ", " : "") << detail::format_double(m(r, c));
            os << "]";
        }
        os << "]";
    }
    os << "\n  },\n  \"nodes\": [";
    for (std::size_t v = 0; v < a.num_nodes(); ++v)
        os << (v ? ", " : "") << json(a.node_name(v)).dump();
    os << "],\n  \"edges\": [";
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        const auto& ed = a.edge(e);
        os << (e ? ",\n    " : "\n    ") << "[" << json(a.node_name(ed.source)).dump() << ", "
           << json(a.node_name(ed.target)).dump() << ", " << ed.label << "]";
    }
    os << (a.num_edges() ? "\n  ]\n}\n" : "]\n}\n");
    return os.str();
}

/// "sha256:<hex>" of the canonical serialization.
inline std::string system_digest(const ConstrainedSystem& s)
{
    const std::string text = serialize_system(s);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    std::ostringstream os;
    os << "sha256:" << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i)
        os << std::setw(2) << static_cast<int>(md[i]);
    return os.str();
}

inline json labels_json(const std::vector<Label>& labels) { return json(labels); }

inline json estimate_to_json(const CjsrEstimate& e)
{
    json j;
    j["method"] = to_string(e.method);
    j["parameter"] = e.parameter ? json(*e.parameter) : json(nullptr);
    j["abs_tol"] = e.abs_tol;
    j["gamma_star_interval"] = {e.gamma_lo, e.gamma_hi};
    j["cjsr_upper"] = e.cjsr_upper;
    j["cjsr_lower_certified"] = e.cjsr_lower_certified;
    j["accuracy_factor"] = e.accuracy_factor;
    if (e.cycle_lower) {
        j["cycle_lower"] = *e.cycle_lower;
        j["cycle_lower_labels"] = labels_json(e.cycle_lower_labels);
    } else {
        j["cycle_lower"] = nullptr;
        j["cycle_lower_labels"] = nullptr;
    }
    if (e.exact) {
        j["exact"] = {
            {"cjsr_exact", e.exact->cjsr_exact},
            {"labels", labels_json(e.exact->base_labels)},
            {"solved_cycle_edges", e.exact->cycle.path.edges},
            {"eigenvalue_tolerance", e.exact->eigenvalue_tolerance},
        };
    } else {
        j["exact"] = nullptr;
    }
    j["tight_edges"] = e.tight_edges;
    j["lift_sizes"] = {{"nodes", e.lifted_nodes}, {"edges", e.lifted_edges}, {"dimension", e.lifted_dimension}};
    j["probes"] = e.probes;
    j["indeterminate_probes"] = e.indeterminate;
    j["widened"] = e.widened;
    j["seconds"] = e.seconds;
    j["diagnostics"] = e.diagnostics;
    return j;
}

inline bool record_less(const CjsrEstimate& a, const CjsrEstimate& b)
{
    return std::make_tuple(static_cast<int>(a.method), a.parameter.value_or(0)) <
           std::make_tuple(static_cast<int>(b.method), b.parameter.value_or(0));
}

inline json report_json(const std::string& digest, std::vector<CjsrEstimate> records)
{
    std::stable_sort(records.begin(), records.end(), record_less);
    json j;
    j["schema"] = schema_version;
    j["system_digest"] = digest;
    j["records"] = json::array();
    for (const auto& r : records)
        j["records"].push_back(estimate_to_json(r));
    return j;
}

/// Backmap of a lift: where each lifted node and edge comes from.
inline json backmap_json(const LiftedSystem& l, const ConstrainedSystem& base)
{
    const auto& d = l.descriptor;
    json j;
    j["schema"] = schema_version;
    j["kind"] = to_string(d.kind);
    j["parameter"] = d.parameter ? json(*d.parameter) : json(nullptr);
    j["exponent"] = l.exponent;
    auto origin = [&](const Origin& o) {
        std::vector<Label> labels;
        for (auto e : o.base_edges)
            labels.push_back(base.automaton().edge(e).label);
        return json{{"base_node", base.automaton().node_name(o.base_node)},
                    {"base_edges", o.base_edges},
                    {"labels", labels}};
    };
    j["nodes"] = json::array();
    for (std::size_t v = 0; v < d.node_backmap.size(); ++v)
        j["nodes"].push_back({{"node", l.system.automaton().node_name(v)}, {"origin", origin(d.node_backmap[v])}});
    j["edges"] = json::array();
    for (std::size_t e = 0; e < d.edge_backmap.size(); ++e)
        j["edges"].push_back({{"edge", e}, {"origin", origin(d.edge_backmap[e])}});
    return j;
}

struct CompareRow {
    Method method = Method::plain;
    std::size_t parameter = 0;
    std::optional<CjsrEstimate> estimate;
    std::string error;
};

/// Comparison table; failed rows keep their method and parameter and carry
/// the message in the error column.
inline void write_csv(std::ostream& os, const std::vector<CompareRow>& rows)
{
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"')
                q += '"';
            q += (c == '\n' || c == '\r') ? ' ' : c;
        }
        return q + "\"";
    };
    os << "method,param,nodes,edges,lifted_dim,seconds,upper,certified_lower,cycle_lower,error\n";
    for (const auto& r : rows) {
        os << to_string(r.method) << ',';
        if (method_takes_parameter(r.method))
            os << r.parameter;
        os << ',';
        if (r.estimate) {
            const auto& e = *r.estimate;
            os << e.lifted_nodes << ',' << e.lifted_edges << ',' << e.lifted_dimension << ','
               << detail::format_double(e.seconds) << ',' << detail::format_double(e.cjsr_upper) << ','
               << detail::format_double(e.cjsr_lower_certified) << ','
               << (e.cycle_lower ? detail::format_double(*e.cycle_lower) : std::string()) << ",\n";
        } else {
            os << ",,,,,,," << quote(r.error) << '\n';
        }
    }
}

/// "plain,tproduct:1-7,pathdep:0-6,dlift:2" into (method, parameter) pairs.
inline std::vector<std::pair<Method, std::size_t>> parse_methods_spec(const std::string& spec)
{
    std::vector<std::pair<Method, std::size_t>> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        if (item.empty())
            continue;
        const auto colon = item.find(':');
        Method m;
        try {
            m = parse_method(item.substr(0, colon));
        } catch (const InputError& e) {
            throw ParseError(e.what());
        }
        if (!method_takes_parameter(m)) {
            if (colon != std::string::npos)
                throw ParseError(std::string(to_string(m)) + " takes no parameter");
            out.emplace_back(m, 0);
            continue;
        }
        if (colon == std::string::npos)
            throw ParseError(std::string(to_string(m)) + " needs a parameter, e.g. " + to_string(m) + ":2");
        const std::string range = item.substr(colon + 1);
        const auto dash = range.find('-');
        std::size_t lo = 0, hi = 0;
        try {
            std::size_t used = 0;
            lo = std::stoul(range.substr(0, dash), &used);
            if (used != range.substr(0, dash).size())
                throw std::invalid_argument("trailing characters");
            hi = lo;
            if (dash != std::string::npos) {
                const auto tail = range.substr(dash + 1);
                hi = std::stoul(tail, &used);
                if (used != tail.size())
                    throw std::invalid_argument("trailing characters");
            }
        } catch (const std::logic_error&) {
            throw ParseError("bad parameter range '" + range + "'");
        }
        if (hi < lo)
            throw ParseError("empty parameter range '" + range + "'");
        for (std::size_t p = lo; p <= hi; ++p)
            out.emplace_back(m, p);
    }
    if (out.empty())
        throw ParseError("methods spec is empty");
    return out;
}

/// Enumeration caps, with CJSR_MAX_PATHS overriding the path cap.
inline EnumerationLimits limits_from_env()
{
    EnumerationLimits l;
    if (const char* v = std::getenv("CJSR_MAX_PATHS")) {
        char* end = nullptr;
        const unsigned long long n = std::strtoull(v, &end, 10);
        if (end == v || *end != '\0' || n == 0)
            throw ParseError(std::string("CJSR_MAX_PATHS must be a positive integer, got '") + v + "'");
        l.max_paths = static_cast<std::size_t>(n);
    }
    return l;
}

} // namespace cjsr::io

#endif
