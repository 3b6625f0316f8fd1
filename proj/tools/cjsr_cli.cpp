// cjsr: command-line front end for the CJSR estimator.
//
// Exit codes: 0 ok, 1 invalid system, 2 parse or usage error,
// 3 estimation failure, 4 enumeration or lift cap.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <cjsr/cjsr.hpp>
#include <cjsr/io.hpp>

namespace {

enum Exit { ok = 0, invalid_system = 1, usage = 2, estimation_failed = 3, cap_hit = 4 };

struct Failure {
    int code;
    std::string message;
};

std::string labels_text(const std::vector<cjsr::Label>& labels)
{
    std::string s = "(";
    for (std::size_t i = 0; i < labels.size(); ++i)
        s += (i ? "," : "") + std::to_string(labels[i]);
    return s + ")";
}

std::vector<cjsr::Label> labels_of(const cjsr::ConstrainedSystem& s, const cjsr::Path& p)
{
    std::vector<cjsr::Label> out;
    for (auto e : p.edges)
        out.push_back(s.automaton().edge(e).label);
    return out;
}

std::string fixed(double v, int digits = 9)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

/// Loads and validates; throws Failure with the documented exit code.
cjsr::ConstrainedSystem load_valid(const std::string& path)
{
    cjsr::ConstrainedSystem s;
    try {
        s = cjsr::io::load_system(path);
    } catch (const cjsr::ParseError& e) {
        throw Failure{usage, e.what()};
    } catch (const cjsr::InputError& e) {
        throw Failure{invalid_system, e.what()};
    }
    auto report = cjsr::validate(s.automaton());
    if (!report.ok()) {
        std::string msg = "invalid system:";
        for (const auto& p : report.problems)
            msg += "\n  " + p;
        throw Failure{invalid_system, msg};
    }
    return s;
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Failure{usage, "cannot write '" + path + "'"};
    out << text;
}

cjsr::EstimateOptions estimate_options(double tol, bool certificate)
{
    cjsr::EstimateOptions o;
    o.bisection.abs_tol = tol;
    o.limits.enumeration = cjsr::io::limits_from_env();
    o.certificate = certificate;
    return o;
}

int cmd_validate(const std::string& path)
{
    cjsr::ConstrainedSystem s;
    try {
        s = cjsr::io::load_system(path);
    } catch (const cjsr::ParseError& e) {
        throw Failure{usage, e.what()};
    } catch (const cjsr::InputError& e) {
        std::cout << "invalid: " << e.what() << "\n";
        return invalid_system;
    }
    const auto& a = s.automaton();
    auto report = cjsr::validate(a);
    std::cout << "nodes: " << a.num_nodes() << ", edges: " << a.num_edges() << ", labels: " << a.num_labels()
              << ", dimension: " << s.dimension() << "\n";
    std::cout << "strongly connected: " << (report.strongly_connected ? "yes" : "no") << "\n";
    if (report.ok()) {
        std::cout << "valid\n";
        return ok;
    }
    for (const auto& p : report.problems)
        std::cout << "invalid: " << p << "\n";
    return invalid_system;
}

int cmd_estimate(const std::string& path, const std::string& method_name, std::size_t param, double tol,
                 const std::string& out, bool certificate)
{
    auto s = load_valid(path);
    cjsr::Method m;
    try {
        m = cjsr::parse_method(method_name);
    } catch (const cjsr::InputError& e) {
        throw Failure{usage, e.what()};
    }
    cjsr::CjsrEstimate e;
    try {
        e = cjsr::estimate(s, m, param, estimate_options(tol, certificate));
    } catch (const cjsr::CapExceeded& x) {
        throw Failure{cap_hit, x.what()};
    } catch (const cjsr::EstimationFailure& x) {
        throw Failure{estimation_failed, x.what()};
    } catch (const cjsr::InputError& x) {
        throw Failure{usage, x.what()};
    }
    std::cout << "CJSR ∈ [" << fixed(e.cjsr_lower_certified) << ", " << fixed(e.cjsr_upper)
              << "] (cycle lower: " << (e.cycle_lower ? fixed(*e.cycle_lower) : "none")
              << ", exact: " << (e.exact ? fixed(e.exact->cjsr_exact) : "none") << ")\n";
    if (e.exact)
        std::cout << "extremal cycle labels: " << labels_text(e.exact->base_labels) << "\n";
    if (e.widened)
        std::cout << "warning: interval widened after indeterminate probes (" << e.diagnostics << ")\n";
    if (!out.empty())
        write_text(out, cjsr::io::report_json(cjsr::io::system_digest(s), {e}).dump(2) + "\n");
    return ok;
}

int cmd_bracket(const std::string& path, std::size_t max_k, std::size_t max_cycle_len)
{
    auto s = load_valid(path);
    cjsr::CjsrBracket b;
    try {
        b = cjsr::bracket(s, max_k, max_cycle_len, cjsr::io::limits_from_env());
    } catch (const cjsr::InputError& e) {
        throw Failure{usage, e.what()};
    }
    std::cout << std::setprecision(12);
    std::cout << "CJSR ∈ [" << b.lower << ", " << b.upper << "]\n";
    if (b.lower_witness)
        std::cout << "lower witness cycle labels: " << labels_text(labels_of(s, b.lower_witness->path)) << "\n";
    if (b.upper_k > 0)
        std::cout << "upper from k = " << b.upper_k << ", path labels "
                  << labels_text(labels_of(s, b.upper_witness)) << "\n";
    if (b.partial) {
        std::cout << "partial: " << b.partial_reason << "\n";
        return cap_hit;
    }
    return ok;
}

int cmd_lift(const std::string& path, const std::string& kind, std::size_t param, const std::string& out,
             std::string backmap)
{
    auto s = load_valid(path);
    cjsr::LiftLimits limits;
    limits.enumeration = cjsr::io::limits_from_env();
    cjsr::LiftedSystem l;
    try {
        if (kind == "tproduct" || kind == "t_product")
            l = cjsr::t_product_lift(s, param, limits);
        else if (kind == "pathdep" || kind == "path_dependent")
            l = cjsr::path_dependent_lift(s, param, limits);
        else if (kind == "dlift" || kind == "d_lift")
            l = cjsr::d_lift_system(s, param, limits);
        else if (kind == "kronecker")
            l = cjsr::kronecker_lift_system(s, limits);
        else
            throw Failure{usage, "unknown lift kind '" + kind + "'"};
    } catch (const cjsr::CapExceeded& e) {
        throw Failure{cap_hit, e.what()};
    } catch (const cjsr::InputError& e) {
        throw Failure{usage, e.what()};
    }
    write_text(out, cjsr::io::serialize_system(l.system));
    if (backmap.empty())
        backmap = out + ".backmap.json";
    write_text(backmap, cjsr::io::backmap_json(l, s).dump(2) + "\n");
    std::cout << "wrote " << out << " (" << l.system.automaton().num_nodes() << " nodes, "
              << l.system.automaton().num_edges() << " edges, dimension " << l.system.dimension() << ") and "
              << backmap << "\n";
    return ok;
}

int cmd_compare(const std::string& path, const std::string& spec, const std::string& csv, double tol,
                std::size_t jobs, bool certificate)
{
    std::vector<std::pair<cjsr::Method, std::size_t>> runs;
    try {
        runs = cjsr::io::parse_methods_spec(spec);
    } catch (const cjsr::ParseError& e) {
        throw Failure{usage, e.what()};
    }
    auto s = load_valid(path);
    const auto opts = estimate_options(tol, certificate);

    std::vector<cjsr::io::CompareRow> rows(runs.size());
    std::vector<int> codes(runs.size(), ok);
    std::atomic<std::size_t> next{0};
    std::mutex print;
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            auto& r = rows[i];
            r.method = runs[i].first;
            r.parameter = runs[i].second;
            try {
                r.estimate = cjsr::estimate(s, r.method, r.parameter, opts);
            } catch (const cjsr::CapExceeded& e) {
                r.error = e.what();
                codes[i] = cap_hit;
            } catch (const std::exception& e) {
                r.error = e.what();
                codes[i] = estimation_failed;
            }
            std::lock_guard<std::mutex> lock(print);
            std::cerr << cjsr::to_string(r.method);
            if (cjsr::method_takes_parameter(r.method))
                std::cerr << ' ' << r.parameter;
            if (r.estimate)
                std::cerr << ": upper " << fixed(r.estimate->cjsr_upper) << " in "
                          << fixed(r.estimate->seconds, 2) << " s\n";
            else
                std::cerr << ": " << r.error << "\n";
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, runs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    std::ostringstream table;
    cjsr::io::write_csv(table, rows);
    if (csv.empty() || csv == "-")
        std::cout << table.str();
    else
        write_text(csv, table.str());

    bool any = false, all_caps = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        any = any || rows[i].estimate.has_value();
        all_caps = all_caps && codes[i] == cap_hit;
    }
    if (any)
        return ok;
    return all_caps ? cap_hit : estimation_failed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Constrained joint spectral radius estimation"};
    app.require_subcommand(1);

    std::string path;
    auto* validate = app.add_subcommand("validate", "Check a system file");
    validate->add_option("system", path, "System JSON file")->required();

    std::string method = "plain", out;
    std::size_t param = 0;
    double tol = 1e-6;
    bool no_cert = false;
    auto* estimate = app.add_subcommand("estimate", "Bisect for a quadratic multinorm and report a CJSR interval");
    estimate->add_option("system", path, "System JSON file")->required();
    estimate->add_option("--method", method, "plain, tproduct, pathdep, dlift or kronecker")->capture_default_str();
    estimate->add_option("--param", param, "T, M or d for tproduct, pathdep, dlift")->capture_default_str();
    estimate->add_option("--tol", tol, "Bisection width")->capture_default_str()->check(CLI::PositiveNumber);
    estimate->add_option("--out", out, "Write a report JSON here");
    estimate->add_flag("--no-certificate", no_cert, "Skip the extremality test");

    std::size_t max_k = 8, max_cycle_len = 8;
    auto* bracket = app.add_subcommand("bracket", "Brute-force bracket from products and cycles");
    bracket->add_option("system", path, "System JSON file")->required();
    bracket->add_option("--max-k", max_k, "Longest product for the upper bound")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    bracket->add_option("--max-cycle-len", max_cycle_len, "Longest cycle for the lower bound")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    std::string kind, backmap;
    auto* lift = app.add_subcommand("lift", "Write a lifted system and its backmap");
    lift->add_option("system", path, "System JSON file")->required();
    lift->add_option("--kind", kind, "tproduct, pathdep, dlift or kronecker")->required();
    lift->add_option("--param", param, "T, M or d")->capture_default_str();
    lift->add_option("--out", out, "Lifted system JSON")->required();
    lift->add_option("--backmap", backmap, "Backmap JSON (default: <out>.backmap.json)");

    std::string spec, csv;
    std::size_t jobs = 1;
    auto* compare = app.add_subcommand("compare", "Run a batch of estimates and tabulate them");
    compare->add_option("system", path, "System JSON file")->required();
    compare->add_option("--methods-spec", spec, "e.g. plain,tproduct:1-7,pathdep:0-6")->required();
    compare->add_option("--csv", csv, "CSV output file (default: stdout)");
    compare->add_option("--tol", tol, "Bisection width")->capture_default_str()->check(CLI::PositiveNumber);
    compare->add_option("--jobs", jobs, "Rows solved concurrently")->capture_default_str()->check(CLI::PositiveNumber);
    compare->add_flag("--no-certificate", no_cert, "Skip the extremality test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*validate)
            return cmd_validate(path);
        if (*estimate)
            return cmd_estimate(path, method, param, tol, out, !no_cert);
        if (*bracket)
            return cmd_bracket(path, max_k, max_cycle_len);
        if (*lift)
            return cmd_lift(path, kind, param, out, backmap);
        if (*compare)
            return cmd_compare(path, spec, csv, tol, jobs, !no_cert);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << "\n";
        return f.code;
    } catch (const cjsr::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const cjsr::CapExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cap_hit;
    } catch (const cjsr::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return invalid_system;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return estimation_failed;
    }
    return usage;
}
