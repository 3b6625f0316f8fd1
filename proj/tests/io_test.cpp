#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <cjsr/io.hpp>

#include "support.hpp"

using namespace cjsr;
using namespace cjsr::testing;

namespace {

const char* kScalarCycle = R"({"schema": 1, "dimension": 1, "modes": {"1": [[2]], "2": [[0.125]]},
  "nodes": ["a", "b"], "edges": [["a", "b", 1], ["b", "a", 2]]})";

std::string with_modes(const std::string& modes)
{
    return R"({"dimension": 2, "modes": )" + modes + R"(, "nodes": ["a"], "edges": [["a", "a", 1]]})";
}

} // namespace

TEST(Io, ParsesScalarCycle)
{
    auto s = io::parse_system(kScalarCycle);
    EXPECT_EQ(s.dimension(), 1u);
    EXPECT_EQ(s.automaton().num_edges(), 2u);
    EXPECT_DOUBLE_EQ(s.matrices().matrices()[1](0, 0), 0.125);
}

TEST(Io, RoundTripIsExact)
{
    Rng rng(81);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = rng.system(rng.integer(1, 3), rng.integer(1, 4), rng.integer(1, 3));
        const auto text = io::serialize_system(s);
        auto t = io::parse_system(text);
        EXPECT_EQ(io::serialize_system(t), text);
        for (std::size_t l = 0; l < s.matrices().size(); ++l)
            EXPECT_EQ(s.matrices().matrices()[l], t.matrices().matrices()[l]);
        EXPECT_EQ(io::system_digest(s), io::system_digest(t));
    }
}

TEST(Io, DigestIgnoresFormattingAndSeesValues)
{
    auto a = io::parse_system(kScalarCycle);
    auto b = io::parse_system(io::serialize_system(a));
    EXPECT_EQ(io::system_digest(a), io::system_digest(b));
    const auto d = io::system_digest(a);
    EXPECT_EQ(d.rfind("sha256:", 0), 0u);
    EXPECT_EQ(d.size(), 7u + 64u);
    EXPECT_NE(io::system_digest(a.scaled(2.0)), d);
}

TEST(Io, ParseErrors)
{
    EXPECT_THROW(io::parse_system("{"), ParseError);
    EXPECT_THROW(io::parse_system("[]"), ParseError);
    EXPECT_THROW(io::parse_system(R"({"modes": {}, "nodes": [], "edges": []})"), ParseError);
    EXPECT_THROW(io::parse_system(with_modes(R"({"1": "x"})")), ParseError);
    EXPECT_THROW(io::parse_system(with_modes(R"({"1": [[1, "a"], [0, 1]]})")), ParseError);
    EXPECT_THROW(io::parse_system(R"({"schema": 9, "dimension": 1, "modes": {"1": [[1]]}, "nodes": ["a"],
                                      "edges": [["a", "a", 1]]})"),
                 ParseError);
}

TEST(Io, InputErrors)
{
    try {
        io::parse_system(with_modes(R"({"1": [[1, 0, 0], [0, 1, 0]]})"));
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("mode 1 is not square (2x3)"), std::string::npos);
    }
    EXPECT_THROW(io::parse_system(with_modes(R"({"1": [[1, 0], [0]]})")), InputError);
    EXPECT_THROW(io::parse_system(with_modes(R"({"2": [[1, 0], [0, 1]]})")), InputError);
    EXPECT_THROW(io::parse_system(with_modes(R"({"1": [[1]]})")), InputError);
    // unknown node in an edge
    EXPECT_THROW(io::parse_system(R"({"dimension": 1, "modes": {"1": [[1]]}, "nodes": ["a"],
                                      "edges": [["a", "z", 1]]})"),
                 InputError);
}

TEST(Io, ReportIsSortedAndComplete)
{
    CjsrEstimate a, b, c;
    a.method = Method::path_dependent;
    a.parameter = 2;
    b.method = Method::plain;
    c.method = Method::path_dependent;
    c.parameter = 0;
    c.exact = ExactnessCertificate{};
    c.exact->base_labels = {1, 2};
    c.exact->cjsr_exact = 0.5;
    auto j = io::report_json("sha256:x", {a, b, c});
    EXPECT_EQ(j["schema"], 1);
    ASSERT_EQ(j["records"].size(), 3u);
    EXPECT_EQ(j["records"][0]["method"], "plain");
    EXPECT_TRUE(j["records"][0]["parameter"].is_null());
    EXPECT_EQ(j["records"][1]["parameter"], 0);
    EXPECT_EQ(j["records"][2]["parameter"], 2);
    EXPECT_EQ(j["records"][1]["exact"]["labels"], nlohmann::json({1, 2}));
    EXPECT_TRUE(j["records"][2]["exact"].is_null());
    for (const char* k : {"gamma_star_interval", "cjsr_upper", "cjsr_lower_certified", "accuracy_factor",
                          "cycle_lower", "lift_sizes", "probes", "seconds"})
        EXPECT_TRUE(j["records"][0].contains(k)) << k;
}

TEST(Io, CsvRows)
{
    CjsrEstimate e;
    e.method = Method::t_product;
    e.parameter = 3;
    e.cjsr_upper = 0.5;
    e.lifted_nodes = 2;
    std::vector<io::CompareRow> rows(2);
    rows[0].method = Method::t_product;
    rows[0].parameter = 3;
    rows[0].estimate = e;
    rows[1].method = Method::plain;
    rows[1].error = "cap \"max_paths\" hit";
    std::ostringstream os;
    io::write_csv(os, rows);
    std::istringstream in(os.str());
    std::string header, r0, r1;
    std::getline(in, header);
    std::getline(in, r0);
    std::getline(in, r1);
    EXPECT_EQ(header, "method,param,nodes,edges,lifted_dim,seconds,upper,certified_lower,cycle_lower,error");
    EXPECT_EQ(r0.rfind("tproduct,3,2,", 0), 0u);
    EXPECT_EQ(r1, R"(plain,,,,,,,,,"cap ""max_paths"" hit")");
}

TEST(Io, MethodsSpec)
{
    auto runs = io::parse_methods_spec("plain, tproduct:1-3,pathdep:2,kronecker");
    ASSERT_EQ(runs.size(), 6u);
    EXPECT_EQ(runs[0], std::make_pair(Method::plain, std::size_t{0}));
    EXPECT_EQ(runs[3], std::make_pair(Method::t_product, std::size_t{3}));
    EXPECT_EQ(runs[4], std::make_pair(Method::path_dependent, std::size_t{2}));
    for (const char* bad : {"", ",", "plain:1", "tproduct", "tproduct:3-1", "dlift:x", "tproduct:1-2x", "nope"})
        EXPECT_THROW(io::parse_methods_spec(bad), ParseError) << bad;
}

TEST(Io, PathCapFromEnvironment)
{
    ::unsetenv("CJSR_MAX_PATHS");
    EXPECT_EQ(io::limits_from_env().max_paths, EnumerationLimits{}.max_paths);
    ::setenv("CJSR_MAX_PATHS", "123", 1);
    EXPECT_EQ(io::limits_from_env().max_paths, 123u);
    ::setenv("CJSR_MAX_PATHS", "12x", 1);
    EXPECT_THROW(io::limits_from_env(), ParseError);
    ::unsetenv("CJSR_MAX_PATHS");
}

TEST(Io, BackmapCoversTheLift)
{
    auto s = ConstrainedSystem(two_node(), MatrixSet(dropout_matrices()));
    auto l = t_product_lift(s, 2);
    auto j = io::backmap_json(l, s);
    EXPECT_EQ(j["kind"], to_string(LiftKind::t_product));
    EXPECT_EQ(j["edges"].size(), l.system.automaton().num_edges());
    EXPECT_EQ(j["edges"][0]["origin"]["labels"].size(), 2u);
}
