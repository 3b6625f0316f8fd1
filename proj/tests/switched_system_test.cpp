#include <gtest/gtest.h>

#include "support.hpp"

using namespace cjsr;
using namespace cjsr::testing;

TEST(MatrixSet, RejectsMalformedSets)
{
    EXPECT_THROW(MatrixSet(std::vector<Matrix>{}), InputError);
    try {
        MatrixSet({Matrix::Identity(2, 2), Matrix::Zero(2, 3)});
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("mode 2"), std::string::npos);
    }
    EXPECT_THROW(MatrixSet({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}), InputError);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(MatrixSet({bad}), InputError);
}

TEST(ConstrainedSystem, LabelCountMustMatch)
{
    EXPECT_THROW(ConstrainedSystem(two_cycle(), MatrixSet({mat({{1.0}})})), InputError);
}

TEST(Products, TwoCycleProductIsAQuarter)
{
    auto s = scalar_cycle();
    auto p = paths_of_length(s.automaton(), 2).front();
    Matrix m = product_along_path(s, p);
    ASSERT_EQ(m.rows(), 1);
    EXPECT_DOUBLE_EQ(m(0, 0), 0.25);
}

TEST(Products, EmptyPathIsIdentity)
{
    auto s = dropout();
    Path p;
    EXPECT_TRUE(product_along_path(s, p).isIdentity());
}

TEST(Products, LaterLabelsMultiplyOnTheLeft)
{
    const auto& A = dropout_matrices();
    Matrix expect = A[0] * A[1] * A[0] * A[0] * A[0] * A[0] * A[2] * A[1];
    Matrix got = product_of_labels(MatrixSet(A), dropout_cycle());
    EXPECT_LT((got - expect).norm(), 1e-14);

    auto s = dropout();
    // the same word as a path of the automaton: 1 -2-> 2 -3-> 3 -1-> 1 ...
    std::vector<std::size_t> edges;
    std::size_t at = 0;
    for (auto l : dropout_cycle())
        for (auto e : s.automaton().out_edges(at))
            if (s.automaton().edge(e).label == l) {
                edges.push_back(e);
                at = s.automaton().edge(e).target;
                break;
            }
    auto c = make_cycle(s.automaton(), edges);
    EXPECT_LT((product_along_path(s, c.path) - expect).norm(), 1e-14);
}

TEST(RhoHat, TwoCycle)
{
    auto s = scalar_cycle();
    EXPECT_DOUBLE_EQ(rho_hat_k(s, 1), 2.0);
    EXPECT_DOUBLE_EQ(rho_hat_k(s, 2), 0.5);
    EXPECT_THROW(rho_hat_k(s, 0), InputError);
}

TEST(RhoHat, DropoutLengthEightCoversTheCycle)
{
    auto s = dropout();
    const double cyc = label_cycle_value(s.matrices(), dropout_cycle());
    EXPECT_GE(rho_hat_k(s, 8), cyc);
}

TEST(RhoHat, WitnessAttainsTheValue)
{
    auto s = dropout();
    auto r = rho_hat_k_with_witness(s, 5);
    EXPECT_NEAR(std::pow(spectral_norm(product_along_path(s, r.witness)), 0.2), r.value, 1e-14);
}

TEST(CycleBound, Values)
{
    auto s = scalar_cycle();
    EXPECT_DOUBLE_EQ(cycle_lower_bound(s, make_cycle(s.automaton(), {0, 1})), 0.5);
    auto d = dropout();
    // self-loop on node "1" with mode 1
    EXPECT_NEAR(cycle_lower_bound(d, make_cycle(d.automaton(), {0})), spectral_radius(dropout_matrices()[0]), 1e-15);
}

TEST(CycleBound, DropoutCycleValue)
{
    // eigenvalues of the 2x2 product from the closed form, independent of
    // the Eigen eigensolver
    Matrix p = product_of_labels(MatrixSet(dropout_matrices()), dropout_cycle());
    const double tr = p.trace(), det = p.determinant();
    const double disc = tr * tr - 4.0 * det;
    const double rho = disc >= 0 ? (std::abs(tr) + std::sqrt(disc)) / 2.0 : std::sqrt(det);
    const double expect = std::pow(rho, 1.0 / 8.0);
    EXPECT_NEAR(label_cycle_value(MatrixSet(dropout_matrices()), dropout_cycle()), expect, 1e-14);
    EXPECT_NEAR(expect, 0.9748171979372074, 1e-13);
}

TEST(Bracket, TwoCycleIsExact)
{
    auto b = bracket(scalar_cycle(), 2, 2);
    EXPECT_NEAR(b.lower, 0.5, 1e-15);
    EXPECT_NEAR(b.upper, 0.5, 1e-15);
    EXPECT_EQ(b.upper_k, 2u);
    ASSERT_TRUE(b.lower_witness);
    EXPECT_FALSE(b.partial);
}

TEST(Bracket, IdentityMatrices)
{
    auto s = ConstrainedSystem(no_three_ones(), MatrixSet({Matrix::Identity(2, 2), Matrix::Identity(2, 2)}));
    auto b = bracket(s, 4, 4);
    EXPECT_NEAR(b.lower, 1.0, 1e-15);
    EXPECT_NEAR(b.upper, 1.0, 1e-15);
}

TEST(Bracket, DropoutLowerReachesTheCycle)
{
    auto b = bracket(dropout(), 8, 8);
    EXPECT_GE(b.lower, 0.9748171979372074 - 1e-12);
    EXPECT_LE(b.lower, b.upper);
}

TEST(Bracket, CapMarksPartial)
{
    EnumerationLimits lim;
    lim.max_paths = 50;
    auto b = bracket(dropout(), 6, 3, lim);
    EXPECT_TRUE(b.partial);
    EXPECT_FALSE(b.partial_reason.empty());
    EXPECT_GT(b.upper_k, 0u);
    EXPECT_LT(b.upper, std::numeric_limits<double>::infinity());
}

// ---- properties ----

TEST(SwitchedProperties, SubmultiplicativityAndOrdering)
{
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = rng.system(2, rng.integer(2, 3));
        for (std::size_t k = 1; k <= 3; ++k)
            for (std::size_t m = 2; m <= 3; ++m)
                EXPECT_LE(rho_hat_k(s, k * m), rho_hat_k(s, k) * (1.0 + 1e-12));
        auto b = bracket(s, 6, 6);
        EXPECT_LE(b.lower, b.upper * (1.0 + 1e-9));
    }
}

TEST(SwitchedProperties, Homogeneity)
{
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = rng.system(2, rng.integer(2, 3));
        const double alpha = rng.uniform(0.1, 3.0);
        auto t = s.scaled(alpha);
        auto b = bracket(s, 5, 5), c = bracket(t, 5, 5);
        EXPECT_LT(rel_diff(c.lower, alpha * b.lower), 1e-12);
        EXPECT_LT(rel_diff(c.upper, alpha * b.upper), 1e-12);
        for (std::size_t k = 1; k <= 4; ++k)
            EXPECT_LT(rel_diff(rho_hat_k(t, k), alpha * rho_hat_k(s, k)), 1e-12);
    }
}

TEST(SwitchedProperties, RhoHatMatchesNaiveEnumeration)
{
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = rng.system(3, rng.integer(1, 3));
        for (std::size_t k = 1; k <= 4; ++k) {
            double best = 0.0;
            for (const auto& p : paths_of_length(s.automaton(), k)) {
                Eigen::JacobiSVD<Matrix> svd(product_along_path(s, p));
                best = std::max(best, svd.singularValues()(0));
            }
            EXPECT_NEAR(rho_hat_k(s, k), std::pow(best, 1.0 / static_cast<double>(k)), 1e-12);
        }
    }
}
