#include <gtest/gtest.h>

#include <cmath>

#include "dlpde/library.hpp"
#include "dlpde/stridge.hpp"

using namespace dlpde;

namespace {

std::vector<DerivativeJet> random_jets(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<DerivativeJet> out;
    for (int k = 0; k < n; ++k)
        out.push_back({rng.symmetric(), rng.uniform(), 1.5 * rng.symmetric(), rng.symmetric(), 2 * rng.symmetric(),
                       rng.symmetric(), 0.5 * rng.symmetric()});
    return out;
}

}  // namespace

TEST(Catalog, DefaultHasTenTermsInOrder) {
    const TermCatalog c = default_catalog();
    ASSERT_EQ(c.size(), 10u);
    EXPECT_EQ(c[0], (TermSpec{0, 0}));
    EXPECT_EQ(c.labels(), (std::vector<std::string>{"1", "u_x", "u_xx", "u_xxx", "u*u_x", "u*u_xx", "u*u_xxx",
                                                     "u^2*u_x", "u^2*u_xx", "u^2*u_xxx"}));
    EXPECT_EQ(c.index_of("u*u_x"), 4);
    EXPECT_EQ(c.index_of("u"), -1);
}

TEST(Catalog, ExtendedAddsDerivativeFreeTerms) {
    const TermCatalog c = extended_catalog();
    EXPECT_EQ(c.size(), 12u);
    EXPECT_GE(c.index_of("u"), 0);
    EXPECT_GE(c.index_of("u^2"), 0);
}

TEST(Catalog, LabelsRoundTrip) {
    for (const auto& t : extended_catalog().terms) EXPECT_EQ(parse_term_label(t.label()), t);
    EXPECT_THROW(parse_term_label("u_xxxx"), FormatError);
}

TEST(Catalog, ValidationRejectsDuplicatesAndEmpty) {
    EXPECT_THROW(TermCatalog{}.validate(), ParameterError);
    EXPECT_THROW((TermCatalog{{{1, 1}, {1, 1}}}.validate()), ParameterError);
    EXPECT_THROW((TermCatalog{{{3, 1}}}.validate()), ParameterError);
}

TEST(EvaluateTerm, Examples) {
    DerivativeJet j;
    j.u = 2;
    j.u_x = 3;
    EXPECT_EQ(evaluate_term(TermSpec{0, 0}, j), 1.0);
    EXPECT_EQ(evaluate_term(TermSpec{1, 1}, j), 6.0);
    EXPECT_EQ(evaluate_term(TermSpec{2, 1}, j), 12.0);
    DerivativeJet k;
    k.u = -1;
    k.u_xxx = 0.5;
    EXPECT_EQ(evaluate_term(TermSpec{2, 3}, k), 0.5);
    EXPECT_EQ(evaluate_term(TermSpec{1, 0}, k), -1.0);
}

TEST(EvaluateTerm, MultiplicativeInThePower) {
    for (const auto& jet : random_jets(20, 3))
        for (int q = 0; q <= 3; ++q)
            EXPECT_DOUBLE_EQ(evaluate_term(TermSpec{2, q}, jet), jet.u * evaluate_term(TermSpec{1, q}, jet));
}

TEST(Assemble, ShapeAndColumns) {
    const auto js = random_jets(10, 1);
    const FeatureSystem s = assemble(js, default_catalog());
    EXPECT_EQ(s.rows(), 10);
    EXPECT_EQ(s.cols(), 10);
    EXPECT_EQ(s.column_scales, Eigen::VectorXd::Ones(10));
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(s.ut(i), js[i].u_t);
        EXPECT_EQ(s.theta(i, 0), 1.0);
        EXPECT_EQ(s.theta(i, 5), js[i].u * js[i].u_xx);
    }
}

TEST(Assemble, IdentityFunction) {
    std::vector<DerivativeJet> js;
    for (int k = 0; k < 12; ++k) js.push_back({0.1 * k, 0.0, 0.1 * k, 0.0, 1.0, 0.0, 0.0});
    const FeatureSystem s = assemble(js, default_catalog());
    EXPECT_EQ(s.ut, Eigen::VectorXd::Zero(12));
    EXPECT_EQ(s.theta.col(1), Eigen::VectorXd::Ones(12));
}

TEST(Assemble, ManufacturedSolutionHasZeroResidual) {
    auto js = random_jets(50, 2);
    for (auto& j : js) j.u_t = 0.25 * j.u_xx;
    const FeatureSystem s = assemble(js, default_catalog());
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(10);
    xi(2) = 0.25;
    EXPECT_EQ((s.theta * xi - s.ut).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assemble, RowPermutationEquivariance) {
    auto js = random_jets(30, 4);
    const FeatureSystem a = assemble(js, default_catalog());
    std::reverse(js.begin(), js.end());
    const FeatureSystem b = assemble(js, default_catalog());
    EXPECT_EQ(a.theta.colwise().reverse(), b.theta);
    EXPECT_EQ(a.ut.reverse(), b.ut);
}

TEST(Assemble, Errors) {
    auto js = random_jets(12, 5);
    js[7].u_xx = std::nan("");
    try {
        assemble(js, default_catalog());
        FAIL() << "expected AssemblyError";
    } catch (const AssemblyError& e) {
        EXPECT_EQ(e.point(), 7u);
    }
    EXPECT_THROW(assemble(random_jets(5, 1), default_catalog()), ParameterError);
}

TEST(Normalize, ColumnOfTwos) {
    FeatureSystem s;
    s.theta = Eigen::MatrixXd::Constant(4, 1, 2.0);
    s.ut = Eigen::VectorXd::Ones(4);
    s.catalog = TermCatalog{{{0, 0}}};
    s.column_scales = Eigen::VectorXd::Ones(1);
    const FeatureSystem n = normalize(s);
    EXPECT_DOUBLE_EQ(n.column_scales(0), 4.0);
    EXPECT_EQ(n.theta, Eigen::MatrixXd::Constant(4, 1, 0.5));
}

TEST(Normalize, Idempotent) {
    const FeatureSystem once = normalize(assemble(random_jets(40, 6), default_catalog()));
    const FeatureSystem twice = normalize(once);
    EXPECT_TRUE(twice.theta.isApprox(once.theta, 1e-15));
    EXPECT_TRUE(twice.column_scales.isApprox(once.column_scales, 1e-15));
    for (Eigen::Index j = 0; j < once.cols(); ++j) EXPECT_NEAR(once.theta.col(j).norm(), 1.0, 1e-14);
}

TEST(Normalize, UnscalingRoundTrip) {
    const FeatureSystem raw = assemble(random_jets(60, 7), default_catalog());
    const FeatureSystem n = normalize(raw);
    const Eigen::VectorXd direct = ridge(raw, 0.0);
    const Eigen::VectorXd scaled = ridge(n, 0.0).cwiseQuotient(n.column_scales);
    EXPECT_LT((direct - scaled).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, direct.cwiseAbs().maxCoeff()));
}

TEST(Normalize, ZeroColumnNamesTheTerm) {
    auto js = random_jets(20, 8);
    for (auto& j : js) j.u_xxx = 0.0;
    try {
        normalize(assemble(js, default_catalog()));
        FAIL() << "expected ConditioningError";
    } catch (const ConditioningError& e) {
        EXPECT_EQ(e.term(), "u_xxx");
    }
}

TEST(SelectRows, KeepsScales) {
    const FeatureSystem n = normalize(assemble(random_jets(20, 9), default_catalog()));
    const std::vector<Eigen::Index> rows{3, 0, 17};
    const FeatureSystem s = select_rows(n, rows);
    EXPECT_EQ(s.rows(), 3);
    EXPECT_EQ(s.theta.row(1), n.theta.row(0));
    EXPECT_EQ(s.ut(2), n.ut(17));
    EXPECT_EQ(s.column_scales, n.column_scales);
}
