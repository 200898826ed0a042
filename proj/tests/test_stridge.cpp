#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "dlpde/stridge.hpp"

using namespace dlpde;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = rng.symmetric();
    return m;
}

FeatureSystem system_of(const Eigen::MatrixXd& theta, const Eigen::VectorXd& ut) {
    FeatureSystem s;
    s.theta = theta;
    s.ut = ut;
    s.catalog = default_catalog();
    s.catalog.terms.resize(static_cast<std::size_t>(theta.cols()));
    s.column_scales = Eigen::VectorXd::Ones(theta.cols());
    return s;
}

// 200 x 10 system, ut = 0.7 theta_2 - 1.3 theta_4 (+ small noise).
FeatureSystem planted(double noise, std::uint64_t seed) {
    const Eigen::MatrixXd theta = random_matrix(200, 10, seed);
    Eigen::VectorXd ut = 0.7 * theta.col(2) - 1.3 * theta.col(4);
    Rng rng(seed + 100);
    for (Eigen::Index i = 0; i < ut.size(); ++i) ut(i) += noise * rng.symmetric();
    return system_of(theta, ut);
}

}  // namespace

TEST(Ridge, ExactSolutionWithoutRegularization) {
    const Eigen::MatrixXd a = random_matrix(30, 4, 1);
    const Eigen::Vector4d xi(1.0, -2.0, 0.5, 3.0);
    EXPECT_LT((ridge(a, a * xi, 0.0) - xi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ridge, ShrinksTowardZero) {
    const Eigen::MatrixXd a = random_matrix(30, 4, 2);
    const Eigen::VectorXd b = a * Eigen::Vector4d(1, 1, 1, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (double lam : {0.0, 0.1, 1.0, 10.0, 100.0}) {
        const double n = ridge(a, b, lam).norm();
        EXPECT_LT(n, prev);
        prev = n;
    }
}

TEST(Ridge, MatchesLongDoubleNormalEquations) {
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const Eigen::MatrixXd a = random_matrix(50, 10, 3);
    const Eigen::VectorXd b = random_matrix(50, 1, 4);
    for (double lam : {1e-5, 1e-2, 1.0}) {
        const MatL al = a.cast<long double>();
        const MatL g = al.transpose() * al + static_cast<long double>(lam) * MatL::Identity(10, 10);
        const VecL oracle = g.ldlt().solve(VecL(al.transpose() * b.cast<long double>()));
        const Eigen::VectorXd got = ridge(a, b, lam);
        EXPECT_LT((got - oracle.cast<double>()).cwiseAbs().maxCoeff(), 1e-8) << lam;
    }
}

TEST(Ridge, RankDeficientWithoutLambdaThrows) {
    Eigen::MatrixXd a = random_matrix(20, 3, 5);
    a.col(2) = 2.0 * a.col(0);
    EXPECT_THROW(ridge(a, Eigen::VectorXd::Ones(20), 0.0), RankError);
    EXPECT_NO_THROW(ridge(a, Eigen::VectorXd::Ones(20), 1e-3));
    EXPECT_THROW(ridge(a, Eigen::VectorXd::Ones(20), -1.0), ParameterError);
}

TEST(Stridge, SingleTermRecovered) {
    const Eigen::MatrixXd theta = random_matrix(100, 1, 6);
    const FeatureSystem s = system_of(theta, 0.5 * theta.col(0));
    const DiscoveryResult r = stridge(s, StridgeConfig{});
    ASSERT_EQ(r.support, std::vector<int>{0});
    EXPECT_NEAR(r.coefficients[0], 0.5, 1e-10);
}

TEST(Stridge, PlantedSupportMatchesBruteForce) {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const FeatureSystem s = planted(1e-3, seed);
        const DiscoveryResult r = stridge(s, StridgeConfig{});
        EXPECT_EQ(r.support, (std::vector<int>{2, 4}));
        EXPECT_NEAR(r.coefficient("u_xx"), 0.7, 1e-3);
        EXPECT_NEAR(r.coefficient("u*u_x"), -1.3, 1e-3);

        // exhaustive oracle: smallest subset whose LS residual is within 2x the full-model residual
        const double full = (s.theta * ridge(s.theta, s.ut, 0.0) - s.ut).norm();
        int best_mask = -1;
        int best_size = 11;
        double best_res = std::numeric_limits<double>::infinity();
        for (int mask = 1; mask < (1 << 10); ++mask) {
            std::vector<int> cols;
            for (int j = 0; j < 10; ++j)
                if (mask & (1 << j)) cols.push_back(j);
            Eigen::MatrixXd sub(s.rows(), static_cast<Eigen::Index>(cols.size()));
            for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = s.theta.col(cols[k]);
            const double res = (sub * ridge(sub, s.ut, 0.0) - s.ut).norm();
            if (res > 2.0 * full) continue;
            const int size = static_cast<int>(cols.size());
            if (size < best_size || (size == best_size && res < best_res)) {
                best_size = size;
                best_res = res;
                best_mask = mask;
            }
        }
        EXPECT_EQ(best_mask, (1 << 2) | (1 << 4));
    }
}

TEST(Stridge, TerminatesWithinTermCount) {
    for (std::uint64_t seed = 20; seed < 30; ++seed) {
        const FeatureSystem s = system_of(random_matrix(80, 10, seed), random_matrix(80, 1, seed + 50).col(0));
        for (double tol : {0.01, 0.1, 0.5, 0.9}) {
            StridgeConfig c;
            c.tol = tol;
            const DiscoveryResult r = stridge(s, c);
            EXPECT_TRUE(r.converged);
            EXPECT_LE(r.iterations_used, 11);
            EXPECT_TRUE(std::is_sorted(r.support.begin(), r.support.end()));
            if (r.found()) {
                const Eigen::VectorXd xi = r.dense();
                const double biggest = xi.cwiseAbs().maxCoeff();
                EXPECT_GT(biggest, 0.0);
            }
        }
    }
}

TEST(Stridge, SupportShrinksAsToleranceGrows) {
    // nested supports on a graded planted system
    const Eigen::MatrixXd theta = random_matrix(300, 6, 31);
    const Eigen::VectorXd ut = theta * (Eigen::VectorXd(6) << 1.0, 0.3, 0.1, 0.03, 0.0, 0.0).finished();
    const FeatureSystem s = system_of(theta, ut);
    std::size_t prev = 7;
    for (double tol : {0.01, 0.05, 0.2, 0.5}) {
        StridgeConfig c;
        c.tol = tol;
        c.normalize = false;
        const auto r = stridge(s, c);
        EXPECT_LE(r.support.size(), prev);
        prev = r.support.size();
    }
    EXPECT_EQ(prev, 1u);
}

TEST(Stridge, ScaleEquivariance) {
    const FeatureSystem s = planted(1e-2, 40);
    const DiscoveryResult base = stridge(s, StridgeConfig{});
    FeatureSystem scaled = s;
    scaled.theta.col(4) *= 8.0;
    scaled.ut *= 3.0;
    const DiscoveryResult r = stridge(scaled, StridgeConfig{});
    ASSERT_EQ(r.support, base.support);
    for (std::size_t k = 0; k < r.support.size(); ++k) {
        const double expect = base.coefficients[k] * 3.0 / (r.support[k] == 4 ? 8.0 : 1.0);
        EXPECT_NEAR(r.coefficients[k], expect, 1e-9 * std::abs(expect));
    }
}

TEST(Stridge, TermAtThresholdIsKept) {
    const FeatureSystem s = system_of(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1.0, 0.0625, 0.03125));
    StridgeConfig c;
    c.lambda = 0.0;
    c.tol = 0.0625;
    c.normalize = false;
    const DiscoveryResult r = stridge(s, c);
    EXPECT_EQ(r.support, (std::vector<int>{0, 1}));
    c.tol_mode = TolMode::Absolute;
    c.tol = 0.5;
    EXPECT_EQ(stridge(s, c).support, std::vector<int>{0});
}

TEST(Stridge, EverythingThresholdedIsReported) {
    const FeatureSystem s = system_of(Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1.0, 1.0, 1.0));
    StridgeConfig c;
    c.tol_mode = TolMode::Absolute;
    c.tol = 5.0;
    const DiscoveryResult r = stridge(s, c);
    EXPECT_FALSE(r.found());
    EXPECT_EQ(r.equation, "u_t = 0");
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Stridge, ConfigValidation) {
    const FeatureSystem s = planted(0.0, 1);
    StridgeConfig c;
    c.tol = 0.0;
    EXPECT_THROW(stridge(s, c), ParameterError);
    c = StridgeConfig{};
    c.max_iter = 0;
    EXPECT_THROW(stridge(s, c), ParameterError);
    c = StridgeConfig{};
    c.validation_fraction = 1.0;
    EXPECT_THROW(stridge(s, c), ParameterError);
}

TEST(Sweep, SingleToleranceEqualsStridge) {
    const FeatureSystem s = planted(1e-2, 50);
    StridgeConfig c;
    c.tol = 0.2;
    StridgeConfig sw;
    sw.tol_sweep = {0.2};
    const auto a = stridge(s, c);
    const auto b = sweep_tol(s, sw);
    EXPECT_EQ(a.support, b.support);
    EXPECT_EQ(a.coefficients, b.coefficients);
}

TEST(Sweep, PicksThePlantedSupport) {
    const FeatureSystem s = planted(5e-2, 51);
    StridgeConfig c;
    for (int k = 0; k <= 12; ++k) c.tol_sweep.push_back(std::pow(10.0, -3.0 + 0.25 * k));
    const auto r = discover(s, c);
    EXPECT_EQ(r.support, (std::vector<int>{2, 4}));
    EXPECT_THROW(sweep_tol(s, StridgeConfig{}), ParameterError);
}

TEST(Sweep, DeterministicForSeed) {
    const FeatureSystem s = planted(0.3, 52);
    StridgeConfig c;
    c.tol_sweep = {0.001, 0.01, 0.1, 0.3};
    c.split_seed = 9;
    EXPECT_EQ(sweep_tol(s, c).coefficients, sweep_tol(s, c).coefficients);
}

TEST(Render, Examples) {
    const TermCatalog cat = default_catalog();
    EXPECT_EQ(render_equation(cat, {4, 2}, {-0.996, 0.099}), "u_t = -0.996*u*u_x + 0.099*u_xx");
    EXPECT_EQ(render_equation(cat, {1, 2}, {-0.999, 0.239}, "C"), "C_t = -0.999*C_x + 0.239*C_xx");
    EXPECT_EQ(render_equation(cat, {0, 3}, {0.5, -0.00123}), "u_t = 0.500 - 0.00123*u_xxx");
    EXPECT_EQ(format_coefficient(0.0), "0.000");
    EXPECT_EQ(format_coefficient(1.23456), "1.235");
}

TEST(ResultIo, RoundTrip) {
    const auto r = stridge(planted(1e-2, 60), StridgeConfig{});
    std::stringstream ss;
    write_result(ss, r);
    const auto back = read_result(ss);
    EXPECT_EQ(back.support, r.support);
    EXPECT_EQ(back.coefficients, r.coefficients);
    EXPECT_EQ(back.equation, r.equation);
    EXPECT_EQ(back.warnings, r.warnings);
    EXPECT_EQ(back.catalog, r.catalog);
    std::istringstream bad("support 1\ncoefficients 0.5\n");
    EXPECT_THROW(read_result(bad), FormatError);
}
