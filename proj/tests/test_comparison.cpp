#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "property.hpp"
#include "sigmak/comparison.hpp"
#include "sigmak/errors.hpp"

using namespace sigmak;
using namespace sigmak::comparison;
using sigmak::testing::for_all;
using sigmak::testing::Gen;

namespace {

std::vector<double> grid(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
}

}  // namespace

TEST(Hawking, ClosedForms) {
    EXPECT_DOUBLE_EQ(hawking_bound(0.0, 2.0), 0.5);
    EXPECT_NEAR(hawking_bound(1.0, 2.0), std::log(3.0) / 2.0, 1e-12);
    EXPECT_NEAR(hawking_bound(1.0, 2.0), 0.549306144, 1e-9);
    for (double c0 : {0.3, 1.0, 7.0}) EXPECT_EQ(hawking_bound(0.0, c0), 1.0 / c0);
}

TEST(Hawking, ContinuousAtZero) {
    for (double c0 : {0.5, 1.0, 3.0}) {
        double prev_gap = 1.0;
        for (double a = 1e-1; a > 1e-7; a *= 0.1) {
            const double gap = std::abs(hawking_bound(a, c0) - 1.0 / c0);
            EXPECT_LT(gap, prev_gap);
            prev_gap = gap;
        }
        EXPECT_LT(prev_gap, 1e-12);
    }
}

TEST(Hawking, EqualityModels) {
    // Euclidean ball of radius rho: the boundary has H = (n-1)/rho, so c0 = 1/rho
    // and the center is at distance rho.
    for (double rho : {0.1, 1.0, 4.0}) EXPECT_NEAR(hawking_bound(0.0, 1.0 / rho), rho, 1e-10 * rho);
    // Geodesic ball in curvature -alpha^2: H = (n-1) alpha coth(alpha rho).
    for (double alpha : {0.5, 1.0, 2.0})
        for (double rho : {0.1, 0.7, 2.0})
            EXPECT_NEAR(hawking_bound(alpha, alpha / std::tanh(alpha * rho)), rho, 1e-10 * rho);
}

TEST(Hawking, Monotone) {
    EXPECT_TRUE(for_all(31, 500, [](Gen& gen, int) {
        const double a = gen.uniform(0.0, 2.0);
        const double c0 = a + gen.uniform(0.01, 3.0);
        const double dc = gen.uniform(1e-3, 1.0);
        if (!(hawking_bound(a, c0 + dc) < hawking_bound(a, c0))) return ::testing::AssertionFailure() << "c0";
        const double da = gen.uniform(1e-3, 0.99) * (c0 - a);
        if (!(hawking_bound(a + da, c0) > hawking_bound(a, c0))) return ::testing::AssertionFailure() << "alpha";
        return ::testing::AssertionSuccess();
    }));
}

TEST(Hawking, DomainErrors) {
    EXPECT_THROW((void)hawking_bound(1.0, 1.0), DomainError);
    EXPECT_THROW((void)hawking_bound(2.0, 1.0), DomainError);
    EXPECT_THROW((void)hawking_bound(-0.1, 1.0), DomainError);
    EXPECT_THROW((void)hawking_bound(0.0, 0.0), DomainError);
}

TEST(ModelVolume, UnitBall) {
    EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
    EXPECT_NEAR(unit_ball_volume(3), 4.0 * std::numbers::pi / 3.0, 1e-14);
    EXPECT_NEAR(unit_ball_volume(4), std::numbers::pi * std::numbers::pi / 2.0, 1e-14);
}

TEST(ModelVolume, FlatExact) {
    for (int n = 2; n <= 7; ++n) {
        const auto m = ModelSpace::make(n, 0.0);
        EXPECT_EQ(model_ball_volume(m, 1.7), unit_ball_volume(n) * std::pow(1.7, n));
    }
}

TEST(ModelVolume, HyperbolicThreeBall) {
    const double v = model_ball_volume(ModelSpace::make(3, 1.0), 1.0);
    EXPECT_NEAR(v, std::numbers::pi * (std::sinh(2.0) - 2.0), 1e-8);
    EXPECT_NEAR(v, 5.110933, 1e-6);
}

TEST(ModelVolume, SmallCurvatureIsSecondOrder) {
    for (int n = 3; n <= 5; ++n) {
        const double flat = model_ball_volume(ModelSpace::make(n, 0.0), 1.0);
        double prev = 0.0;
        for (double a : {0.1, 0.05, 0.025}) {
            const double rel = model_ball_volume(ModelSpace::make(n, a), 1.0) / flat - 1.0;
            if (prev > 0.0) EXPECT_NEAR(prev / rel, 4.0, 0.05);
            prev = rel;
        }
    }
}

TEST(ModelVolume, IncreasingInRadiusAndCurvature) {
    EXPECT_TRUE(for_all(32, 200, [](Gen& gen, int) {
        const int n = gen.integer(2, 6);
        const double a = gen.uniform(0.0, 2.0);
        const double r = gen.uniform(0.05, 3.0);
        const double v = model_ball_volume(ModelSpace::make(n, a), r);
        if (!(model_ball_volume(ModelSpace::make(n, a), r * 1.01) > v)) return ::testing::AssertionFailure() << "r";
        if (!(model_ball_volume(ModelSpace::make(n, a + 0.05), r) > v)) return ::testing::AssertionFailure() << "alpha";
        return ::testing::AssertionSuccess();
    }));
}

TEST(ModelVolume, RejectsNegativeAlpha) { EXPECT_THROW((void)ModelSpace::make(3, -1.0), std::invalid_argument); }

TEST(SphereVolume, Hemisphere) {
    // Half of the sphere area 2 pi^{(n+1)/2} / Gamma((n+1)/2).
    for (int n = 2; n <= 5; ++n) {
        const double total = 2.0 * std::pow(std::numbers::pi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
        EXPECT_NEAR(sphere_ball_volume(n, std::numbers::pi / 2.0), total / 2.0, 1e-12 * total);
        EXPECT_NEAR(sphere_ball_volume(n, std::numbers::pi), total, 1e-12 * total);
    }
}

TEST(BishopGromov, FlatRatioIsOne) {
    const auto r = grid(0.01, 5.0, 50);
    for (int n = 2; n <= 6; ++n) {
        const auto table = bg_ratio([n](double s) { return unit_ball_volume(n) * std::pow(s, n); },
                                    ModelSpace::make(n, 0.0), r);
        for (const auto& row : table.rows) EXPECT_NEAR(row.ratio, 1.0, 1e-12);
        EXPECT_TRUE(table.nonincreasing);
    }
}

TEST(BishopGromov, RoundSphereDecreasing) {
    const auto r = grid(1e-3, 3.0, 200);
    for (int n = 3; n <= 5; ++n) {
        const auto table =
            bg_ratio([n](double s) { return sphere_ball_volume(n, s); }, ModelSpace::make(n, 0.0), r);
        EXPECT_TRUE(table.nonincreasing);
        for (std::size_t i = 1; i < table.rows.size(); ++i) EXPECT_LT(table.rows[i].ratio, table.rows[i - 1].ratio);
        EXPECT_NEAR(table.rows.front().ratio, 1.0, 1e-6);
    }
}

TEST(BishopGromov, HyperbolicAgainstItsOwnModel) {
    const auto r = grid(0.01, 3.0, 60);
    const auto m = ModelSpace::make(4, 1.0);
    const auto table = bg_ratio([m](double s) { return model_ball_volume(m, s); }, m, r);
    for (const auto& row : table.rows) EXPECT_NEAR(row.ratio, 1.0, 1e-12);
    // The round sphere also has Ric >= -(n-1) alpha^2 for any alpha.
    const auto sphere = bg_ratio([](double s) { return sphere_ball_volume(4, s); }, m, r);
    EXPECT_TRUE(sphere.nonincreasing);
}

TEST(BishopGromov, IncreasingRatioDetected) {
    const auto r = grid(0.1, 2.0, 20);
    const auto table = bg_ratio([](double s) { return unit_ball_volume(3) * std::pow(s, 3) * (1.0 + s); },
                                ModelSpace::make(3, 0.0), r);
    EXPECT_FALSE(table.nonincreasing);
    EXPECT_GT(table.max_increase, 0.0);
}

TEST(BishopGromov, CsvLayout) {
    const auto r = grid(0.5, 1.0, 3);
    const auto table = bg_ratio([](double s) { return sphere_ball_volume(3, s); }, ModelSpace::make(3, 0.0), r);
    std::ostringstream os;
    write_ratio_csv(os, table);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "r,volume,model_volume,ratio");
    EXPECT_THROW((void)bg_ratio([](double) { return 1.0; }, ModelSpace::make(3, 0.0), std::vector<double>{1.0, 0.5}),
                 std::invalid_argument);
}

TEST(Isoperimetric, EuclideanBall) {
    for (int n = 2; n <= 7; ++n) {
        for (double rho : {0.3, 1.0, 5.0}) {
            const double area = n * unit_ball_volume(n) * std::pow(rho, n - 1);
            const double vol = unit_ball_volume(n) * std::pow(rho, n);
            EXPECT_NEAR(isoperimetric_ratio(n, area, vol), euclidean_isoperimetric_constant(n),
                        1e-12 * euclidean_isoperimetric_constant(n));
        }
    }
}

TEST(Isoperimetric, ScaleInvariant) {
    EXPECT_TRUE(for_all(33, 200, [](Gen& gen, int) {
        const int n = gen.integer(2, 8);
        const double a = gen.uniform(0.1, 10.0);
        const double v = gen.uniform(0.1, 10.0);
        const double t = gen.uniform(0.1, 10.0);
        const double lhs = isoperimetric_ratio(n, std::pow(t, n - 1) * a, std::pow(t, n) * v);
        const double rhs = isoperimetric_ratio(n, a, v);
        if (std::abs(lhs - rhs) > 1e-12 * rhs) return ::testing::AssertionFailure() << lhs << " vs " << rhs;
        return ::testing::AssertionSuccess();
    }));
    EXPECT_THROW((void)isoperimetric_ratio(3, 0.0, 1.0), DomainError);
}

TEST(Isoperimetric, ThinAnnulusDegenerates) {
    const std::vector<double> w{0.5, 0.1, 0.01, 1e-3, 1e-4};
    const auto rows = annulus_isoperimetric_table(3, 1.0, w);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].ratio, rows[i - 1].ratio);
        EXPECT_LT(rows[i].inverse_ratio, rows[i - 1].inverse_ratio);
    }
    EXPECT_LT(rows.back().inverse_ratio, 1e-3);
    // Exact shell volume 4/3 pi (1 - (1 - w)^3).
    EXPECT_NEAR(rows[1].volume, 4.0 / 3.0 * std::numbers::pi * (1.0 - std::pow(0.9, 3)), 1e-12);
}
