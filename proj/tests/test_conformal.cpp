#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "property.hpp"
#include "sigmak/conformal.hpp"

using namespace sigmak;
using namespace sigmak::conformal;
using sigmak::testing::Gen;

namespace {

Vector random_point(Gen& gen, int n, double radius) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = gen.uniform(-radius, radius);
    return x;
}

// Standard bubble c (a / (1 + a^2 |x - p|^2))^{(n-2)/2}, written out here so
// that these tests do not depend on the bubbles module.
ConformalFactor test_bubble(int n, double a, const Vector& p) {
    const double c = std::pow(2.0, (n - 2) / 2.0);
    return ConformalFactor::from_expression(
        n,
        [n, a, p, c](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            using std::pow;
            T d2(0.0);
            for (int i = 0; i < n; ++i) d2 = d2 + (x[i] - T(p[i])) * (x[i] - T(p[i]));
            return T(c) * pow(T(a) / (T(1.0) + T(a * a) * d2), (n - 2) / 2.0);
        },
        "test-bubble");
}

// A generic smooth positive factor.
ConformalFactor wiggly(int n, double amp) {
    return ConformalFactor::from_expression(
        n,
        [n, amp](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            using std::cos;
            using std::exp;
            using std::sin;
            T s(0.0);
            for (int i = 0; i < n; ++i) s = s + T(amp / (i + 1)) * sin(T(i + 1.0) * x[i] + T(0.3 * i));
            return exp(s + T(0.2 * amp) * cos(x[0] * x[n - 1]));
        },
        "wiggly");
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------- background

TEST(SchoutenBackground, FlatIsZero) {
    Gen gen(1);
    for (int n = 3; n <= 6; ++n) {
        const auto g = metrics::flat(n);
        EXPECT_LT(max_abs(schouten_background(g, random_point(gen, n, 1.0))), 1e-15);
    }
}

TEST(SchoutenBackground, RoundSphereIsHalfMetricInEveryChart) {
    Gen gen(2);
    for (int n = 3; n <= 6; ++n) {
        for (const auto& g : {metrics::sphere_normal(n), metrics::sphere_stereographic(n)}) {
            for (int s = 0; s < 10; ++s) {
                const Vector x = random_point(gen, n, 0.5);
                EXPECT_LT(max_abs(schouten_background(g, x) - 0.5 * g.metric(x)), 1e-10) << g.name();
            }
        }
        const auto polar = metrics::sphere_polar(n);
        for (int s = 0; s < 10; ++s) {
            Vector x = random_point(gen, n, 1.5);
            x[0] = gen.uniform(0.2, 3.0);
            EXPECT_LT(max_abs(schouten_background(polar, x) - 0.5 * polar.metric(x)), 1e-10);
        }
    }
}

TEST(SchoutenBackground, SphereNormalChartAtOriginAndSeriesSwitch) {
    // The normal-chart metric switches from a power series to the closed form
    // at |x| = 1; curvature must be continuous across it.
    for (int n : {3, 5}) {
        const auto g = metrics::sphere_normal(n);
        for (double r : {0.0, 1e-6, 0.999999, 1.000001, 1.5}) {
            Vector x = Vector::Zero(n);
            x[0] = r / std::sqrt(2.0);
            x[1] = r / std::sqrt(2.0);
            EXPECT_LT(max_abs(schouten_background(g, x) - 0.5 * g.metric(x)), 1e-10) << "r=" << r;
        }
    }
}

TEST(SchoutenBackground, AnalyticMatchesFiniteDifference) {
    Gen gen(3);
    for (int n = 3; n <= 5; ++n) {
        const auto exact = metrics::sphere_normal(n);
        const auto fd = exact.with_mode(DerivativeMode::finite_difference(1e-4));
        for (int s = 0; s < 5; ++s) {
            const Vector x = random_point(gen, n, 0.6);
            EXPECT_LT(max_abs(schouten_background(exact, x) - schouten_background(fd, x)), 1e-6);
        }
    }
}

TEST(SchoutenBackground, FiniteDifferenceIsSecondOrder) {
    const int n = 4;
    const auto exact = metrics::sphere_normal(n);
    const Vector x = (Vector(n) << 0.4, -0.3, 0.5, 0.2).finished();
    const Matrix ref = ricci_background(exact, x);
    const double e1 = max_abs(ricci_background(exact.with_mode(DerivativeMode::finite_difference(2e-2)), x) - ref);
    const double e2 = max_abs(ricci_background(exact.with_mode(DerivativeMode::finite_difference(1e-2)), x) - ref);
    EXPECT_GT(e1 / e2, 3.5);
    EXPECT_LT(e1 / e2, 4.5);
    // Richardson removes the leading term.
    const double er = max_abs(ricci_background(exact.with_mode(DerivativeMode::finite_difference(2e-2, true)), x) - ref);
    EXPECT_LT(er, 0.1 * e2);
}

TEST(SchoutenBackground, TraceIsScalarCurvatureOverTwoNMinusOne) {
    Gen gen(4);
    for (int n = 3; n <= 6; ++n) {
        for (const auto& g : {metrics::sphere_normal(n), metrics::sphere_stereographic(n), metrics::flat(n)}) {
            const Vector x = random_point(gen, n, 0.5);
            const double scal = scalar_curvature(g, x);
            const double trace = (g.metric(x).inverse().cwiseProduct(schouten_background(g, x))).sum();
            EXPECT_NEAR(trace, scal / (2.0 * (n - 1)), 1e-8);
            if (g.name() != "flat") EXPECT_NEAR(scal, n * (n - 1.0), 1e-8);
        }
    }
}

TEST(SchoutenBackground, OutsideChartThrows) {
    const auto g = metrics::sphere_polar(3);
    EXPECT_THROW((void)schouten_background(g, Vector::Zero(3)), DomainError);
}

// ---------------------------------------------------------------- conformal

TEST(SchoutenConformal, UnitFactorIsBackground) {
    Gen gen(5);
    const int n = 4;
    const auto g = metrics::sphere_normal(n);
    const Vector x = random_point(gen, n, 0.5);
    EXPECT_LT(max_abs(schouten_conformal(g, ConformalFactor::constant(n, 1.0), x) - schouten_background(g, x)), 1e-14);
}

TEST(SchoutenConformal, BubbleGivesHalfConformalMetric) {
    Gen gen(6);
    for (int n = 3; n <= 6; ++n) {
        const auto g = metrics::flat(n);
        const auto u = test_bubble(n, 1.0, Vector::Zero(n));
        for (int s = 0; s < 10; ++s) {
            const Vector x = random_point(gen, n, 2.0);
            const Matrix a = schouten_conformal(g, u, x);
            EXPECT_LT(max_abs(a - 0.5 * conformal_metric_at(g, u, x)), 1e-12);
        }
    }
}

TEST(SchoutenConformal, InversionImageOfFlatIsFlat) {
    Gen gen(7);
    for (int n = 3; n <= 5; ++n) {
        const Vector p = random_point(gen, n, 1.0);
        const auto u = factors::inversion(p).with_mode(DerivativeMode::finite_difference(1e-4));
        for (int s = 0; s < 10; ++s) {
            Vector x = random_point(gen, n, 1.0);
            if ((x - p).norm() < 0.5) x += 0.5 * Vector::Ones(n);
            const Matrix a = schouten_conformal(metrics::flat(n), u, x);
            EXPECT_LT(max_abs(a), 1e-6);
        }
    }
}

TEST(SchoutenConformal, NonPositiveFactorThrows) {
    const int n = 3;
    EXPECT_THROW((void)schouten_conformal(metrics::flat(n), ConformalFactor::constant(n, 0.0), Vector::Zero(n)),
                 DomainError);
    EXPECT_THROW((void)schouten_conformal(metrics::flat(n), ConformalFactor::constant(n, -1.0), Vector::Zero(n)),
                 DomainError);
}

TEST(SchoutenConformal, ScalingLaw) {
    Gen gen(8);
    for (int n = 3; n <= 6; ++n) {
        const auto g = metrics::sphere_normal(n);
        const auto u = wiggly(n, 0.2);
        const Vector x = random_point(gen, n, 0.4);
        for (double c : {0.3, 2.0, 7.5}) {
            const auto cu = u.scaled(c);
            const auto e1 = eigen_rel(schouten_conformal(g, u, x), conformal_metric_at(g, u, x));
            const auto e2 = eigen_rel(schouten_conformal(g, cu, x), conformal_metric_at(g, cu, x));
            const double factor = std::pow(c, -4.0 / (n - 2));
            for (int i = 0; i < n; ++i) EXPECT_NEAR(e2[i], factor * e1[i], 1e-10 * (1.0 + std::abs(e1[i])));
        }
    }
}

TEST(SchoutenConformal, CompositionLaw) {
    Gen gen(9);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = gen.integer(3, 5);
        const auto g = trial % 2 == 0 ? metrics::sphere_normal(n) : metrics::flat(n);
        const auto u = wiggly(n, gen.uniform(0.05, 0.3));
        const auto v = test_bubble(n, gen.uniform(0.5, 2.0), random_point(gen, n, 0.5));
        const Vector x = random_point(gen, n, 0.4);
        const Matrix direct = schouten_conformal(g, u.times(v), x);
        const Matrix composed = schouten_conformal(conformal_metric(g, u), v, x);
        EXPECT_LT(max_abs(direct - composed), 1e-6 * (1.0 + max_abs(direct)));
    }
}

// ---------------------------------------------------------------- eigen_rel

TEST(EigenRel, StandardEigenvalues) {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << 3, 1, 2;
    const auto e = eigen_rel(a, Matrix::Identity(3, 3));
    EXPECT_NEAR(e[0], 1.0, 1e-15);
    EXPECT_NEAR(e[1], 2.0, 1e-15);
    EXPECT_NEAR(e[2], 3.0, 1e-15);
}

TEST(EigenRel, ProportionalForms) {
    Gen gen(10);
    Matrix b = Matrix::Random(4, 4);
    const Matrix g = b * b.transpose() + 4 * Matrix::Identity(4, 4);
    const auto e = eigen_rel(2.5 * g, g);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(e[i], 2.5, 1e-13);
}

TEST(EigenRel, ConstructedInstance) {
    Gen gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = gen.integer(2, 8);
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = gen.normal();
        const Matrix g = b * b.transpose() + Matrix::Identity(n, n);
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        const Matrix root = es.operatorSqrt();
        Vector d(n);
        for (int i = 0; i < n; ++i) d[i] = gen.uniform(-5, 5);
        const Matrix a = root * d.asDiagonal() * root;
        const auto e = eigen_rel(a, g);
        std::sort(d.data(), d.data() + n);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(e[i], d[i], 1e-10);
    }
}

TEST(EigenRel, IndefiniteMetricThrows) {
    Matrix g = Matrix::Identity(3, 3);
    g(2, 2) = -1.0;
    EXPECT_THROW((void)eigen_rel(Matrix::Identity(3, 3), g), DomainError);
}

// ---------------------------------------------------------------- Ricci

TEST(RicciConformal, UnitFactorIsBackgroundRicci) {
    const int n = 5;
    const auto g = metrics::sphere_normal(n);
    const Vector x = Vector::Constant(n, 0.2);
    EXPECT_LT(max_abs(ricci_conformal(g, ConformalFactor::constant(n, 1.0), x) - ricci_background(g, x)), 1e-12);
    EXPECT_LT(max_abs(ricci_background(g, x) - (n - 1.0) * g.metric(x)), 1e-10);
}

TEST(RicciConformal, BubbleIsRoundSphere) {
    Gen gen(12);
    for (int n = 3; n <= 6; ++n) {
        const auto u = test_bubble(n, gen.uniform(0.3, 3.0), random_point(gen, n, 1.0));
        const Vector x = random_point(gen, n, 1.0);
        const Matrix gu = conformal_metric_at(metrics::flat(n), u, x);
        EXPECT_LT(max_abs(ricci_conformal(metrics::flat(n), u, x) - (n - 1.0) * gu), 1e-10 * (1.0 + max_abs(gu)));
    }
}

TEST(RicciConformal, MatchesFiniteDifferenceCurvatureOfConformalMetric) {
    Gen gen(13);
    for (int n = 3; n <= 5; ++n) {
        const auto u = wiggly(n, 0.3);
        const auto flat = metrics::flat(n);
        for (int s = 0; s < 3; ++s) {
            const Vector x = random_point(gen, n, 0.5);
            const Matrix expected = oracles::fd_ricci(
                [&](const Vector& y) { return std::pow(u.value(y), 4.0 / (n - 2)) * Matrix::Identity(n, n); }, x);
            EXPECT_LT(max_abs(ricci_conformal(flat, u, x) - expected), 1e-5);
        }
    }
}

// ---------------------------------------------------------------- margin

TEST(RicciLowerMargin, EinsteinCases) {
    Gen gen(14);
    for (int n = 3; n <= 6; ++n) {
        std::vector<Vector> pts;
        for (int s = 0; s < 8; ++s) pts.push_back(random_point(gen, n, 0.5));
        EXPECT_NEAR(ricci_lower_margin(metrics::sphere_normal(n), ConformalFactor::constant(n, 1.0), 0.0, pts), n - 1.0,
                    1e-9);
        EXPECT_NEAR(ricci_lower_margin(metrics::flat(n), test_bubble(n, 1.7, Vector::Zero(n)), 0.0, pts), n - 1.0, 1e-9);
    }
}

TEST(RicciLowerMargin, HyperbolicViolation) {
    Gen gen(15);
    for (int n = 3; n <= 6; ++n) {
        std::vector<Vector> pts;
        for (int s = 0; s < 8; ++s) pts.push_back(random_point(gen, n, 0.3));
        const auto u = factors::poincare_ball(n);
        const double alpha = 0.5;
        const double margin = ricci_lower_margin(metrics::flat(n), u, alpha, pts);
        EXPECT_LT(margin, 0.0);
        EXPECT_NEAR(margin, -(n - 1.0) * (1.0 - alpha * alpha), 1e-9);
        EXPECT_NEAR(ricci_lower_margin(metrics::flat(n), u, 1.0, pts), 0.0, 1e-9);
    }
}
