#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "property.hpp"
#include "sigmak/barriers.hpp"
#include "sigmak/errors.hpp"

using namespace sigmak;
using namespace sigmak::barriers;
using sigmak::testing::for_all;
using sigmak::testing::Gen;

namespace {

Matrix random_symmetric(Gen& gen, int n, double scale) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = scale * gen.normal();
    return m;
}

// Second-order central differences of a scalar radial profile.
RadialJet fd_radial(const std::function<double(double)>& v, double r, double h) {
    return {v(r), (v(r + h) - v(r - h)) / (2.0 * h), (v(r + h) - 2.0 * v(r) + v(r - h)) / (h * h)};
}

// chi coefficients of the super-solution written out term by term.
Chi super_chi_closed_form(double mu, double delta, double eps, double r) {
    const double rd = std::pow(r, delta);
    const double re = std::pow(r, 1.0 - mu);
    const double base = eps * re + 1.0 - rd;
    const double m1 = mu - 1.0;
    const double denom = m1 * m1 * r * r * base * base;
    Chi c;
    c.chi1 = 2.0 * (eps * m1 * re + delta * rd) * (m1 - (m1 + delta) * rd) / denom;
    c.chi2 = 2.0 / denom *
             (eps * m1 * m1 * (mu + 1.0) * re - eps * m1 * ((mu + delta) * (mu + delta) - 1.0) * re * rd -
              delta * (delta - 2.0) * m1 * rd - 2.0 * delta * (mu + delta - 1.0) * rd * rd);
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Eigenvalue pairing

TEST(Gershgorin, IdenticalMatrices) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 2.0;
    const auto res = gershgorin_pairing(m, m);
    EXPECT_DOUBLE_EQ(res.total_deviation, 0.0);
    EXPECT_DOUBLE_EQ(res.sharp_constant, 0.0);
    EXPECT_TRUE(res.within_bound);
    EXPECT_EQ(res.permutation, (std::vector<int>{0, 1}));
}

TEST(Gershgorin, TwoByTwoClosedForm) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 3.0;
    Matrix mt = m;
    mt(0, 1) = mt(1, 0) = 0.1;
    const auto res = gershgorin_pairing(m, mt);
    const double shift = std::sqrt(1.01) - 1.0;  // eigenvalues 2 -+ sqrt(1.01)
    EXPECT_NEAR(res.total_deviation, 2.0 * shift, 1e-14);
    EXPECT_LE(shift, 0.1);
    EXPECT_LE(res.total_deviation, 0.2);
    EXPECT_NEAR(res.perturbation_max, 0.1, 1e-15);
}

TEST(Gershgorin, RandomPairsWithinBound) {
    for (int n = 2; n <= 8; ++n) {
        EXPECT_TRUE(for_all(100 + n, 1000, [n](Gen& gen, int) {
            const Matrix m = random_symmetric(gen, n, 1.0);
            const double eps = std::pow(10.0, gen.uniform(-6.0, 0.0));
            const Matrix mt = m + random_symmetric(gen, n, eps);
            const auto res = gershgorin_pairing(m, mt);
            std::set<int> seen(res.permutation.begin(), res.permutation.end());
            if (static_cast<int>(seen.size()) != n) return ::testing::AssertionFailure() << "not a permutation";
            if (!res.within_bound)
                return ::testing::AssertionFailure() << "total " << res.total_deviation << " bound " << res.bound;
            return ::testing::AssertionSuccess();
        }));
    }
}

TEST(Gershgorin, RejectsBadInput) {
    Matrix a = Matrix::Identity(3, 3);
    Matrix b = Matrix::Identity(2, 2);
    EXPECT_THROW((void)gershgorin_pairing(a, b), std::invalid_argument);
    Matrix c = a;
    c(0, 1) = 1.0;
    EXPECT_THROW((void)gershgorin_pairing(a, c), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Sub-solution

TEST(SubSolution, Substitution) {
    const auto v = subsolution_eval(4, 0.1, 1.0);
    EXPECT_NEAR(v.value, 2.718281828459045, 1e-15);
    Gen gen(21);
    for (int t = 0; t < 100; ++t) {
        const int n = gen.integer(3, 8);
        const double d = gen.uniform(0.001, 0.249);
        const double r = gen.uniform(1e-3, 2.0);
        const auto s = subsolution_eval(n, d, r);
        EXPECT_NEAR(s.log_derivative + (n - 2 - 2 * d) / r - 1.0, 0.0, 1e-12 * (1.0 + 1.0 / r));
    }
}

TEST(SubSolution, MonotoneInDelta) {
    for (int n = 3; n <= 6; ++n) {
        for (double r = 0.01; r < 1.0; r += 0.05) {
            double prev = 0.0;
            for (double d : {0.2, 0.1, 0.05, 0.01, 0.001}) {
                const double v = subsolution_eval(n, d, r).value;
                EXPECT_GT(v, prev);
                prev = v;
            }
            EXPECT_LT(prev, std::pow(r, 2.0 - n) * std::exp(r));
        }
    }
}

TEST(SubSolution, DomainErrors) {
    EXPECT_THROW((void)subsolution_eval(4, 0.1, 0.0), DomainError);
    EXPECT_THROW((void)subsolution_eval(4, 0.1, -1.0), DomainError);
    EXPECT_THROW((void)subsolution_eval(4, 0.3, 0.5), DomainError);
    EXPECT_THROW((void)chi_coefficients_sub(4, 0.1, 1.8), DomainError);
    EXPECT_THROW((void)chi_coefficients_sub(4, 0.1, 2.5), DomainError);
}

TEST(SubSolution, ChiExamples) {
    const auto c = chi_coefficients_sub(4, 0.1, 0.01);
    EXPECT_NEAR(c.chi1, 1879.5, 1e-9);
    EXPECT_NEAR(c.chi2 - 2.0 * c.chi1, 100.0, 1e-9);
}

TEST(SubSolution, ChiIdentity) {
    EXPECT_TRUE(for_all(22, 1000, [](Gen& gen, int) {
        const int n = gen.integer(3, 10);
        const double d = gen.uniform(1e-4, 0.2499);
        const double a = n - 2.0 - 2.0 * d;
        const double r = gen.uniform(1e-3, 0.999) * a;
        const auto c = chi_coefficients_sub(n, d, r);
        const double expected = 2.0 / ((n - 2.0) * r);
        const double rel = std::abs((c.chi2 - 2.0 * c.chi1) - expected) / expected;
        if (rel > 1e-12) return ::testing::AssertionFailure() << "relative error " << rel;
        if (!(c.chi1 > 0.0)) return ::testing::AssertionFailure() << "chi1 = " << c.chi1;
        return ::testing::AssertionSuccess();
    }));
}

TEST(SubSolution, ChiMatchesDerivativesOfProfile) {
    Gen gen(23);
    for (int t = 0; t < 50; ++t) {
        const int n = gen.integer(3, 7);
        const double d = gen.uniform(0.01, 0.24);
        const double r = gen.uniform(0.05, 0.9) * (n - 2 - 2 * d);
        const auto fd = fd_radial([&](double s) { return subsolution_eval(n, d, s).value; }, r, 1e-4 * r);
        const auto ref = chi_from_radial(n, r, fd);
        const auto c = chi_coefficients_sub(n, d, r);
        EXPECT_NEAR(c.chi1, ref.chi1, 1e-5 * std::abs(ref.chi1) + 1e-6);
        EXPECT_NEAR(c.chi2, ref.chi2, 1e-5 * std::abs(ref.chi2) + 1e-6);
        const auto exact = chi_from_radial(n, r, subsolution_jet(n, d, r));
        EXPECT_NEAR(c.chi1, exact.chi1, 1e-11 * std::abs(c.chi1));
        EXPECT_NEAR(c.chi2, exact.chi2, 1e-11 * std::abs(c.chi2));
    }
}

// ---------------------------------------------------------------------------
// Super-solution

TEST(SuperSolution, Substitution) {
    EXPECT_NEAR(supersolution_eval(5, 1.5, 0.5, 0.1, 0.01), std::pow(1.9, 6), 1e-10);
    EXPECT_NEAR(std::pow(1.9, 6), 47.045881, 1e-12);
    EXPECT_NEAR(supersolution_eval(4, 1.5, 0.5, 0.0, 1e-12), 1.0, 1e-5);
}

TEST(SuperSolution, LeadingExponentNearOrigin) {
    // log v = (n-2)/(mu-1) log(eps r^{1-mu} (1 + q)), q = (1 - r^delta) r^{mu-1}/eps,
    // so the log-log slope differs from -(n-2) by at most (n-2) q.
    const double eps = 0.5;
    for (int n = 3; n <= 6; ++n) {
        for (double mu : {1.25, 1.5, 1.75}) {
            const double r0 = 1e-6;
            const double r1 = 1e-4;
            const double slope = (std::log(supersolution_eval(n, mu, 0.5, eps, r1)) -
                                  std::log(supersolution_eval(n, mu, 0.5, eps, r0))) /
                                 std::log(r1 / r0);
            EXPECT_NEAR(slope, -(n - 2.0), (n - 2.0) * std::pow(r1, mu - 1.0) / eps) << "n=" << n << " mu=" << mu;
        }
    }
}

TEST(SuperSolution, DomainErrors) {
    EXPECT_THROW((void)supersolution_eval(4, 1.5, 0.5, 0.1, 0.0), DomainError);
    EXPECT_THROW((void)supersolution_eval(4, 2.5, 0.5, 0.1, 0.1), DomainError);
    EXPECT_THROW((void)supersolution_eval(4, 1.5, 0.5, 0.0, 1.0), DomainError);  // base 0
    EXPECT_THROW((void)supersolution_eval(4, 1.5, 0.5, 0.0, 2.0), DomainError);  // base < 0
}

TEST(SuperSolution, ChiMatchesTermwiseClosedForm) {
    EXPECT_TRUE(for_all(24, 500, [](Gen& gen, int) {
        const int n = gen.integer(3, 8);
        const double mu = gen.uniform(1.01, 1.99);
        const double d = gen.uniform(0.01, 0.99);
        const double e = gen.uniform(1e-3, 0.99);
        const double r = std::pow(10.0, gen.uniform(-4.0, -0.5));
        const auto c = chi_coefficients_super(n, mu, d, e, r);
        const auto ref = super_chi_closed_form(mu, d, e, r);
        // The closed forms are independent of n.
        const double s = std::abs(ref.chi1) + std::abs(ref.chi2);
        if (std::abs(c.chi1 - ref.chi1) > 1e-10 * s || std::abs(c.chi2 - ref.chi2) > 1e-10 * s)
            return ::testing::AssertionFailure() << "chi mismatch";
        const double base = e * std::pow(r, 1.0 - mu) + 1.0 - std::pow(r, d);
        const double gap = -2.0 * d * (mu - 1.0 + d) / ((mu - 1.0) * std::pow(r, 2.0 - d) * base);
        if (std::abs((c.chi2 - (mu + 1.0) * c.chi1) - gap) > 1e-9 * s) return ::testing::AssertionFailure() << "gap";
        if (!(gap < 0.0)) return ::testing::AssertionFailure() << "gap sign";
        return ::testing::AssertionSuccess();
    }));
}

TEST(RadialFactor, JetMatchesFiniteDifferences) {
    const int n = 4;
    const auto u = radial_factor(n, [](double r) { return subsolution_jet(4, 0.1, r); }, "v");
    Gen gen(25);
    for (int t = 0; t < 20; ++t) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = gen.uniform(0.1, 0.5);
        const auto jet = u.derivatives(x);
        const auto g = oracles::fd_gradient([&](const Eigen::VectorXd& y) { return u.value(y); }, x, 1e-6);
        EXPECT_LT((g - jet.grad).cwiseAbs().maxCoeff(), 1e-6 * jet.grad.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i) {
            const auto row = oracles::fd_gradient([&](const Eigen::VectorXd& y) { return u.derivatives(y).grad[i]; }, x, 1e-6);
            EXPECT_LT((row - jet.hess.row(i).transpose()).cwiseAbs().maxCoeff(), 1e-5 * jet.hess.cwiseAbs().maxCoeff());
        }
    }
    EXPECT_THROW((void)u.value(Vector::Zero(n)), DomainError);
}

// ---------------------------------------------------------------------------
// Sweeps

TEST(SubSweep, FlatGammaTwoInFourDimensions) {
    auto cfg = BarrierSweepConfig::sub_default(4, 2);
    cfg.background = Background::Flat;
    const auto rep = barrier_sweep_sub(cfg);
    EXPECT_TRUE(rep.pass);
    EXPECT_GE(rep.r1, 1e-2);
    EXPECT_LT(rep.worst_margin, 0.0);
    // On flat space the radial closed form is exact.
    EXPECT_LT(rep.max_remainder_constant, 1e-6);
    EXPECT_EQ(rep.samples.size(), 4u * 64u * 8u);
}

TEST(SubSweep, SphereBackgroundCertifies) {
    for (auto [n, k] : std::vector<std::pair<int, int>>{{3, 2}, {4, 2}, {4, 4}, {6, 3}}) {
        const auto rep = barrier_sweep_sub(BarrierSweepConfig::sub_default(n, k));
        EXPECT_TRUE(rep.pass) << n << "," << k;
        EXPECT_GE(rep.r1, 1e-2);
        for (const auto& s : rep.samples) ASSERT_LT(s.margin, 0.0);
        EXPECT_LT(rep.max_remainder_constant, 10.0);
    }
}

TEST(SubSweep, NegativeControlFailsAtSmallRadius) {
    auto cfg = BarrierSweepConfig::sub_default(4, 1);
    EXPECT_THROW((void)barrier_sweep_sub(cfg), ConfigError);
    cfg.check_precondition = false;
    const auto rep = barrier_sweep_sub(cfg);
    EXPECT_FALSE(rep.pass);
    ASSERT_TRUE(rep.first_failure.has_value());
    EXPECT_LT(rep.first_failure->r, 1e-3);
    EXPECT_GT(rep.first_failure->margin, 0.0);
}

TEST(SubSweep, RejectsBadGrid) {
    auto cfg = BarrierSweepConfig::sub_default(4, 2);
    cfg.deltas = {0.3};
    EXPECT_THROW((void)barrier_sweep_sub(cfg), ConfigError);
    cfg = BarrierSweepConfig::sub_default(4, 2);
    cfg.r_min = 0.0;
    EXPECT_THROW((void)barrier_sweep_sub(cfg), ConfigError);
}

TEST(SuperSweep, GammaOneInFourDimensions) {
    auto cfg = BarrierSweepConfig::super_default(4, 1);
    cfg.mus = {1.5};
    const auto rep = barrier_sweep_super(cfg);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.eps_uniform);
    for (const auto& s : rep.samples) {
        ASSERT_GT(s.margin, 0.0);
        ASSERT_LT(s.chi_gap, 0.0);
    }
}

TEST(SuperSweep, GammaTwoInFiveDimensions) {
    auto cfg = BarrierSweepConfig::super_default(5, 2);
    cfg.mus = {1.25};
    const auto rep = barrier_sweep_super(cfg);
    EXPECT_TRUE(rep.pass);
    EXPECT_GT(rep.worst_margin, 0.0);
    EXPECT_LT(rep.max_remainder_constant, 10.0);
}

TEST(SuperSweep, PreconditionViolated) {
    EXPECT_THROW((void)barrier_sweep_super(BarrierSweepConfig::super_default(4, 2)), ConfigError);
    auto cfg = BarrierSweepConfig::super_default(5, 2);
    cfg.mus = {1.6};  // mu+ = 1.5
    EXPECT_THROW((void)barrier_sweep_super(cfg), ConfigError);
}

TEST(SuperSweep, VerdictUniformInEps) {
    auto cfg = BarrierSweepConfig::super_default(6, 2);
    cfg.background = Background::Flat;
    const auto rep = barrier_sweep_super(cfg);
    EXPECT_TRUE(rep.pass);
    EXPECT_TRUE(rep.eps_uniform);
}

TEST(SweepCsv, HeaderAndRows) {
    auto cfg = BarrierSweepConfig::sub_default(3, 2);
    cfg.background = Background::Flat;
    cfg.deltas = {0.1};
    cfg.r_nodes = 4;
    cfg.directions = 2;
    const auto rep = barrier_sweep_sub(cfg);
    std::ostringstream os;
    write_sweep_csv(os, rep);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "n,k,delta,mu,eps,r,margin,pass");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 8);
}

TEST(SweepParallel, SameResultWithThreads) {
    auto cfg = BarrierSweepConfig::sub_default(4, 3);
    cfg.r_nodes = 16;
    const auto serial = barrier_sweep_sub(cfg);
    cfg.jobs = 3;
    const auto threaded = barrier_sweep_sub(cfg);
    ASSERT_EQ(serial.samples.size(), threaded.samples.size());
    for (std::size_t i = 0; i < serial.samples.size(); ++i)
        EXPECT_EQ(serial.samples[i].margin, threaded.samples[i].margin);
}

// ---------------------------------------------------------------------------
// Conformal-Laplacian barrier

TEST(SupH, FlatLaplacianOfPowers) {
    const int n = 4;
    const auto flat = conformal::metrics::flat(n);
    for (double alpha : {2.0 - n, 2.5 - n, 1.5, -0.5}) {
        const auto u = radial_factor(
            n,
            [alpha](double r) {
                return RadialJet{std::pow(r, alpha), alpha * std::pow(r, alpha - 1.0),
                                 alpha * (alpha - 1.0) * std::pow(r, alpha - 2.0)};
            },
            "r^a");
        Vector x(n);
        x << 0.1, -0.2, 0.05, 0.3;
        const double r = x.norm();
        EXPECT_NEAR(conformal::laplacian(flat, u.derivatives(x), x), alpha * (alpha + n - 2.0) * std::pow(r, alpha - 2.0),
                    1e-10 * std::pow(r, alpha - 2.0));
    }
}

TEST(SupH, FlatCertifies) {
    for (int n = 3; n <= 6; ++n) {
        const auto rep = suph_barrier_check(conformal::metrics::flat(n), 1.0, 0.1);
        EXPECT_TRUE(rep.pass) << n;
        EXPECT_GT(rep.min_LG, 0.0);
        EXPECT_GE(rep.min_G, -1e-12 * std::pow(0.1, 2.0 - n));
        for (const auto& [name, ok] : rep.monotone) EXPECT_TRUE(ok) << name;
        EXPECT_LT(rep.bounded_w_limit, 1e-3);
    }
}

TEST(SupH, SphereNormalCertifies) {
    for (int n = 3; n <= 5; ++n) {
        const auto rep = suph_barrier_check(conformal::metrics::sphere_normal(n), 1.0, 0.1);
        EXPECT_TRUE(rep.pass) << n << " min LG " << rep.min_LG;
    }
}

TEST(SupH, GVanishesAtOuterRadius) {
    EXPECT_NEAR(suph_G(4, 2.0, 0.05, 0.05), 0.0, 1e-12);
    EXPECT_GT(suph_G(4, 2.0, 0.05, 0.01), 0.0);
}
