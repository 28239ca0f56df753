#include "sigmak/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sigmak/errors.hpp"
#include "sigmak/parallel.hpp"

namespace sigmak::barriers {

// ---------------------------------------------------------------------------
// Eigenvalue continuity

GershgorinResult gershgorin_pairing(const Matrix& m, const Matrix& mt) {
    const auto n = m.rows();
    if (m.cols() != n || mt.rows() != n || mt.cols() != n)
        throw std::invalid_argument("gershgorin_pairing: size mismatch");
    const double sym_tol = 1e-12 * std::max(1.0, std::max(m.cwiseAbs().maxCoeff(), mt.cwiseAbs().maxCoeff()));
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol || (mt - mt.transpose()).cwiseAbs().maxCoeff() > sym_tol)
        throw std::invalid_argument("gershgorin_pairing: matrices must be symmetric");

    Eigen::SelfAdjointEigenSolver<Matrix> em(m);
    Eigen::SelfAdjointEigenSolver<Matrix> et(mt, Eigen::EigenvaluesOnly);
    const Vector lambda = em.eigenvalues();
    const Vector lambda_t = et.eigenvalues();
    const Matrix rotated = em.eigenvectors().transpose() * mt * em.eigenvectors();

    // Sorting both the eigenvalues of Mt and the diagonal of the rotated Mt and
    // matching in order is the L1-optimal Gershgorin arrangement.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rotated(a, a) < rotated(b, b); });

    GershgorinResult out;
    out.permutation.assign(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) out.permutation[static_cast<std::size_t>(order[j])] = j;
    for (int i = 0; i < n; ++i) out.total_deviation += std::abs(lambda[i] - lambda_t[out.permutation[i]]);
    out.perturbation_max = (m - mt).cwiseAbs().maxCoeff();
    out.bound = static_cast<double>(n * n) * out.perturbation_max;
    out.sharp_constant = out.perturbation_max > 0.0 ? out.total_deviation / out.perturbation_max : 0.0;
    out.within_bound = out.total_deviation <= out.bound * (1.0 + 1e-12) + 1e-300;
    return out;
}

// ---------------------------------------------------------------------------
// Radial profiles

Chi chi_from_radial(int n, double r, const RadialJet& v) {
    const double m = n - 2.0;
    const double l = v.d1 / v.value;
    Chi c;
    c.chi1 = -2.0 / m * l / r - 2.0 / (m * m) * l * l;
    c.chi2 = 2.0 / m * (v.d2 / v.value - l / r) - 2.0 * n / (m * m) * l * l;
    return c;
}

namespace {

void check_sub(int n, double delta, double r) {
    if (n < 3) throw std::invalid_argument("sub-solution: n must be >= 3");
    if (!(delta > 0.0 && delta < 0.25)) throw DomainError(fmt::format("sub-solution: delta = {} not in (0, 1/4)", delta));
    if (!(r > 0.0)) throw DomainError(fmt::format("sub-solution: r = {} must be positive", r));
}

double super_base(double mu, double delta, double eps, double r) {
    return eps * std::pow(r, 1.0 - mu) + 1.0 - std::pow(r, delta);
}

void check_super(int n, double mu, double delta, double eps, double r) {
    if (n < 3) throw std::invalid_argument("super-solution: n must be >= 3");
    if (!(mu > 1.0 && mu < 2.0)) throw DomainError(fmt::format("super-solution: mu = {} not in (1, 2)", mu));
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError(fmt::format("super-solution: delta = {} not in (0, 1)", delta));
    if (!(eps >= 0.0 && eps < 1.0)) throw DomainError(fmt::format("super-solution: eps = {} not in [0, 1)", eps));
    if (!(r > 0.0)) throw DomainError(fmt::format("super-solution: r = {} must be positive", r));
    const double base = super_base(mu, delta, eps, r);
    if (!(base > 0.0)) throw DomainError(fmt::format("super-solution: base {} is not positive at r = {}", base, r));
}

}  // namespace

RadialValue subsolution_eval(int n, double delta, double r) {
    check_sub(n, delta, r);
    const double a = n - 2.0 - 2.0 * delta;
    return {std::pow(r, -a) * std::exp(r), -a / r + 1.0};
}

RadialJet subsolution_jet(int n, double delta, double r) {
    const auto v = subsolution_eval(n, delta, r);
    const double a = n - 2.0 - 2.0 * delta;
    const double l = v.log_derivative;
    return {v.value, v.value * l, v.value * (l * l + a / (r * r))};
}

Chi chi_coefficients_sub(int n, double delta, double r) {
    check_sub(n, delta, r);
    if (r >= n - 2.0 - 2.0 * delta)
        throw DomainError(fmt::format("chi_coefficients_sub: r = {} >= a = {}", r, n - 2.0 - 2.0 * delta));
    // Extended precision keeps chi2 - 2 chi1 accurate when r is small and both
    // coefficients are much larger than their difference.
    using L = long double;
    const L m = n - 2.0L;
    const L a = m - 2.0L * delta;
    const L rl = r;
    const L pre = 2.0L / (m * m * rl * rl);
    return {static_cast<double>(pre * (a - rl) * (2.0L * delta + rl)),
            static_cast<double>(pre * (m * (2.0L * a - rl) - 2.0L * (rl - a) * (rl - a)))};
}

double supersolution_eval(int n, double mu, double delta, double eps, double r) {
    check_super(n, mu, delta, eps, r);
    return std::pow(super_base(mu, delta, eps, r), (n - 2.0) / (mu - 1.0));
}

RadialJet supersolution_jet(int n, double mu, double delta, double eps, double r) {
    check_super(n, mu, delta, eps, r);
    const double p = (n - 2.0) / (mu - 1.0);
    const double b = super_base(mu, delta, eps, r);
    const double b1 = eps * (1.0 - mu) * std::pow(r, -mu) - delta * std::pow(r, delta - 1.0);
    const double b2 = eps * (1.0 - mu) * (-mu) * std::pow(r, -mu - 1.0) - delta * (delta - 1.0) * std::pow(r, delta - 2.0);
    const double v = std::pow(b, p);
    const double l = p * b1 / b;
    return {v, v * l, v * (p * (p - 1.0) * (b1 / b) * (b1 / b) + p * b2 / b)};
}

Chi chi_coefficients_super(int n, double mu, double delta, double eps, double r) {
    return chi_from_radial(n, r, supersolution_jet(n, mu, delta, eps, r));
}

conformal::ConformalFactor radial_factor(int n, std::function<RadialJet(double)> profile, std::string name) {
    auto value = [profile](const Vector& x) {
        const double r = x.norm();
        if (!(r > 0.0)) throw DomainError("radial factor evaluated at the origin");
        return profile(r).value;
    };
    auto jet = [n, profile](const Vector& x) {
        const double r = x.norm();
        if (!(r > 0.0)) throw DomainError("radial factor evaluated at the origin");
        const auto v = profile(r);
        const Vector e = x / r;
        conformal::ScalarJet out;
        out.value = v.value;
        out.grad = v.d1 * e;
        out.hess = (v.d1 / r) * Matrix::Identity(n, n) + (v.d2 - v.d1 / r) * (e * e.transpose());
        return out;
    };
    return conformal::ConformalFactor(n, std::move(value), std::move(jet), std::move(name));
}

// ---------------------------------------------------------------------------
// Sweeps

std::string to_string(Background b) { return b == Background::Flat ? "flat" : "sphere"; }

Background background_from_string(const std::string& s) {
    if (s == "flat") return Background::Flat;
    if (s == "sphere") return Background::SphereNormal;
    throw ConfigError(fmt::format("unknown background '{}' (expected flat or sphere)", s));
}

BarrierSweepConfig BarrierSweepConfig::sub_default(int n, int k) {
    BarrierSweepConfig c;
    c.n = n;
    c.k = k;
    c.deltas = {0.01, 0.05, 0.1, 0.2};
    return c;
}

BarrierSweepConfig BarrierSweepConfig::super_default(int n, int k) {
    BarrierSweepConfig c;
    c.n = n;
    c.k = k;
    c.deltas = {0.25, 0.5};
    c.epsilons = {1e-3, 0.1, 0.9};
    c.r1_floor = 1e-3;
    const double top = std::min(static_cast<double>(n - k) / k, 2.0);
    for (int i = 1; i <= 3; ++i) c.mus.push_back(1.0 + (top - 1.0) * i / 4.0);
    return c;
}

namespace {

struct Case {
    double delta = 0.0;
    double mu = 0.0;
    double eps = 0.0;
    std::function<RadialJet(double)> profile;
};

enum class Side { Outside, Inside };

void check_grid(const BarrierSweepConfig& cfg) {
    if (cfg.n < 3 || cfg.k < 1 || cfg.k > cfg.n) throw ConfigError(fmt::format("invalid (n, k) = ({}, {})", cfg.n, cfg.k));
    if (!(cfg.r_min > 0.0)) throw ConfigError("r_min must be positive");
    if (!(cfg.r1_start > cfg.r_min)) throw ConfigError("r1_start must exceed r_min");
    if (!(cfg.r1_floor > cfg.r_min)) throw ConfigError("r1_floor must exceed r_min");
    if (cfg.r_nodes < 2) throw ConfigError("r_nodes must be >= 2");
    if (cfg.directions < 1) throw ConfigError("directions must be >= 1");
    if (cfg.deltas.empty()) throw ConfigError("delta grid is empty");
}

std::vector<Vector> directions(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Vector> out;
    for (int d = 0; d < count; ++d) {
        Vector v(n);
        if (d == 0) {
            v = Vector::Unit(n, 0);
        } else {
            do {
                for (int i = 0; i < n; ++i) v[i] = normal(rng);
            } while (v.norm() < 1e-8);
        }
        out.push_back(v.normalized());
    }
    return out;
}

std::vector<double> radii(double r_min, double r1, int nodes) {
    std::vector<double> out;
    for (int j = 1; j <= nodes; ++j) out.push_back(r_min * std::pow(r1 / r_min, static_cast<double>(j) / nodes));
    out.back() = r1;
    return out;
}

conformal::MetricField make_background(const BarrierSweepConfig& cfg) {
    return cfg.background == Background::Flat ? conformal::metrics::flat(cfg.n) : conformal::metrics::sphere_normal(cfg.n);
}

SweepSample evaluate(const BarrierSweepConfig& cfg, const conformal::MetricField& bg, const cones::ConeSpec& cone,
                     const Case& c, Side side, double r, int dir, const Vector& e) {
    const int n = cfg.n;
    const Vector x = r * e;
    const auto u = radial_factor(n, c.profile, "barrier");
    const auto lambda = conformal::eigen_rel(conformal::schouten_conformal(bg, u, x), conformal::conformal_metric_at(bg, u, x));

    const RadialJet v = c.profile(r);
    const Chi chi = chi_from_radial(n, r, v);
    const double scale = std::pow(v.value, -4.0 / (n - 2.0));
    std::vector<double> predicted(static_cast<std::size_t>(n), scale * chi.chi1);
    predicted[0] = scale * (chi.chi1 - chi.chi2);
    std::sort(predicted.begin(), predicted.end());
    double dev = 0.0;
    for (int i = 0; i < n; ++i) dev += std::abs(lambda[i] - predicted[static_cast<std::size_t>(i)]);
    const double l = std::abs(v.d1 / v.value);

    SweepSample s;
    s.n = n;
    s.k = cfg.k;
    s.delta = c.delta;
    s.mu = c.mu;
    s.eps = c.eps;
    s.r = r;
    s.direction = dir;
    s.margin = cones::cone_margin(lambda, cone);
    s.relative_margin = s.margin / lambda.values().cwiseAbs().maxCoeff();
    s.remainder_constant = dev / (scale * (1.0 + r * l + r * r * l * l));
    if (side == Side::Outside) {
        s.chi_gap = chi.chi2 - 2.0 * chi.chi1;
        s.pass = s.margin < 0.0;
    } else {
        s.chi_gap = chi.chi2 - (c.mu + 1.0) * chi.chi1;
        s.pass = s.margin > 0.0 && s.chi_gap < 0.0;
    }
    return s;
}

struct GroupResult {
    double r1 = 0.0;
    bool certified = false;
    bool eps_uniform = true;
    std::vector<SweepLevel> levels;
    std::vector<SweepSample> samples;
};

// Dyadic descent from r1_start: the first level at which every sample of every
// case passes is certified; stop below r1_floor.
GroupResult descend(const BarrierSweepConfig& cfg, const std::vector<Case>& cases, Side side) {
    const auto bg = make_background(cfg);
    const auto cone = cones::ConeSpec::gamma_k(cfg.n, cfg.k);
    const auto dirs = directions(cfg.n, cfg.directions, cfg.seed);
    GroupResult out;
    for (double r1 = cfg.r1_start; r1 >= cfg.r1_floor * (1.0 - 1e-12); r1 *= 0.5) {
        const auto rs = radii(cfg.r_min, r1, cfg.r_nodes);
        const std::size_t per_case = rs.size() * dirs.size();
        std::vector<SweepSample> samples(cases.size() * per_case);
        parallel_for(samples.size(), cfg.jobs, [&](std::size_t idx) {
            const std::size_t ci = idx / per_case;
            const std::size_t rem = idx % per_case;
            const std::size_t ri = rem / dirs.size();
            const std::size_t di = rem % dirs.size();
            samples[idx] = evaluate(cfg, bg, cone, cases[ci], side, rs[ri], static_cast<int>(di), dirs[di]);
        });
        SweepLevel level{r1, true, 0};
        std::vector<int> case_pass(cases.size(), 1);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!samples[i].pass) {
                level.pass = false;
                ++level.failures;
                case_pass[i / per_case] = 0;
            }
        }
        out.eps_uniform =
            std::adjacent_find(case_pass.begin(), case_pass.end(), std::not_equal_to<>()) == case_pass.end();
        out.levels.push_back(level);
        out.samples = std::move(samples);
        if (level.pass) {
            out.r1 = r1;
            out.certified = true;
            break;
        }
    }
    return out;
}

void summarize(SweepReport& report, Side side) {
    const double inf = std::numeric_limits<double>::infinity();
    report.worst_margin = side == Side::Outside ? -inf : inf;
    report.worst_relative_margin = report.worst_margin;
    auto worse = [side](double a, double b) { return side == Side::Outside ? std::max(a, b) : std::min(a, b); };
    for (const auto& s : report.samples) {
        report.worst_margin = worse(report.worst_margin, s.margin);
        report.worst_relative_margin = worse(report.worst_relative_margin, s.relative_margin);
        report.max_remainder_constant = std::max(report.max_remainder_constant, s.remainder_constant);
        if (!s.pass && !report.first_failure) report.first_failure = s;
    }
}

}  // namespace

SweepReport barrier_sweep_sub(const BarrierSweepConfig& cfg) {
    check_grid(cfg);
    const double mu_p = cones::mu_plus(cones::ConeSpec::gamma_k(cfg.n, cfg.k));
    if (cfg.check_precondition && mu_p > 1.0 + 1e-12)
        throw ConfigError(fmt::format("sub-solution sweep needs mu+ <= 1, got {} for Gamma_{} in dimension {}", mu_p,
                                      cfg.k, cfg.n));
    std::vector<Case> cases;
    for (double d : cfg.deltas) {
        if (!(d > 0.0 && d < 0.25)) throw ConfigError(fmt::format("delta = {} not in (0, 1/4)", d));
        const int n = cfg.n;
        cases.push_back({d, 0.0, 0.0, [n, d](double r) { return subsolution_jet(n, d, r); }});
    }
    const auto group = descend(cfg, cases, Side::Outside);
    SweepReport report;
    report.kind = "sub";
    report.n = cfg.n;
    report.k = cfg.k;
    report.background = cfg.background;
    report.r1 = group.r1;
    report.pass = group.certified;
    report.levels = group.levels;
    report.samples = group.samples;
    summarize(report, Side::Outside);
    return report;
}

SweepReport barrier_sweep_super(const BarrierSweepConfig& cfg) {
    check_grid(cfg);
    const double mu_p = cones::mu_plus(cones::ConeSpec::gamma_k(cfg.n, cfg.k));
    if (cfg.check_precondition && mu_p <= 1.0 + 1e-12)
        throw ConfigError(fmt::format("super-solution sweep needs mu+ > 1, got {} for Gamma_{} in dimension {}", mu_p,
                                      cfg.k, cfg.n));
    if (cfg.mus.empty() || cfg.epsilons.empty()) throw ConfigError("mu and eps grids must be nonempty");
    const double top = cfg.check_precondition ? std::min(mu_p, 2.0) : 2.0;
    for (double mu : cfg.mus)
        if (!(mu > 1.0 && mu < top)) throw ConfigError(fmt::format("mu = {} not in (1, {})", mu, top));
    for (double d : cfg.deltas)
        if (!(d > 0.0 && d < 1.0)) throw ConfigError(fmt::format("delta = {} not in (0, 1)", d));
    for (double e : cfg.epsilons)
        if (!(e > 0.0 && e < 1.0)) throw ConfigError(fmt::format("eps = {} not in (0, 1)", e));
    if (cfg.r1_start >= 1.0) throw ConfigError("super-solution sweep needs r1_start < 1");

    SweepReport report;
    report.kind = "super";
    report.n = cfg.n;
    report.k = cfg.k;
    report.background = cfg.background;
    report.pass = true;
    report.r1 = cfg.r1_start;
    for (double mu : cfg.mus) {
        for (double d : cfg.deltas) {
            std::vector<Case> cases;
            const int n = cfg.n;
            for (double e : cfg.epsilons)
                cases.push_back({d, mu, e, [n, mu, d, e](double r) { return supersolution_jet(n, mu, d, e, r); }});
            auto group = descend(cfg, cases, Side::Inside);
            report.pass = report.pass && group.certified;
            report.eps_uniform = report.eps_uniform && group.eps_uniform;
            report.r1 = std::min(report.r1, group.certified ? group.r1 : 0.0);
            report.levels.insert(report.levels.end(), group.levels.begin(), group.levels.end());
            report.samples.insert(report.samples.end(), group.samples.begin(), group.samples.end());
        }
    }
    summarize(report, Side::Inside);
    return report;
}

void write_sweep_csv(std::ostream& os, const SweepReport& report) {
    os << "n,k,delta,mu,eps,r,margin,pass\n";
    for (const auto& s : report.samples) {
        os << fmt::format("{},{},{},{},{},{:.17g},{:.17g},{}\n", s.n, s.k, s.delta, s.mu, s.eps, s.r, s.margin,
                          s.pass ? 1 : 0);
    }
}

// ---------------------------------------------------------------------------
// Conformal-Laplacian barrier

double suph_G(int n, double K, double delta, double r) {
    auto phi = [n, K](double s) { return std::pow(s, 2.0 - n) - K * std::pow(s, 2.5 - n); };
    return phi(r) - phi(delta);
}

SupHReport suph_barrier_check(const conformal::MetricField& g, double K, double delta, int nodes, int directions_count,
                              double inner_fraction) {
    const int n = g.dim();
    if (!(K > 0.0 && delta > 0.0 && inner_fraction > 0.0 && inner_fraction < 1.0) || nodes < 2)
        throw std::invalid_argument("suph_barrier_check: invalid parameters");
    const double cn = (n - 2.0) / (4.0 * (n - 1.0));
    const double c_delta = std::pow(delta, 2.0 - n) - K * std::pow(delta, 2.5 - n);

    const auto G = radial_factor(
        n,
        [n, K, c_delta](double r) {
            const double a = 2.0 - n;
            const double b = 2.5 - n;
            return RadialJet{std::pow(r, a) - K * std::pow(r, b) - c_delta,
                             a * std::pow(r, a - 1.0) - K * b * std::pow(r, b - 1.0),
                             a * (a - 1.0) * std::pow(r, a - 2.0) - K * b * (b - 1.0) * std::pow(r, b - 2.0)};
        },
        "G");

    SupHReport out;
    out.K = K;
    out.delta = delta;
    out.min_G = std::numeric_limits<double>::infinity();
    out.min_LG = std::numeric_limits<double>::infinity();
    const auto rs = radii(delta * inner_fraction, delta, nodes);
    const auto dirs = directions(n, directions_count, 7);
    for (double r : rs) {
        for (const auto& e : dirs) {
            const Vector x = r * e;
            const auto jet = G.derivatives(x);
            const double lg = conformal::laplacian(g, jet, x) - cn * conformal::scalar_curvature(g, x) * jet.value;
            out.min_G = std::min(out.min_G, jet.value);
            out.min_LG = std::min(out.min_LG, lg);
        }
    }

    std::vector<double> grid{delta * inner_fraction};
    for (double r : rs) grid.push_back(r);
    grid.pop_back();  // G vanishes at delta itself
    const std::vector<std::pair<std::string, std::function<double(double)>>> probes{
        {"r^(2-n)", [n](double r) { return std::pow(r, 2.0 - n); }},
        {"r^(2-n)+1", [n](double r) { return std::pow(r, 2.0 - n) + 1.0; }},
        {"2-r^2", [](double r) { return 2.0 - r * r; }},
        {"1", [](double) { return 1.0; }},
    };
    bool monotone_all = true;
    for (const auto& [name, w] : probes) {
        bool ok = true;
        double prev = -std::numeric_limits<double>::infinity();
        for (double r : grid) {
            const double ratio = w(r) / suph_G(n, K, delta, r);
            if (ratio < prev * (1.0 - 1e-12)) ok = false;
            prev = ratio;
        }
        out.monotone.emplace_back(name, ok);
        monotone_all = monotone_all && ok;
    }
    out.bounded_w_limit = std::pow(grid.front(), n - 2.0);
    // G(delta) = 0 is computed as a difference of O(delta^{2-n}) terms.
    const double g_tol = 1e-12 * std::pow(delta, 2.0 - n);
    out.pass = out.min_G >= -g_tol && out.min_LG >= 0.0 && monotone_all;
    return out;
}

}  // namespace sigmak::barriers
