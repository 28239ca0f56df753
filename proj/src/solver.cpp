#include "sigmak/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "sigmak/parallel.hpp"

namespace sigmak::solver {

namespace {

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void zero_row_sums(Matrix& m) {
    for (int i = 0; i < m.rows(); ++i) m(i, i) -= m.row(i).sum();
}

double sphere_area(int n) {  // |S^n|
    return 2.0 * std::pow(std::numbers::pi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

void require_positive(const Vector& u, const char* where) {
    for (int j = 0; j < u.size(); ++j)
        if (!(u[j] > 0.0)) throw DomainError(fmt::format("{}: u = {} at node {} is not positive", where, u[j], j));
}

}  // namespace

std::string to_string(Discretization d) { return d == Discretization::Chebyshev ? "chebyshev" : "fd"; }

Discretization discretization_from_string(const std::string& s) {
    if (s == "chebyshev") return Discretization::Chebyshev;
    if (s == "fd") return Discretization::UniformFD;
    throw ConfigError(fmt::format("unknown discretization '{}' (expected chebyshev or fd)", s));
}

std::shared_ptr<const RadialGrid> RadialGrid::make(int n, int nodes, Discretization kind) {
    if (n < 3) throw std::invalid_argument("RadialGrid: n must be >= 3");
    if (nodes < 5) throw std::invalid_argument("RadialGrid: need at least 5 nodes");
    std::shared_ptr<RadialGrid> g(new RadialGrid());
    g->n_ = n;
    g->kind_ = kind;
    const int last = nodes - 1;
    const double pi = std::numbers::pi;

    g->theta_.resize(nodes);
    Vector x(nodes), sn(nodes);
    for (int j = 0; j < nodes; ++j) {
        g->theta_[j] = pi * j / last;
        x[j] = std::cos(g->theta_[j]);
        sn[j] = std::sin(g->theta_[j]);
    }
    sn[0] = sn[last] = 0.0;
    x[0] = 1.0;
    x[last] = -1.0;

    // Weights: integrate the Chebyshev interpolant against sin^{n-1}(theta).
    // I_k = int_0^pi cos(k theta) sin^q(theta) d theta obeys
    // I_{k+2} = I_k (k - q) / (k + q + 2).
    const double q = n - 1.0;
    std::vector<double> moments(static_cast<std::size_t>(nodes), 0.0);
    moments[0] = std::sqrt(pi) * std::tgamma((q + 1.0) / 2.0) / std::tgamma(q / 2.0 + 1.0);
    for (int k = 0; k + 2 <= last; k += 2)
        moments[static_cast<std::size_t>(k + 2)] = moments[static_cast<std::size_t>(k)] * (k - q) / (k + q + 2.0);
    const double shell = sphere_area(n - 1);
    g->weights_ = Vector::Zero(nodes);
    for (int j = 0; j <= last; ++j) {
        const double cj = (j == 0 || j == last) ? 2.0 : 1.0;
        double acc = 0.0;
        for (int k = 0; k <= last; k += 2) {
            const double ck = (k == 0 || k == last) ? 2.0 : 1.0;
            acc += 2.0 / (last * ck * cj) * std::cos(pi * static_cast<double>(k) * j / last) *
                   moments[static_cast<std::size_t>(k)];
        }
        g->weights_[j] = shell * acc;
    }
    g->volume_ = sphere_area(n);

    if (kind == Discretization::Chebyshev) {
        Matrix d = Matrix::Zero(nodes, nodes);
        for (int i = 0; i <= last; ++i) {
            const double ci = (i == 0 || i == last) ? 2.0 : 1.0;
            for (int j = 0; j <= last; ++j) {
                if (i == j) continue;
                const double cj = (j == 0 || j == last) ? 2.0 : 1.0;
                // x_i - x_j without cancellation.
                const double diff = -2.0 * std::sin(pi * (i + j) / (2.0 * last)) * std::sin(pi * (i - j) / (2.0 * last));
                d(i, j) = (ci / cj) * (((i + j) % 2 == 0) ? 1.0 : -1.0) / diff;
            }
        }
        zero_row_sums(d);
        const Matrix dd = d * d;
        g->d1_ = -(sn.asDiagonal() * d);
        g->tan_ = -(x.asDiagonal() * d);
        g->d2_ = sn.cwiseProduct(sn).asDiagonal() * dd + Matrix(g->tan_);
        zero_row_sums(g->d1_);
        zero_row_sums(g->tan_);
        zero_row_sums(g->d2_);
        g->d1_.row(0).setZero();
        g->d1_.row(last).setZero();
    } else {
        const double h = pi / last;
        g->d1_ = Matrix::Zero(nodes, nodes);
        g->d2_ = Matrix::Zero(nodes, nodes);
        g->tan_ = Matrix::Zero(nodes, nodes);
        for (int j = 1; j < last; ++j) {
            g->d1_(j, j - 1) = -0.5 / h;
            g->d1_(j, j + 1) = 0.5 / h;
            g->d2_(j, j - 1) = 1.0 / (h * h);
            g->d2_(j, j) = -2.0 / (h * h);
            g->d2_(j, j + 1) = 1.0 / (h * h);
            g->tan_.row(j) = (x[j] / sn[j]) * g->d1_.row(j);
        }
        // Even reflection through the poles; cot(theta) u' -> u''.
        g->d2_(0, 0) = -2.0 / (h * h);
        g->d2_(0, 1) = 2.0 / (h * h);
        g->d2_(last, last) = -2.0 / (h * h);
        g->d2_(last, last - 1) = 2.0 / (h * h);
        g->tan_.row(0) = g->d2_.row(0);
        g->tan_.row(last) = g->d2_.row(last);
    }
    g->lap_ = g->d2_ + (n - 1.0) * g->tan_;
    return g;
}

RadialDerivatives RadialGrid::derivatives(const Vector& u) const {
    if (u.size() != size()) throw std::invalid_argument("RadialGrid::derivatives: size mismatch");
    return {d1_ * u, d2_ * u, tan_ * u};
}

RadialProfile RadialProfile::sample(GridPtr grid, const std::function<double(double)>& u) {
    Vector v(grid->size());
    for (int j = 0; j < v.size(); ++j) v[j] = u(grid->theta()[j]);
    require_positive(v, "RadialProfile::sample");
    return {std::move(grid), std::move(v)};
}

RadialProfile RadialProfile::constant(GridPtr grid, double c) {
    if (!(c > 0.0)) throw DomainError(fmt::format("RadialProfile::constant: c = {} must be positive", c));
    const int size = grid->size();
    return {std::move(grid), Vector::Constant(size, c)};
}

conformal::EigenvalueVector RadialEigs::full(int n) const {
    Vector v(n);
    v[0] = radial;
    for (int i = 1; i < n; ++i) v[i] = tangential;
    std::sort(v.data(), v.data() + n);
    return conformal::EigenvalueVector(std::move(v));
}

RadialEigs schouten_radial(int n, double u, double d1, double d2, double tangential) {
    if (!(u > 0.0)) throw DomainError(fmt::format("schouten_radial: u = {} must be positive", u));
    const double m = n - 2.0;
    const double l = d1 / u;
    const double w = std::pow(u, -4.0 / m);
    return {w * (-2.0 / m * d2 / u + 2.0 * (n - 1.0) / (m * m) * l * l + 0.5),
            w * (-2.0 / m * tangential / u - 2.0 / (m * m) * l * l + 0.5)};
}

conformal::EigenvalueVector radial_schouten_eigs(const RadialProfile& profile, int j) {
    const auto& g = *profile.grid;
    if (j < 0 || j >= g.size()) throw DomainError(fmt::format("radial_schouten_eigs: node {} out of range", j));
    const Vector& u = profile.u;
    return schouten_radial(g.dim(), u[j], g.d1().row(j).dot(u), g.d2().row(j).dot(u), g.tangential().row(j).dot(u))
        .full(g.dim());
}

std::vector<RadialEigs> radial_schouten_all(const RadialProfile& profile) {
    const auto d = profile.grid->derivatives(profile.u);
    std::vector<RadialEigs> out;
    out.reserve(static_cast<std::size_t>(profile.size()));
    for (int j = 0; j < profile.size(); ++j)
        out.push_back(schouten_radial(profile.dim(), profile.u[j], d.d1[j], d.d2[j], d.tangential[j]));
    return out;
}

double ricci_margin(int n, const RadialEigs& e, double alpha) {
    const double trace = e.radial + (n - 1.0) * e.tangential;
    return (n - 2.0) * std::min(e.radial, e.tangential) + trace + (n - 1.0) * alpha * alpha;
}

Vector residual_Fs(const RadialProfile& profile, const cones::CurvatureFunction& f, double s, const AngularField& psi) {
    const int n = profile.dim();
    if (f.dim() != n) throw std::invalid_argument("residual_Fs: dimension mismatch");
    require_positive(profile.u, "residual_Fs");
    const auto eigs = radial_schouten_all(profile);
    Vector r(profile.size());
    for (int j = 0; j < profile.size(); ++j) {
        const auto lambda = eigs[static_cast<std::size_t>(j)].full(n);
        if (!f.cone().contains(lambda))
            throw ConeExitError(fmt::format("residual: eigenvalues leave {} at node {} (theta = {})", f.cone().name(), j,
                                            profile.grid->theta()[j]),
                                static_cast<std::size_t>(j));
        const double p = psi ? psi(profile.grid->theta()[j]) : 1.0;
        r[j] = f(lambda) - p * std::pow(profile.u[j], -s);
    }
    return r;
}

Vector residual_Gt(const RadialProfile& profile, const cones::CurvatureFunction& f, double t) {
    return residual_Fs(profile, t == 1.0 ? f : f.deformed(t), 2.0 / (profile.dim() - 2.0));
}

Vector ht_residual(const RadialProfile& profile, double t) {
    require_positive(profile.u, "ht_residual");
    const auto& g = *profile.grid;
    const double n = g.dim();
    const double cn = (n - 2.0) / (4.0 * (n - 1.0));
    const double pt = (1.0 - t) + t * n / (n - 2.0);
    const Vector& u = profile.u;
    const double mean_sq = g.weights().dot(u.cwiseProduct(u)) / g.volume();
    const Vector lap = g.laplacian() * u;
    Vector r(u.size());
    for (int j = 0; j < u.size(); ++j)
        r[j] = -lap[j] + ((1.0 - t) + t * cn * n * (n - 1.0)) * u[j] - ((1.0 - t) * mean_sq + t) * std::pow(u[j], pt);
    return r;
}

Vector g0_semilinear_residual(const RadialProfile& profile) {
    require_positive(profile.u, "g0_semilinear_residual");
    const double n = profile.dim();
    const double scalar = n * (n - 1.0);
    const double cn = (n - 2.0) / (4.0 * (n - 1.0));
    const Vector lap = profile.grid->laplacian() * profile.u;
    return -lap + cn * scalar * profile.u - profile.u.array().pow(n / (n - 2.0)).matrix();
}

double g0_constant_solution(int n) {
    const double cn = (n - 2.0) / (4.0 * (n - 1.0));
    return std::pow(cn * n * (n - 1.0), (n - 2.0) / 2.0);
}

double gt_constant_solution(int n, double t) { return std::pow(t + (1.0 - t) * n, (n - 2.0) / 2.0); }

// ---------------------------------------------------------------------------
// Newton

Matrix fd_jacobian(const ResidualFn& residual, const Vector& u, const Vector& r0, double step, int jobs) {
    const auto size = static_cast<std::size_t>(u.size());
    Matrix jac(r0.size(), u.size());
    parallel_for(size, jobs, [&](std::size_t col) {
        const int j = static_cast<int>(col);
        Vector v = u;
        const double h = step * (1.0 + std::abs(u[j]));
        v[j] = u[j] + h;
        try {
            jac.col(j) = (residual(v) - r0) / h;
        } catch (const DomainError&) {
            v[j] = u[j] - h;
            jac.col(j) = (r0 - residual(v)) / h;
        }
    });
    return jac;
}

NewtonResult newton_solve(const ResidualFn& residual, Vector u0, const NewtonOptions& opt, const JacobianFn& jacobian) {
    NewtonResult out;
    out.u = std::move(u0);
    Vector r = residual(out.u);
    out.residual = max_abs(r);
    while (out.residual > opt.tol) {
        if (out.iterations >= opt.max_iterations) {
            out.message = fmt::format("no convergence in {} iterations (residual {:.3e})", opt.max_iterations,
                                      out.residual);
            return out;
        }
        Matrix jac;
        try {
            jac = jacobian ? jacobian(out.u) : fd_jacobian(residual, out.u, r, opt.fd_step, opt.jobs);
        } catch (const DomainError& e) {
            out.message = fmt::format("Jacobian undefined: {}", e.what());
            return out;
        }
        const Vector delta = jac.partialPivLu().solve(-r);
        if (!delta.allFinite()) {
            out.message = "singular Jacobian";
            return out;
        }
        bool accepted = false;
        for (double damping = 1.0; damping >= opt.min_damping; damping *= 0.5) {
            const Vector trial = out.u + damping * delta;
            if ((trial.array() <= 0.0).any()) continue;
            Vector rt;
            try {
                rt = residual(trial);
            } catch (const DomainError&) {
                continue;
            }
            const double norm = max_abs(rt);
            if (std::isfinite(norm) && norm < out.residual) {
                out.u = trial;
                r = std::move(rt);
                out.residual = norm;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) {
            out.message = fmt::format("line search failed at residual {:.3e}", out.residual);
            return out;
        }
    }
    out.converged = true;
    return out;
}

// ---------------------------------------------------------------------------
// Continuation

namespace {

double parameter_of(const ContinuationState& s, Parameter p) { return p == Parameter::S ? s.s : s.t; }

void check_parameters(const Problem& p, int n, double s, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument(fmt::format("continuation: t = {} not in [0, 1]", t));
    if (p.family == Family::Curvature && !(s >= 0.0 && s < 4.0 / (n - 2.0)))
        throw std::invalid_argument(fmt::format("continuation: s = {} not in [0, 4/(n-2))", s));
}

}  // namespace

Vector problem_residual(const Problem& p, const RadialProfile& profile, double s, double t) {
    if (p.family == Family::Semilinear) return ht_residual(profile, t);
    if (p.f.t() != 1.0) throw std::invalid_argument("problem: f must be the undeformed function");
    return residual_Fs(profile, t == 1.0 ? p.f : p.f.deformed(t), s, p.psi);
}

Vector curvature_gradient(const cones::CurvatureFunction& f, std::span<const double> lambda) {
    const int n = static_cast<int>(lambda.size());
    const int k = f.cone().k();
    const double t = f.t();
    const auto mu = t == 1.0 ? std::vector<double>(lambda.begin(), lambda.end()) : cones::homotopy_argument(lambda, t);
    const double sk = cones::sigma_k(mu, k);
    if (!(sk > 0.0)) throw DomainError("curvature_gradient: sigma_k is not positive");
    const double outer = f.kappa() / k * std::pow(sk, 1.0 / k - 1.0);
    Vector grad(n);
    std::vector<double> rest(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        for (int l = 0, pos = 0; l < n; ++l)
            if (l != i) rest[static_cast<std::size_t>(pos++)] = mu[static_cast<std::size_t>(l)];
        grad[i] = outer * (k == 1 ? 1.0 : cones::sigma_k(rest, k - 1));
    }
    if (t == 1.0) return grad;
    // d/d lambda of t lambda + (1 - t) sigma_1(lambda) e.
    return (t * grad.array() + (1.0 - t) * grad.sum()).matrix();
}

Matrix problem_jacobian(const Problem& p, const RadialProfile& profile, double s, double t) {
    const auto& g = *profile.grid;
    const Vector& u = profile.u;
    const int size = g.size();
    require_positive(u, "problem_jacobian");
    const double n = g.dim();
    const double m = n - 2.0;
    if (p.family == Family::Semilinear) {
        const double cn = m / (4.0 * (n - 1.0));
        const double pt = (1.0 - t) + t * n / m;
        const double mean_sq = g.weights().dot(u.cwiseProduct(u)) / g.volume();
        Matrix jac = -g.laplacian();
        Vector upt(size);
        for (int j = 0; j < size; ++j) {
            upt[j] = std::pow(u[j], pt);
            jac(j, j) += (1.0 - t) + t * cn * n * (n - 1.0) - ((1.0 - t) * mean_sq + t) * pt * upt[j] / u[j];
        }
        jac -= (1.0 - t) * (2.0 / g.volume()) * upt * g.weights().cwiseProduct(u).transpose();
        return jac;
    }
    const auto f = t == 1.0 ? p.f : p.f.deformed(t);
    const auto d = g.derivatives(u);
    Matrix jac(size, size);
    for (int j = 0; j < size; ++j) {
        const double uj = u[j], d1 = d.d1[j], d2 = d.d2[j], tn = d.tangential[j];
        const auto e = schouten_radial(g.dim(), uj, d1, d2, tn);
        const auto lambda = e.full(g.dim());
        if (!f.cone().contains(lambda))
            throw ConeExitError(fmt::format("jacobian: eigenvalues leave {} at node {}", f.cone().name(), j),
                                static_cast<std::size_t>(j));
        // Gradient in the (radial, tangential...) ordering; symmetric f only
        // needs the two distinct partials.
        std::vector<double> ordered(static_cast<std::size_t>(g.dim()), e.tangential);
        ordered[0] = e.radial;
        const Vector grad = curvature_gradient(f, ordered);
        const double fr = grad[0];
        const double ft = grad.tail(g.dim() - 1).sum();
        const double w = std::pow(uj, -4.0 / m);
        const double u2 = uj * uj;
        const double r_u = -4.0 / m * e.radial / uj + w * (2.0 / m * d2 / u2 - 4.0 * (n - 1.0) / (m * m) * d1 * d1 / (u2 * uj));
        const double r_d1 = w * 4.0 * (n - 1.0) / (m * m) * d1 / u2;
        const double r_d2 = -w * 2.0 / (m * uj);
        const double t_u = -4.0 / m * e.tangential / uj + w * (2.0 / m * tn / u2 + 4.0 / (m * m) * d1 * d1 / (u2 * uj));
        const double t_d1 = -w * 4.0 / (m * m) * d1 / u2;
        const double t_tan = -w * 2.0 / (m * uj);
        jac.row(j) = (fr * r_d1 + ft * t_d1) * g.d1().row(j) + fr * r_d2 * g.d2().row(j) + ft * t_tan * g.tangential().row(j);
        const double psi = p.psi ? p.psi(g.theta()[j]) : 1.0;
        jac(j, j) += fr * r_u + ft * t_u + s * psi * std::pow(uj, -s - 1.0);
    }
    return jac;
}

NewtonResult solve(const Problem& p, const RadialProfile& start, double s, double t, const NewtonOptions& opt) {
    const GridPtr grid = start.grid;
    ResidualFn residual = [&p, grid, s, t](const Vector& v) { return problem_residual(p, RadialProfile{grid, v}, s, t); };
    JacobianFn jacobian;
    if (opt.jacobian == JacobianKind::Analytic)
        jacobian = [&p, grid, s, t](const Vector& v) { return problem_jacobian(p, RadialProfile{grid, v}, s, t); };
    return newton_solve(residual, start.u, opt, jacobian);
}

ContinuationState evaluate_state(const Problem& p, const RadialProfile& profile, double s, double t) {
    ContinuationState st;
    st.s = s;
    st.t = t;
    st.profile = profile;
    const Vector& u = profile.u;
    auto& m = st.margins;
    m.min_u = u.minCoeff();
    m.max_u = u.maxCoeff();
    if (!(m.min_u > 0.0)) {
        st.residual = std::numeric_limits<double>::infinity();
        m.min_cone_margin = m.min_ricci_margin = -std::numeric_limits<double>::infinity();
        m.max_abs_log_u = m.c1_log_u = m.c2_log_u = std::numeric_limits<double>::infinity();
        return st;
    }
    try {
        st.residual = max_abs(problem_residual(p, profile, s, t));
    } catch (const DomainError&) {
        st.residual = std::numeric_limits<double>::infinity();
    }
    const int n = profile.dim();
    const auto d = profile.grid->derivatives(u);
    const auto cone = (p.family == Family::Curvature && t != 1.0) ? p.f.deformed(t).cone() : p.f.cone();
    m.min_cone_margin = m.min_ricci_margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < u.size(); ++j) {
        const double l1 = d.d1[j] / u[j];
        m.max_abs_log_u = std::max(m.max_abs_log_u, std::abs(std::log(u[j])));
        m.c1_log_u = std::max(m.c1_log_u, std::abs(l1));
        m.c2_log_u = std::max(m.c2_log_u, std::abs(d.d2[j] / u[j] - l1 * l1));
        const auto e = schouten_radial(n, u[j], d.d1[j], d.d2[j], d.tangential[j]);
        m.min_cone_margin = std::min(m.min_cone_margin, cones::cone_margin(e.full(n), cone));
        m.min_ricci_margin = std::min(m.min_ricci_margin, ricci_margin(n, e, st.alpha));
    }
    return st;
}

std::vector<PathSegment> s_schedule(int steps) { return {{Parameter::S, 0.0, steps}}; }

std::vector<PathSegment> t_schedule(int steps) { return {{Parameter::T, 0.0, steps}}; }

std::vector<ContinuationState> newton_continuation(const Problem& p, const ContinuationState& start,
                                                   std::span<const PathSegment> path, const ContinuationOptions& opt) {
    const int n = start.profile.dim();
    check_parameters(p, n, start.s, start.t);
    ContinuationState current = evaluate_state(p, start.profile, start.s, start.t);
    current.alpha = start.alpha;
    if (!(current.residual <= opt.newton.tol))
        throw std::invalid_argument(
            fmt::format("continuation: start residual {:.3e} exceeds tol {:.1e}", current.residual, opt.newton.tol));

    std::vector<ContinuationState> states{current};
    for (const auto& seg : path) {
        if (seg.steps <= 0) throw std::invalid_argument("continuation: segment needs a positive step count");
        const double from = parameter_of(current, seg.parameter);
        check_parameters(p, n, seg.parameter == Parameter::S ? seg.target : current.s,
                         seg.parameter == Parameter::T ? seg.target : current.t);
        const double nominal = (seg.target - from) / seg.steps;
        double step = nominal;
        double value = from;
        while (value != seg.target) {
            const double remaining = seg.target - value;
            const double next = std::abs(remaining) <= std::abs(step) * (1.0 + 1e-12) ? seg.target : value + step;
            const double s = seg.parameter == Parameter::S ? next : current.s;
            const double t = seg.parameter == Parameter::T ? next : current.t;

            std::string why;
            bool ok = false;
            ContinuationState trial;
            try {
                const auto res = solve(p, current.profile, s, t, opt.newton);
                if (res.converged) {
                    trial = evaluate_state(p, RadialProfile{current.profile.grid, res.u}, s, t);
                    trial.alpha = current.alpha;
                    trial.newton_iterations = res.iterations;
                    ok = trial.margins.min_u > 0.0 &&
                         (p.family == Family::Semilinear || trial.margins.min_cone_margin > 0.0);
                    if (!ok) why = "accepted Newton point has a nonpositive margin";
                } else {
                    why = res.message;
                }
            } catch (const DomainError& e) {
                why = e.what();
            }
            if (ok) {
                current = std::move(trial);
                states.push_back(current);
                value = next;
                if (std::abs(step) < std::abs(nominal)) step *= 2.0;
            } else {
                step *= 0.5;
                if (std::abs(step) < opt.min_step)
                    throw ContinuationFailure(fmt::format("continuation stalled at s = {}, t = {} ({})", current.s,
                                                          current.t, why),
                                              current);
            }
        }
    }
    return states;
}

void write_transcript_csv(std::ostream& os, std::span<const ContinuationState> states) {
    os << "step,s,t,residual,min_u,max_u,cone_margin\n";
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& st = states[i];
        os << fmt::format("{},{:.17g},{:.17g},{:.6e},{:.17g},{:.17g},{:.17g}\n", i, st.s, st.t, st.residual,
                          st.margins.min_u, st.margins.max_u, st.margins.min_cone_margin);
    }
}

void write_profile(std::ostream& os, const RadialProfile& profile) {
    for (int j = 0; j < profile.size(); ++j)
        os << fmt::format("{:.17g} {:.17g}\n", profile.grid->theta()[j], profile.u[j]);
}

// ---------------------------------------------------------------------------
// Degree checkpoints

H0Spectrum linearized_H0_spectrum(const GridPtr& grid, int m) {
    const int size = grid->size();
    if (m < 1 || m > size) throw std::invalid_argument("linearized_H0_spectrum: bad eigenvalue count");
    const Matrix op = -grid->laplacian() - (2.0 / grid->volume()) * Vector::Ones(size) * grid->weights().transpose();
    Eigen::EigenSolver<Matrix> es(op);
    if (es.info() != Eigen::Success) throw NumericalError("linearized_H0_spectrum: eigensolver failed");
    std::vector<int> order(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) order[static_cast<std::size_t>(i)] = i;
    const auto& ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ev[a].real() < ev[b].real(); });

    H0Spectrum out;
    for (int i = 0; i < m; ++i) {
        const auto z = ev[order[static_cast<std::size_t>(i)]];
        out.eigenvalues.push_back(z.real());
        out.max_imaginary = std::max(out.max_imaginary, std::abs(z.imag()));
    }
    for (int i = 0; i < size; ++i)
        if (ev[i].real() <= 1e-8) ++out.nonpositive_count;
    out.ground_state = es.eigenvectors().col(order[0]).real();
    const double scale = out.ground_state.cwiseAbs().maxCoeff();
    out.ground_state_spread = (out.ground_state.maxCoeff() - out.ground_state.minCoeff()) / scale;
    return out;
}

MarginReport apriori_margins(std::span<const ContinuationState> states, Family family, double floor) {
    MarginReport r;
    r.min_cone_margin = r.min_ricci_margin = std::numeric_limits<double>::infinity();
    r.band_low = std::numeric_limits<double>::infinity();
    r.band_high = -std::numeric_limits<double>::infinity();
    bool banded = false;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& st = states[i];
        const auto& m = st.margins;
        r.max_abs_log_u = std::max(r.max_abs_log_u, m.max_abs_log_u);
        r.c1_log_u = std::max(r.c1_log_u, m.c1_log_u);
        r.c2_log_u = std::max(r.c2_log_u, m.c2_log_u);
        r.min_cone_margin = std::min(r.min_cone_margin, m.min_cone_margin);
        r.min_ricci_margin = std::min(r.min_ricci_margin, m.min_ricci_margin);
        if (!(m.min_cone_margin >= floor)) {
            r.blowup_warning = true;
            r.warnings.push_back(
                fmt::format("state {}: cone margin {:.3e} below floor {:.1e}", i, m.min_cone_margin, floor));
        }
        if (!(m.min_ricci_margin >= 0.0))
            r.warnings.push_back(fmt::format("state {}: Ricci margin {:.3e} is negative", i, m.min_ricci_margin));
        if (family == Family::Semilinear && st.t > 0.0) {
            const auto& g = *st.profile.grid;
            const Vector& u = st.profile.u;
            const double n = g.dim();
            const double pt = (1.0 - st.t) + st.t * n / (n - 2.0);
            const double sh = (1.0 - st.t) * g.weights().dot(u.cwiseProduct(u)) / g.volume() + st.t;
            const double factor = std::pow(sh, 1.0 / (pt - 1.0));
            r.band_low = std::min(r.band_low, factor * u.minCoeff());
            r.band_high = std::max(r.band_high, factor * u.maxCoeff());
            banded = true;
        }
    }
    if (!banded) r.band_low = r.band_high = std::numeric_limits<double>::quiet_NaN();
    return r;
}

MarginReport apriori_margins(const ContinuationState& state, Family family, double floor) {
    return apriori_margins(std::span<const ContinuationState>(&state, 1), family, floor);
}

}  // namespace sigmak::solver
