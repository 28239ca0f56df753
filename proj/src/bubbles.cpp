#include "sigmak/bubbles.hpp"

#include <cmath>

#include <fmt/format.h>

#include "sigmak/errors.hpp"

namespace sigmak::bubbles {

double bubble_constant(int n) { return std::pow(2.0, (n - 2) / 2.0); }

Bubble::Bubble(double a, Vector p) : a_(a), p_(std::move(p)), c_(0.0) {
    if (!(a > 0.0)) throw std::invalid_argument(fmt::format("Bubble: scale a = {} must be positive", a));
    if (p_.size() < 3) throw std::invalid_argument("Bubble: dimension must be >= 3");
    c_ = bubble_constant(dim());
}

double Bubble::peak() const { return c_ * std::pow(a_, (dim() - 2) / 2.0); }

double bubble_eval(const Bubble& b, const Vector& x) {
    const double m = (b.dim() - 2) / 2.0;
    const double a = b.scale();
    return b.constant() * std::pow(a / (1.0 + a * a * (x - b.center()).squaredNorm()), m);
}

conformal::ScalarJet bubble_jet(const Bubble& b, const Vector& x) {
    const int n = b.dim();
    const double m = (n - 2) / 2.0;
    const double a2 = b.scale() * b.scale();
    const Vector y = x - b.center();
    const double q = 1.0 + a2 * y.squaredNorm();
    const double u = bubble_eval(b, x);
    conformal::ScalarJet out;
    out.value = u;
    out.grad = -2.0 * m * a2 * u / q * y;
    out.hess = -2.0 * m * a2 * u / q *
               (Matrix::Identity(n, n) - 2.0 * a2 * (m + 1.0) / q * (y * y.transpose()));
    return out;
}

conformal::ConformalFactor as_factor(const Bubble& b, conformal::DerivativeMode mode) {
    conformal::ConformalFactor u(
        b.dim(), [b](const Vector& x) { return bubble_eval(b, x); },
        [b](const Vector& x) { return bubble_jet(b, x); }, fmt::format("U[a={},n={}]", b.scale(), b.dim()));
    return u.with_mode(mode);
}

double stereographic_factor(int n, const Vector& x) { return bubble_eval(Bubble(1.0, Vector::Zero(n)), x); }

Matrix stereographic_pullback(const Vector& x) {
    const int n = static_cast<int>(x.size());
    const double r2 = x.squaredNorm();
    const double d = 1.0 + r2;
    Matrix jac(n + 1, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            jac(i, j) = (i == j ? 2.0 / d : 0.0) - 4.0 * x[i] * x[j] / (d * d);
        }
        // d/dx_j of (r2 - 1)/(r2 + 1) = 4 x_j / (r2 + 1)^2
        jac(n, i) = 4.0 * x[i] / (d * d);
    }
    return jac.transpose() * jac;
}

double local_length_scale(const Bubble& b, const Vector& x) {
    const double a = b.scale();
    return std::sqrt(1.0 + a * a * (x - b.center()).squaredNorm()) / a;
}

double default_tolerance(const conformal::DerivativeMode& mode) {
    return mode.kind == conformal::DerivativeMode::Kind::Analytic ? 1e-8 : 1e-6;
}

BubbleReport bubble_verify(const cones::CurvatureFunction& f, const Bubble& b, std::span<const Vector> samples,
                           conformal::DerivativeMode mode, double tolerance) {
    const int n = b.dim();
    if (f.dim() != n) throw std::invalid_argument("bubble_verify: dimension mismatch");
    const auto flat = conformal::metrics::flat(n, 1e6);
    BubbleReport report;
    report.tolerance = tolerance;
    for (const auto& x : samples) {
        auto local = mode;
        if (local.kind == conformal::DerivativeMode::Kind::FiniteDifference) local.h *= local_length_scale(b, x);
        const auto u = as_factor(b, local);
        const auto lambda =
            conformal::eigen_rel(conformal::schouten_conformal(flat, u, x), conformal::conformal_metric_at(flat, u, x));
        for (int i = 0; i < n; ++i)
            report.max_eigen_deviation = std::max(report.max_eigen_deviation, std::abs(lambda[i] - 0.5));
        const double fv = f.cone().contains(lambda) ? f(lambda) : 0.0;
        report.max_f_deviation = std::max(report.max_f_deviation, std::abs(fv - 1.0));
        ++report.samples;
    }
    report.pass = report.max_eigen_deviation <= tolerance && report.max_f_deviation <= tolerance;
    return report;
}

double ScaleRule::exponent(int n) const {
    return kind == Kind::Critical ? 2.0 / (n - 2.0) : (p - 1.0) / 2.0;
}

conformal::ConformalFactor rescale_profile(const conformal::ConformalFactor& u, const Vector& y0, ScaleRule rule,
                                           const conformal::Box& chart, double radius) {
    const int n = u.dim();
    if (!chart.contains(y0)) throw DomainError("rescale_profile: base point outside chart");
    const double u0 = u.value(y0);
    if (!(u0 > 0.0)) throw DomainError(fmt::format("rescale_profile: u(y0) = {} is not positive", u0));
    const double c = bubble_constant(n);
    const double s = rule.exponent(n);
    const double stretch = std::pow(c, s) * std::pow(u0, -s);
    const double amplitude = c / u0;

    for (int i = 0; i < n; ++i) {
        if (y0[i] - stretch * radius < chart.lower[i] || y0[i] + stretch * radius > chart.upper[i]) {
            throw DomainError(fmt::format("rescale_profile: rescaled ball of radius {} leaves the chart", radius));
        }
    }

    auto map = [y0, stretch, chart](const Vector& x) {
        Vector y = y0 + stretch * x;
        if (!chart.contains(y)) throw DomainError("rescale_profile: evaluation point leaves the chart");
        return y;
    };
    conformal::ConformalFactor out(
        n, [u, map, amplitude](const Vector& x) { return amplitude * u.value(map(x)); },
        [u, map, amplitude, stretch](const Vector& x) {
            auto j = u.derivatives(map(x));
            j.value *= amplitude;
            j.grad *= amplitude * stretch;
            j.hess *= amplitude * stretch * stretch;
            return j;
        },
        fmt::format("rescaled({})", u.name()));
    return out;
}

}  // namespace sigmak::bubbles
