#pragma once

// Chart-local Riemannian geometry: metric fields and positive conformal
// factors with analytic (jet) or finite-difference derivatives, curvature of
// the background, and the Schouten/Ricci tensors of g_u = u^{4/(n-2)} g.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigmak/errors.hpp"
#include "sigmak/jet.hpp"

namespace sigmak::conformal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct DerivativeMode {
    enum class Kind { Analytic, FiniteDifference };
    Kind kind = Kind::Analytic;
    double h = 1e-4;
    bool richardson = false;

    static DerivativeMode analytic() { return {}; }
    static DerivativeMode finite_difference(double step = 1e-4, bool richardson = false) {
        return {Kind::FiniteDifference, step, richardson};
    }
};

/// Axis-aligned coordinate box (closed).
struct Box {
    Vector lower;
    Vector upper;

    static Box cube(int n, double half_width);
    [[nodiscard]] bool contains(const Vector& x) const;
};

/// g_ij, dg[k](i,j) = d_k g_ij and d2g[k*n + l](i,j) = d_k d_l g_ij.
struct MetricJet {
    Matrix g;
    std::vector<Matrix> dg;
    std::vector<Matrix> d2g;
};

/// u, du and the coordinate second derivatives d_i d_j u.
struct ScalarJet {
    double value = 0.0;
    Vector grad;
    Matrix hess;
};

namespace detail {

template <class Scalar>
std::vector<Scalar> seed(const Vector& x) {
    std::vector<Scalar> out(static_cast<std::size_t>(x.size()));
    for (int i = 0; i < x.size(); ++i) {
        if constexpr (std::is_same_v<Scalar, Jet>) out[i] = Jet::variable(static_cast<int>(x.size()), i, x[i]);
        else out[i] = x[i];
    }
    return out;
}

}  // namespace detail

class MetricField {
public:
    using ValueFn = std::function<Matrix(const Vector&)>;
    using JetFn = std::function<MetricJet(const Vector&)>;

    MetricField(int n, Box domain, ValueFn value, JetFn jet, std::string name);

    /// Builds value and jet evaluators from one generic expression
    /// expr(const std::vector<T>& x) -> std::vector<T> (row-major n*n), T in
    /// {double, Jet}.
    template <class Expr>
    static MetricField from_expression(int n, Box domain, Expr expr, std::string name) {
        if (n > kMaxJetDim) throw std::invalid_argument("MetricField: dimension exceeds jet capacity");
        ValueFn value = [n, expr](const Vector& x) {
            const auto c = expr(detail::seed<double>(x));
            Matrix g(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) g(i, j) = c[static_cast<std::size_t>(i * n + j)];
            return g;
        };
        JetFn jet = [n, expr](const Vector& x) {
            const auto c = expr(detail::seed<Jet>(x));
            MetricJet out{Matrix(n, n), std::vector<Matrix>(n, Matrix::Zero(n, n)),
                          std::vector<Matrix>(static_cast<std::size_t>(n * n), Matrix::Zero(n, n))};
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const Jet& cij = c[static_cast<std::size_t>(i * n + j)];
                    out.g(i, j) = cij.v;
                    for (int k = 0; k < cij.n; ++k) {
                        out.dg[k](i, j) = cij.grad(k);
                        for (int l = 0; l < cij.n; ++l) out.d2g[k * n + l](i, j) = cij.hess(k, l);
                    }
                }
            }
            return out;
        };
        return MetricField(n, std::move(domain), std::move(value), std::move(jet), std::move(name));
    }

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] const Box& domain() const noexcept { return domain_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] DerivativeMode mode() const noexcept { return mode_; }
    [[nodiscard]] bool has_analytic() const noexcept { return static_cast<bool>(jet_); }

    [[nodiscard]] MetricField with_mode(DerivativeMode mode) const;

    /// Throws DomainError when x lies outside the chart domain.
    [[nodiscard]] Matrix metric(const Vector& x) const;
    [[nodiscard]] MetricJet derivatives(const Vector& x) const;

private:
    void check_point(const Vector& x) const;

    int n_;
    Box domain_;
    ValueFn value_;
    JetFn jet_;
    std::string name_;
    DerivativeMode mode_;
};

class ConformalFactor {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using JetFn = std::function<ScalarJet(const Vector&)>;

    ConformalFactor(int n, ValueFn value, JetFn jet, std::string name);

    template <class Expr>
    static ConformalFactor from_expression(int n, Expr expr, std::string name) {
        if (n > kMaxJetDim) throw std::invalid_argument("ConformalFactor: dimension exceeds jet capacity");
        ValueFn value = [expr](const Vector& x) { return static_cast<double>(expr(detail::seed<double>(x))); };
        JetFn jet = [n, expr](const Vector& x) {
            const Jet u = expr(detail::seed<Jet>(x));
            ScalarJet out{u.v, Vector::Zero(n), Matrix::Zero(n, n)};
            for (int i = 0; i < u.n; ++i) {
                out.grad[i] = u.grad(i);
                for (int j = 0; j < u.n; ++j) out.hess(i, j) = u.hess(i, j);
            }
            return out;
        };
        return ConformalFactor(n, std::move(value), std::move(jet), std::move(name));
    }

    static ConformalFactor constant(int n, double c);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] DerivativeMode mode() const noexcept { return mode_; }
    [[nodiscard]] ConformalFactor with_mode(DerivativeMode mode) const;

    [[nodiscard]] double value(const Vector& x) const { return value_(x); }
    [[nodiscard]] ScalarJet derivatives(const Vector& x) const;

    /// x -> c * u(x).
    [[nodiscard]] ConformalFactor scaled(double c) const;
    /// x -> u(x) * v(x).
    [[nodiscard]] ConformalFactor times(const ConformalFactor& other) const;

private:
    int n_;
    ValueFn value_;
    JetFn jet_;
    std::string name_;
    DerivativeMode mode_;
};

/// Eigenvalues of a symmetric form relative to a metric, ascending.
class EigenvalueVector {
public:
    EigenvalueVector() = default;
    explicit EigenvalueVector(Vector values);

    [[nodiscard]] int size() const noexcept { return static_cast<int>(values_.size()); }
    [[nodiscard]] double operator[](int i) const { return values_[i]; }
    [[nodiscard]] const Vector& values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> span() const noexcept {
        return {values_.data(), static_cast<std::size_t>(values_.size())};
    }
    operator std::span<const double>() const noexcept { return span(); }  // NOLINT

private:
    Vector values_;
};

/// Christoffel symbols Gamma^k_ij stored as gamma[k](i,j).
[[nodiscard]] std::vector<Matrix> christoffel(const MetricJet& jet);

[[nodiscard]] Matrix ricci_background(const MetricField& g, const Vector& x);
[[nodiscard]] double scalar_curvature(const MetricField& g, const Vector& x);
[[nodiscard]] Matrix schouten_background(const MetricField& g, const Vector& x);

/// d_i d_j u - Gamma^k_ij d_k u.
[[nodiscard]] Matrix covariant_hessian(const MetricJet& g, const ScalarJet& u);
[[nodiscard]] double laplacian(const MetricField& g, const ScalarJet& u, const Vector& x);

/// A_{g_u} for g_u = u^{4/(n-2)} g, from the conformal transformation law.
[[nodiscard]] Matrix schouten_conformal(const MetricField& g, const ConformalFactor& u, const Vector& x);

/// Ric_{g_u} = (n-2) A_{g_u} + tr_{g_u}(A_{g_u}) g_u.
[[nodiscard]] Matrix ricci_conformal(const MetricField& g, const ConformalFactor& u, const Vector& x);

/// Solves A v = lambda G v by Cholesky reduction. Throws DomainError if G is
/// not positive definite.
[[nodiscard]] EigenvalueVector eigen_rel(const Matrix& a, const Matrix& metric);

/// u^{4/(n-2)} g at x.
[[nodiscard]] Matrix conformal_metric_at(const MetricField& g, const ConformalFactor& u, const Vector& x);

/// g_u as a metric field in its own right (analytic when g and u are).
[[nodiscard]] MetricField conformal_metric(const MetricField& g, const ConformalFactor& u);

/// min over samples of the smallest eigenvalue of Ric_{g_u} + (n-1) alpha^2 g_u
/// relative to g_u. Nonnegative certifies Ric_{g_u} >= -(n-1) alpha^2 g_u on
/// the samples.
[[nodiscard]] double ricci_lower_margin(const MetricField& g, const ConformalFactor& u, double alpha,
                                        std::span<const Vector> samples);

namespace metrics {

MetricField flat(int n, double half_width = 1e3);

/// Geodesic normal coordinates at a point of the unit sphere:
/// g = x^x + (sin r / r)^2 (I - x^x), r = |x| < pi.
MetricField sphere_normal(int n);

/// Polar chart on the unit sphere: coordinates (theta, y) with y stereographic
/// on S^{n-1}; g = d theta^2 + sin^2(theta) (2 / (1 + |y|^2))^2 |dy|^2.
MetricField sphere_polar(int n);

/// Stereographic chart: g = (2 / (1 + |x|^2))^2 |dx|^2.
MetricField sphere_stereographic(int n, double half_width = 1e3);

}  // namespace metrics

namespace factors {

/// Poincare-ball factor: u^{4/(n-2)} |dx|^2 is hyperbolic space of curvature -1.
ConformalFactor poincare_ball(int n);

/// |x - p|^{2-n}; flat g_u is the inversion image of flat space.
ConformalFactor inversion(const Vector& p);

}  // namespace factors

}  // namespace sigmak::conformal
