#pragma once

// Second-order forward-mode automatic differentiation.
//
// A Jet carries a value together with its gradient and Hessian with respect
// to up to kMaxJetDim independent variables. Metric components and conformal
// factors are written once as generic expressions and evaluated either on
// plain doubles or on Jets; the Jet evaluation is what "analytic" derivative
// mode means throughout the library.

#include <array>
#include <cassert>
#include <cmath>

namespace sigmak {

inline constexpr int kMaxJetDim = 12;

struct Jet {
    double v = 0.0;
    int n = 0;
    std::array<double, kMaxJetDim> g{};
    std::array<double, kMaxJetDim * kMaxJetDim> h{};

    Jet() = default;
    Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

    static Jet variable(int dim, int index, double value) {
        assert(dim <= kMaxJetDim && index < dim);
        Jet j;
        j.v = value;
        j.n = dim;
        j.g[index] = 1.0;
        return j;
    }

    [[nodiscard]] double grad(int i) const { return g[i]; }
    [[nodiscard]] double hess(int i, int j) const { return h[i * kMaxJetDim + j]; }
};

namespace detail {

inline int common_dim(const Jet& a, const Jet& b) { return a.n > b.n ? a.n : b.n; }

// v = f(a), with f' = d1, f'' = d2.
inline Jet chain(const Jet& a, double value, double d1, double d2) {
    Jet r;
    r.v = value;
    r.n = a.n;
    for (int i = 0; i < a.n; ++i) {
        r.g[i] = d1 * a.g[i];
        for (int j = 0; j < a.n; ++j) {
            const int ij = i * kMaxJetDim + j;
            r.h[ij] = d1 * a.h[ij] + d2 * a.g[i] * a.g[j];
        }
    }
    return r;
}

}  // namespace detail

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v + b.v;
    r.n = detail::common_dim(a, b);
    for (int i = 0; i < r.n; ++i) {
        r.g[i] = a.g[i] + b.g[i];
        for (int j = 0; j < r.n; ++j) {
            const int ij = i * kMaxJetDim + j;
            r.h[ij] = a.h[ij] + b.h[ij];
        }
    }
    return r;
}

inline Jet operator-(const Jet& a) { return detail::chain(a, -a.v, -1.0, 0.0); }
inline Jet operator-(const Jet& a, const Jet& b) { return a + (-b); }

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.v = a.v * b.v;
    r.n = detail::common_dim(a, b);
    for (int i = 0; i < r.n; ++i) {
        r.g[i] = a.v * b.g[i] + b.v * a.g[i];
        for (int j = 0; j < r.n; ++j) {
            const int ij = i * kMaxJetDim + j;
            r.h[ij] = a.v * b.h[ij] + b.v * a.h[ij] + a.g[i] * b.g[j] + b.g[i] * a.g[j];
        }
    }
    return r;
}

inline Jet reciprocal(const Jet& a) {
    const double inv = 1.0 / a.v;
    return detail::chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

inline Jet& operator+=(Jet& a, const Jet& b) { return a = a + b; }
inline Jet& operator-=(Jet& a, const Jet& b) { return a = a - b; }
inline Jet& operator*=(Jet& a, const Jet& b) { return a = a * b; }
inline Jet& operator/=(Jet& a, const Jet& b) { return a = a / b; }

inline Jet exp(const Jet& a) {
    const double e = std::exp(a.v);
    return detail::chain(a, e, e, e);
}

inline Jet log(const Jet& a) { return detail::chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }

inline Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return detail::chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet pow(const Jet& a, double p) {
    const double f = std::pow(a.v, p);
    return detail::chain(a, f, p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
}

inline Jet sin(const Jet& a) {
    const double s = std::sin(a.v);
    return detail::chain(a, s, std::cos(a.v), -s);
}

inline Jet cos(const Jet& a) {
    const double c = std::cos(a.v);
    return detail::chain(a, c, -std::sin(a.v), -c);
}

inline Jet sinh(const Jet& a) {
    const double s = std::sinh(a.v);
    return detail::chain(a, s, std::cosh(a.v), s);
}

inline Jet cosh(const Jet& a) {
    const double c = std::cosh(a.v);
    return detail::chain(a, c, std::sinh(a.v), c);
}

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

}  // namespace sigmak
