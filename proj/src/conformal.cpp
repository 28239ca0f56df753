#include "sigmak/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace sigmak::conformal {

Box Box::cube(int n, double half_width) {
    return Box{Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
}

bool Box::contains(const Vector& x) const {
    if (x.size() != lower.size()) return false;
    for (int i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

template <class Value, class Eval>
void central_differences(const Vector& x, double h, Eval&& eval, std::vector<Value>& d1, std::vector<Value>& d2) {
    const int n = static_cast<int>(x.size());
    const Value center = eval(x);
    d1.assign(static_cast<std::size_t>(n), center);
    d2.assign(static_cast<std::size_t>(n * n), center);
    std::vector<Value> plus, minus;
    plus.reserve(n);
    minus.reserve(n);
    for (int k = 0; k < n; ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        plus.push_back(eval(xp));
        minus.push_back(eval(xm));
        d1[k] = (plus[k] - minus[k]) / (2.0 * h);
        d2[k * n + k] = (plus[k] - 2.0 * center + minus[k]) / (h * h);
    }
    for (int k = 0; k < n; ++k) {
        for (int l = k + 1; l < n; ++l) {
            Vector pp = x, pm = x, mp = x, mm = x;
            pp[k] += h; pp[l] += h;
            pm[k] += h; pm[l] -= h;
            mp[k] -= h; mp[l] += h;
            mm[k] -= h; mm[l] -= h;
            const Value mixed = (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (4.0 * h * h);
            d2[k * n + l] = mixed;
            d2[l * n + k] = mixed;
        }
    }
}

template <class Value, class Eval>
void fd_derivatives(const Vector& x, const DerivativeMode& mode, Eval&& eval, std::vector<Value>& d1,
                    std::vector<Value>& d2) {
    central_differences(x, mode.h, eval, d1, d2);
    if (!mode.richardson) return;
    std::vector<Value> f1, f2;
    central_differences(x, 0.5 * mode.h, eval, f1, f2);
    for (std::size_t i = 0; i < d1.size(); ++i) d1[i] = (4.0 * f1[i] - d1[i]) / 3.0;
    for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = (4.0 * f2[i] - d2[i]) / 3.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// MetricField

MetricField::MetricField(int n, Box domain, ValueFn value, JetFn jet, std::string name)
    : n_(n),
      domain_(std::move(domain)),
      value_(std::move(value)),
      jet_(std::move(jet)),
      name_(std::move(name)),
      mode_(jet_ ? DerivativeMode::analytic() : DerivativeMode::finite_difference()) {
    if (n < 3) throw std::invalid_argument(fmt::format("MetricField '{}': dimension {} < 3", name_, n));
}

MetricField MetricField::with_mode(DerivativeMode mode) const {
    if (mode.kind == DerivativeMode::Kind::Analytic && !jet_) {
        throw std::invalid_argument(fmt::format("MetricField '{}' has no analytic derivatives", name_));
    }
    MetricField copy = *this;
    copy.mode_ = mode;
    return copy;
}

void MetricField::check_point(const Vector& x) const {
    if (x.size() != n_) throw std::invalid_argument(fmt::format("MetricField '{}': point of size {}", name_, x.size()));
    if (!domain_.contains(x)) throw DomainError(fmt::format("MetricField '{}': point outside chart domain", name_));
}

Matrix MetricField::metric(const Vector& x) const {
    check_point(x);
    return value_(x);
}

MetricJet MetricField::derivatives(const Vector& x) const {
    check_point(x);
    if (mode_.kind == DerivativeMode::Kind::Analytic) return jet_(x);
    MetricJet out;
    out.g = value_(x);
    fd_derivatives<Matrix>(x, mode_, value_, out.dg, out.d2g);
    return out;
}

// ---------------------------------------------------------------------------
// ConformalFactor

ConformalFactor::ConformalFactor(int n, ValueFn value, JetFn jet, std::string name)
    : n_(n),
      value_(std::move(value)),
      jet_(std::move(jet)),
      name_(std::move(name)),
      mode_(jet_ ? DerivativeMode::analytic() : DerivativeMode::finite_difference()) {}

ConformalFactor ConformalFactor::constant(int n, double c) {
    return ConformalFactor(
        n, [c](const Vector&) { return c; },
        [n, c](const Vector&) { return ScalarJet{c, Vector::Zero(n), Matrix::Zero(n, n)}; },
        fmt::format("const({})", c));
}

ConformalFactor ConformalFactor::with_mode(DerivativeMode mode) const {
    if (mode.kind == DerivativeMode::Kind::Analytic && !jet_) {
        throw std::invalid_argument(fmt::format("ConformalFactor '{}' has no analytic derivatives", name_));
    }
    ConformalFactor copy = *this;
    copy.mode_ = mode;
    return copy;
}

ScalarJet ConformalFactor::derivatives(const Vector& x) const {
    if (mode_.kind == DerivativeMode::Kind::Analytic) return jet_(x);
    ScalarJet out{value_(x), Vector::Zero(n_), Matrix::Zero(n_, n_)};
    std::vector<double> d1, d2;
    fd_derivatives<double>(x, mode_, value_, d1, d2);
    for (int i = 0; i < n_; ++i) {
        out.grad[i] = d1[i];
        for (int j = 0; j < n_; ++j) out.hess(i, j) = d2[i * n_ + j];
    }
    return out;
}

ConformalFactor ConformalFactor::scaled(double c) const {
    const ConformalFactor base = *this;
    JetFn jet;
    if (jet_) {
        jet = [base, c](const Vector& x) {
            auto j = base.jet_(x);
            j.value *= c;
            j.grad *= c;
            j.hess *= c;
            return j;
        };
    }
    ConformalFactor out(n_, [base, c](const Vector& x) { return c * base.value_(x); }, std::move(jet),
                        fmt::format("{}*{}", c, name_));
    out.mode_ = mode_;
    return out;
}

ConformalFactor ConformalFactor::times(const ConformalFactor& other) const {
    const ConformalFactor a = *this;
    const ConformalFactor b = other;
    JetFn jet;
    if (a.jet_ && b.jet_) {
        jet = [a, b](const Vector& x) {
            const auto ja = a.jet_(x);
            const auto jb = b.jet_(x);
            ScalarJet out;
            out.value = ja.value * jb.value;
            out.grad = ja.value * jb.grad + jb.value * ja.grad;
            out.hess = ja.value * jb.hess + jb.value * ja.hess + ja.grad * jb.grad.transpose() +
                       jb.grad * ja.grad.transpose();
            return out;
        };
    }
    ConformalFactor out(n_, [a, b](const Vector& x) { return a.value_(x) * b.value_(x); }, std::move(jet),
                        fmt::format("{}*{}", a.name_, b.name_));
    if (!out.jet_) out.mode_ = DerivativeMode::finite_difference();
    else if (a.mode_.kind == DerivativeMode::Kind::FiniteDifference) out.mode_ = a.mode_;
    else out.mode_ = b.mode_;
    return out;
}

// ---------------------------------------------------------------------------
// Eigenvalues

EigenvalueVector::EigenvalueVector(Vector values) : values_(std::move(values)) {
    std::sort(values_.data(), values_.data() + values_.size());
}

EigenvalueVector eigen_rel(const Matrix& a, const Matrix& metric) {
    if (a.rows() != a.cols() || metric.rows() != a.rows() || metric.cols() != a.cols()) {
        throw std::invalid_argument("eigen_rel: shape mismatch");
    }
    const Matrix gs = 0.5 * (metric + metric.transpose());
    Eigen::LLT<Matrix> llt(gs);
    if (llt.info() != Eigen::Success) throw DomainError("eigen_rel: metric is not positive definite");
    const Matrix l = llt.matrixL();
    // C = L^{-1} A L^{-T}
    const Matrix linv_a = l.triangularView<Eigen::Lower>().solve(0.5 * (a + a.transpose()));
    const Matrix c = l.triangularView<Eigen::Lower>().solve(linv_a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigen_rel: eigensolver failed");
    return EigenvalueVector(es.eigenvalues());
}

// ---------------------------------------------------------------------------
// Curvature

namespace {

Matrix inverse_metric(const Matrix& g) {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) throw NumericalError("metric is singular or indefinite at the query point");
    return llt.solve(Matrix::Identity(g.rows(), g.cols()));
}

struct Connection {
    Matrix ginv;
    std::vector<Matrix> gamma;   // gamma[k](i,j)
    std::vector<Matrix> dgamma;  // dgamma[m*n + k](i,j) = d_m Gamma^k_ij
};

Connection connection(const MetricJet& jet) {
    const int n = static_cast<int>(jet.g.rows());
    Connection c;
    c.ginv = inverse_metric(jet.g);

    // T[l](i,j) = d_i g_jl + d_j g_il - d_l g_ij
    std::vector<Matrix> t(n, Matrix::Zero(n, n));
    for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t[l](i, j) = jet.dg[i](j, l) + jet.dg[j](i, l) - jet.dg[l](i, j);

    c.gamma.assign(n, Matrix::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) c.gamma[k] += 0.5 * c.ginv(k, l) * t[l];

    c.dgamma.assign(static_cast<std::size_t>(n * n), Matrix::Zero(n, n));
    for (int m = 0; m < n; ++m) {
        const Matrix dginv = -c.ginv * jet.dg[m] * c.ginv;
        for (int l = 0; l < n; ++l) {
            Matrix dt(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    dt(i, j) = jet.d2g[m * n + i](j, l) + jet.d2g[m * n + j](i, l) - jet.d2g[m * n + l](i, j);
            for (int k = 0; k < n; ++k) c.dgamma[m * n + k] += 0.5 * (dginv(k, l) * t[l] + c.ginv(k, l) * dt);
        }
    }
    return c;
}

Matrix ricci_from_connection(const Connection& c, int n) {
    Matrix ric = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double r = 0.0;
            for (int k = 0; k < n; ++k) {
                r += c.dgamma[k * n + k](i, j) - c.dgamma[j * n + k](i, k);
                for (int l = 0; l < n; ++l) {
                    r += c.gamma[k](k, l) * c.gamma[l](i, j) - c.gamma[k](j, l) * c.gamma[l](i, k);
                }
            }
            ric(i, j) = r;
        }
    }
    return 0.5 * (ric + ric.transpose());
}

Matrix schouten_from_ricci(const Matrix& ric, const Matrix& g, const Matrix& ginv) {
    const double n = static_cast<double>(g.rows());
    const double scal = (ginv.cwiseProduct(ric)).sum();
    return (ric - scal / (2.0 * (n - 1.0)) * g) / (n - 2.0);
}

}  // namespace

std::vector<Matrix> christoffel(const MetricJet& jet) { return connection(jet).gamma; }

Matrix ricci_background(const MetricField& g, const Vector& x) {
    const auto jet = g.derivatives(x);
    return ricci_from_connection(connection(jet), g.dim());
}

double scalar_curvature(const MetricField& g, const Vector& x) {
    const auto jet = g.derivatives(x);
    const auto c = connection(jet);
    return (c.ginv.cwiseProduct(ricci_from_connection(c, g.dim()))).sum();
}

Matrix schouten_background(const MetricField& g, const Vector& x) {
    const auto jet = g.derivatives(x);
    const auto c = connection(jet);
    return schouten_from_ricci(ricci_from_connection(c, g.dim()), jet.g, c.ginv);
}

Matrix covariant_hessian(const MetricJet& g, const ScalarJet& u) {
    const auto gamma = christoffel(g);
    Matrix h = u.hess;
    for (std::size_t k = 0; k < gamma.size(); ++k) h -= gamma[k] * u.grad[static_cast<int>(k)];
    return 0.5 * (h + h.transpose());
}

double laplacian(const MetricField& g, const ScalarJet& u, const Vector& x) {
    const auto jet = g.derivatives(x);
    return (inverse_metric(jet.g).cwiseProduct(covariant_hessian(jet, u))).sum();
}

Matrix schouten_conformal(const MetricField& g, const ConformalFactor& u, const Vector& x) {
    const int n = g.dim();
    if (u.dim() != n) throw std::invalid_argument("schouten_conformal: dimension mismatch");
    const auto gj = g.derivatives(x);
    const auto uj = u.derivatives(x);
    if (!(uj.value > 0.0)) throw DomainError(fmt::format("schouten_conformal: u = {} is not positive", uj.value));

    const auto c = connection(gj);
    const Matrix ag = schouten_from_ricci(ricci_from_connection(c, n), gj.g, c.ginv);
    Matrix hess = uj.hess;
    for (int k = 0; k < n; ++k) hess -= c.gamma[k] * uj.grad[k];
    hess = 0.5 * (hess + hess.transpose());

    const double nd = static_cast<double>(n);
    const double inv_u = 1.0 / uj.value;
    const double grad_sq = uj.grad.dot(c.ginv * uj.grad);
    return -2.0 / (nd - 2.0) * inv_u * hess +
           2.0 * nd / ((nd - 2.0) * (nd - 2.0)) * inv_u * inv_u * (uj.grad * uj.grad.transpose()) -
           2.0 / ((nd - 2.0) * (nd - 2.0)) * inv_u * inv_u * grad_sq * gj.g + ag;
}

Matrix conformal_metric_at(const MetricField& g, const ConformalFactor& u, const Vector& x) {
    const double nd = static_cast<double>(g.dim());
    const double val = u.value(x);
    if (!(val > 0.0)) throw DomainError("conformal metric: u is not positive");
    return std::pow(val, 4.0 / (nd - 2.0)) * g.metric(x);
}

Matrix ricci_conformal(const MetricField& g, const ConformalFactor& u, const Vector& x) {
    const int n = g.dim();
    const Matrix a = schouten_conformal(g, u, x);
    const Matrix gu = conformal_metric_at(g, u, x);
    const double trace = (inverse_metric(gu).cwiseProduct(a)).sum();
    return (static_cast<double>(n) - 2.0) * a + trace * gu;
}

MetricField conformal_metric(const MetricField& g, const ConformalFactor& u) {
    const int n = g.dim();
    const double q = 4.0 / (static_cast<double>(n) - 2.0);
    MetricField::ValueFn value = [g, u, q](const Vector& x) { return std::pow(u.value(x), q) * g.metric(x); };
    MetricField::JetFn jet;
    const bool analytic = g.mode().kind == DerivativeMode::Kind::Analytic &&
                          u.mode().kind == DerivativeMode::Kind::Analytic;
    if (analytic) {
        jet = [g, u, q, n](const Vector& x) {
            const auto gj = g.derivatives(x);
            const auto uj = u.derivatives(x);
            const double phi = std::pow(uj.value, q);
            const double p1 = q * std::pow(uj.value, q - 1.0);
            const double p2 = q * (q - 1.0) * std::pow(uj.value, q - 2.0);
            const Vector dphi = p1 * uj.grad;
            const Matrix d2phi = p2 * uj.grad * uj.grad.transpose() + p1 * uj.hess;
            MetricJet out{phi * gj.g, std::vector<Matrix>(n), std::vector<Matrix>(static_cast<std::size_t>(n * n))};
            for (int k = 0; k < n; ++k) out.dg[k] = dphi[k] * gj.g + phi * gj.dg[k];
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    out.d2g[k * n + l] = d2phi(k, l) * gj.g + dphi[k] * gj.dg[l] + dphi[l] * gj.dg[k] +
                                         phi * gj.d2g[k * n + l];
            return out;
        };
    }
    MetricField out(n, g.domain(), std::move(value), std::move(jet), fmt::format("{}^(4/(n-2)) * {}", u.name(), g.name()));
    if (!analytic) {
        const double h = g.mode().kind == DerivativeMode::Kind::FiniteDifference ? g.mode().h : u.mode().h;
        return out.with_mode(DerivativeMode::finite_difference(h));
    }
    return out;
}

double ricci_lower_margin(const MetricField& g, const ConformalFactor& u, double alpha,
                          std::span<const Vector> samples) {
    const double nd = static_cast<double>(g.dim());
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : samples) {
        const Matrix gu = conformal_metric_at(g, u, x);
        const Matrix m = ricci_conformal(g, u, x) + (nd - 1.0) * alpha * alpha * gu;
        worst = std::min(worst, eigen_rel(m, gu)[0]);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Builtins

namespace metrics {

namespace {

// (sin^2 r / r^2 - 1) / r^2 as a function of rho = r^2.
template <class T>
T sphere_normal_h(const T& rho) {
    if (value_of(rho) < 1.0) {
        // sum_{k>=2} (-1)^{k+1} 2^{2k-1} rho^{k-2} / (2k)!
        constexpr int kTerms = 14;
        double coeff[kTerms];
        double fact = 2.0;  // (2k)! at k = 1
        double pow2 = 2.0;  // 2^{2k-1} at k = 1
        for (int k = 2; k < kTerms + 2; ++k) {
            fact *= (2.0 * k - 1.0) * (2.0 * k);
            pow2 *= 4.0;
            coeff[k - 2] = ((k % 2 == 1) ? 1.0 : -1.0) * pow2 / fact;
        }
        T acc = T(coeff[kTerms - 1]);
        for (int i = kTerms - 2; i >= 0; --i) acc = acc * rho + T(coeff[i]);
        return acc;
    }
    using std::sin;
    using std::sqrt;
    const T r = sqrt(rho);
    const T s = sin(r);
    return (s * s / rho - T(1.0)) / rho;
}

}  // namespace

MetricField flat(int n, double half_width) {
    return MetricField::from_expression(
        n, Box::cube(n, half_width),
        [n](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            std::vector<T> g(static_cast<std::size_t>(n * n), T(0.0));
            for (int i = 0; i < n; ++i) g[i * n + i] = T(1.0);
            return g;
        },
        "flat");
}

MetricField sphere_normal(int n) {
    const double half_width = 0.999 * std::numbers::pi / std::sqrt(static_cast<double>(n));
    return MetricField::from_expression(
        n, Box::cube(n, half_width),
        [n](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            T rho(0.0);
            for (int i = 0; i < n; ++i) rho = rho + x[i] * x[i];
            const T h = sphere_normal_h(rho);
            std::vector<T> g(static_cast<std::size_t>(n * n));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    T entry = -(h * x[i] * x[j]);
                    if (i == j) entry = entry + T(1.0) + h * rho;
                    g[i * n + j] = entry;
                }
            }
            return g;
        },
        "sphere-normal");
}

MetricField sphere_polar(int n) {
    Box domain{Vector::Constant(n, -10.0), Vector::Constant(n, 10.0)};
    domain.lower[0] = 1e-6;
    domain.upper[0] = std::numbers::pi - 1e-6;
    return MetricField::from_expression(
        n, std::move(domain),
        [n](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            using std::sin;
            T y2(0.0);
            for (int i = 1; i < n; ++i) y2 = y2 + x[i] * x[i];
            const T s = sin(x[0]);
            const T conf = T(2.0) / (T(1.0) + y2);
            const T tangential = s * s * conf * conf;
            std::vector<T> g(static_cast<std::size_t>(n * n), T(0.0));
            g[0] = T(1.0);
            for (int i = 1; i < n; ++i) g[i * n + i] = tangential;
            return g;
        },
        "sphere-polar");
}

MetricField sphere_stereographic(int n, double half_width) {
    return MetricField::from_expression(
        n, Box::cube(n, half_width),
        [n](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            T r2(0.0);
            for (int i = 0; i < n; ++i) r2 = r2 + x[i] * x[i];
            const T conf = T(2.0) / (T(1.0) + r2);
            std::vector<T> g(static_cast<std::size_t>(n * n), T(0.0));
            for (int i = 0; i < n; ++i) g[i * n + i] = conf * conf;
            return g;
        },
        "sphere-stereographic");
}

}  // namespace metrics

namespace factors {

ConformalFactor poincare_ball(int n) {
    const double p = (static_cast<double>(n) - 2.0) / 2.0;
    return ConformalFactor::from_expression(
        n,
        [n, p](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            using std::pow;
            T r2(0.0);
            for (int i = 0; i < n; ++i) r2 = r2 + x[i] * x[i];
            return pow(T(2.0) / (T(1.0) - r2), p);
        },
        "poincare-ball");
}

ConformalFactor inversion(const Vector& p) {
    const int n = static_cast<int>(p.size());
    const double e = (2.0 - static_cast<double>(n)) / 2.0;
    return ConformalFactor::from_expression(
        n,
        [n, p, e](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            using std::pow;
            T r2(0.0);
            for (int i = 0; i < n; ++i) r2 = r2 + (x[i] - T(p[i])) * (x[i] - T(p[i]));
            return pow(r2, e);
        },
        "inversion");
}

}  // namespace factors

}  // namespace sigmak::conformal
