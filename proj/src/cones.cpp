#include "sigmak/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "sigmak/errors.hpp"

namespace sigmak::cones {

std::vector<double> elementary_symmetric(std::span<const double> lambda) {
    const std::size_t n = lambda.size();
    std::vector<double> e(n + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        // descending so e[j-1] still holds the previous prefix
        for (std::size_t j = i + 1; j >= 1; --j) e[j] += lambda[i] * e[j - 1];
    }
    return e;
}

namespace {

// Truncated recurrence: e_0..e_k only, O(nk).
std::vector<double> elementary_symmetric_upto(std::span<const double> lambda, int k) {
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const int top = std::min<int>(k, static_cast<int>(i) + 1);
        for (int j = top; j >= 1; --j) e[j] += lambda[i] * e[j - 1];
    }
    return e;
}

}  // namespace

double sigma_k(std::span<const double> lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    if (k < 1 || k > n) {
        throw std::invalid_argument(fmt::format("sigma_k: k = {} outside 1..{}", k, n));
    }
    return elementary_symmetric_upto(lambda, k)[k];
}

bool gamma_k_member(std::span<const double> lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    if (k < 1 || k > n) return false;
    const auto e = elementary_symmetric_upto(lambda, k);
    for (int j = 1; j <= k; ++j) {
        if (!(e[j] > 0.0)) return false;
    }
    return true;
}

std::vector<double> homotopy_argument(std::span<const double> lambda, double t) {
    const double s1 = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    std::vector<double> out(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) out[i] = t * lambda[i] + (1.0 - t) * s1;
    return out;
}

ConeSpec ConeSpec::gamma_k(int n, int k) {
    if (n < 3) throw std::invalid_argument(fmt::format("cone dimension n = {} must be >= 3", n));
    if (k < 1 || k > n) throw std::invalid_argument(fmt::format("Gamma_k: k = {} outside 1..{}", k, n));
    return ConeSpec(n, k, 1.0, false);
}

ConeSpec ConeSpec::homotopy(int n, int k, double t) {
    auto base = gamma_k(n, k);
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument(fmt::format("homotopy parameter t = {} outside [0,1]", t));
    return ConeSpec(base.n_, base.k_, t, true);
}

bool ConeSpec::contains(std::span<const double> lambda) const {
    if (static_cast<int>(lambda.size()) != n_) return false;
    if (!homotopy_) return gamma_k_member(lambda, k_);
    const auto arg = homotopy_argument(lambda, t_);
    return gamma_k_member(arg, k_);
}

std::string ConeSpec::name() const {
    if (!homotopy_) return fmt::format("Gamma_{}(n={})", k_, n_);
    return fmt::format("Gamma_{}[t={}](n={})", k_, t_, n_);
}

double cone_margin(std::span<const double> lambda, const ConeSpec& cone) {
    const std::size_t n = lambda.size();
    if (n == 0) return -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (double l : lambda) scale = std::max(scale, std::abs(l));
    if (scale == 0.0) return 0.0;

    std::vector<double> shifted(n);
    auto member_at = [&](double t) {
        for (std::size_t i = 0; i < n; ++i) shifted[i] = lambda[i] - t;
        return cone.contains(shifted);
    };

    // lambda - t e is in the positive orthant for t < min(lambda) and has
    // sigma_1 <= 0 for t >= mean(lambda).
    const double minimum = *std::min_element(lambda.begin(), lambda.end());
    double lo = minimum - 1e-3 * scale;
    double hi = std::accumulate(lambda.begin(), lambda.end(), 0.0) / static_cast<double>(n);
    int expansions = 0;
    while (!member_at(lo)) {
        lo -= scale * std::ldexp(1.0, expansions);
        if (++expansions > 60) return -std::numeric_limits<double>::infinity();
    }
    if (member_at(hi)) return hi;  // unreachable for cones inside {sigma_1 > 0}

    const double tol = 1e-12 * scale;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (member_at(mid)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double mu_plus(const ConeSpec& cone) {
    const int n = cone.dim();
    std::vector<double> ray(static_cast<std::size_t>(n), 1.0);
    auto member_at = [&](double mu) {
        ray[0] = -mu;
        return cone.contains(ray);
    };

    double lo = 0.0;
    double hi = static_cast<double>(n - 1);
    if (member_at(hi)) {
        throw NumericalError(fmt::format("mu_plus: (-(n-1),1,...,1) inside {}; cone violates sigma_1 > 0", cone.name()));
    }
    if (!member_at(lo)) {
        // (0,1,...,1) on the boundary is allowed (Gamma_n); anything worse is a broken cone.
        if (member_at(-1e-9)) return 0.0;
        throw NumericalError(fmt::format("mu_plus: membership does not bracket along the ray for {}", cone.name()));
    }
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (member_at(mid)) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

CurvatureFunction CurvatureFunction::sigma_k_root(int n, int k) {
    auto cone = ConeSpec::gamma_k(n, k);
    const std::vector<double> half(static_cast<std::size_t>(n), 0.5);
    const double kappa = 1.0 / std::pow(sigma_k(half, k), 1.0 / k);
    return CurvatureFunction(cone, kappa);
}

CurvatureFunction CurvatureFunction::deformed(double t) const {
    return CurvatureFunction(ConeSpec::homotopy(cone_.dim(), cone_.k(), t), kappa_);
}

double CurvatureFunction::on_closure(std::span<const double> lambda) const {
    const int k = cone_.k();
    const double s = cone_.is_homotopy() ? sigma_k(homotopy_argument(lambda, cone_.t()), k) : sigma_k(lambda, k);
    return kappa_ * std::pow(std::max(s, 0.0), 1.0 / k);
}

double CurvatureFunction::operator()(std::span<const double> lambda) const {
    if (static_cast<int>(lambda.size()) != cone_.dim()) {
        throw std::invalid_argument(fmt::format("f: expected {} eigenvalues, got {}", cone_.dim(), lambda.size()));
    }
    if (!cone_.contains(lambda)) throw DomainError(fmt::format("f: eigenvalues outside {}", cone_.name()));
    return on_closure(lambda);
}

double homotopy_ft(const CurvatureFunction& f, double t, std::span<const double> lambda) {
    return f.deformed(t)(lambda);
}

}  // namespace sigmak::cones
