#pragma once

// Elementary symmetric functions, Garding cones and the curvature functions
// f = kappa * sigma_k^{1/k} together with their deformation towards
// (sigma_1, Gamma_1).

#include <span>
#include <string>
#include <vector>

namespace sigmak::cones {

/// All elementary symmetric functions e_0 = 1, e_1, ..., e_n of lambda,
/// built by the prefix-polynomial recurrence prod_i (1 + lambda_i z).
[[nodiscard]] std::vector<double> elementary_symmetric(std::span<const double> lambda);

/// k-th elementary symmetric function. Throws std::invalid_argument unless
/// 1 <= k <= n.
[[nodiscard]] double sigma_k(std::span<const double> lambda, int k);

/// lambda in Gamma_k, tested as sigma_j(lambda) > 0 for j = 1..k.
[[nodiscard]] bool gamma_k_member(std::span<const double> lambda, int k);

/// An open convex symmetric cone: Gamma_k, or the deformed cone
/// Gamma_t = { lambda : t lambda + (1 - t) sigma_1(lambda) e in Gamma_k }.
class ConeSpec {
public:
    static ConeSpec gamma_k(int n, int k);
    static ConeSpec homotopy(int n, int k, double t);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] bool is_homotopy() const noexcept { return homotopy_; }

    [[nodiscard]] bool contains(std::span<const double> lambda) const;
    [[nodiscard]] std::string name() const;

private:
    ConeSpec(int n, int k, double t, bool homotopy) : n_(n), k_(k), t_(t), homotopy_(homotopy) {}

    int n_;
    int k_;
    double t_;
    bool homotopy_;
};

/// Diagonal-ray margin m(lambda) = sup{ t : lambda - t e in Gamma }.
/// Positive inside the cone, nonpositive outside; homogeneous of degree one.
/// Returns -infinity only if no point of the ray lies in the cone.
[[nodiscard]] double cone_margin(std::span<const double> lambda, const ConeSpec& cone);

/// The unique mu in [0, n-1] with (-mu, 1, ..., 1) on the cone boundary.
/// Throws NumericalError if membership does not bracket along the ray.
[[nodiscard]] double mu_plus(const ConeSpec& cone);

/// f = kappa * sigma_k^{1/k} on Gamma_k, optionally deformed to
/// f_t(lambda) = f(t lambda + (1 - t) sigma_1(lambda) e) on Gamma_t.
///
/// kappa is fixed so that the undeformed function equals 1 at (1/2, ..., 1/2),
/// the eigenvalue vector of the round-sphere Schouten tensor. A deformed
/// function keeps the base kappa and is not renormalized.
class CurvatureFunction {
public:
    static CurvatureFunction sigma_k_root(int n, int k);
    [[nodiscard]] CurvatureFunction deformed(double t) const;

    [[nodiscard]] const ConeSpec& cone() const noexcept { return cone_; }
    [[nodiscard]] double kappa() const noexcept { return kappa_; }
    [[nodiscard]] int dim() const noexcept { return cone_.dim(); }
    [[nodiscard]] double t() const noexcept { return cone_.t(); }

    /// Throws DomainError when lambda is not in the (open) cone.
    [[nodiscard]] double operator()(std::span<const double> lambda) const;

    /// Continuous extension to the closed cone (zero on the boundary). No
    /// membership check.
    [[nodiscard]] double on_closure(std::span<const double> lambda) const;

private:
    CurvatureFunction(ConeSpec cone, double kappa) : cone_(cone), kappa_(kappa) {}

    ConeSpec cone_;
    double kappa_;
};

[[nodiscard]] inline double f_eval(const CurvatureFunction& f, std::span<const double> lambda) {
    return f(lambda);
}

/// f_t(lambda) for the undeformed f. Throws DomainError outside Gamma_t.
[[nodiscard]] double homotopy_ft(const CurvatureFunction& f, double t, std::span<const double> lambda);

/// t lambda + (1 - t) sigma_1(lambda) e.
[[nodiscard]] std::vector<double> homotopy_argument(std::span<const double> lambda, double t);

}  // namespace sigmak::cones
