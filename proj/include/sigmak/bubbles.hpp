#pragma once

// Standard bubbles U_{a,p}(x) = c (a / (1 + a^2 |x - p|^2))^{(n-2)/2},
// c = 2^{(n-2)/2}, the stereographic conformal factor, and blow-up rescaling.

#include <span>
#include <vector>

#include "sigmak/cones.hpp"
#include "sigmak/conformal.hpp"

namespace sigmak::bubbles {

using conformal::Matrix;
using conformal::Vector;

/// Normalization constant 2^{(n-2)/2}.
[[nodiscard]] double bubble_constant(int n);

class Bubble {
public:
    /// Throws std::invalid_argument unless a > 0 and dim(p) >= 3.
    Bubble(double a, Vector p);

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(p_.size()); }
    [[nodiscard]] double scale() const noexcept { return a_; }
    [[nodiscard]] const Vector& center() const noexcept { return p_; }
    [[nodiscard]] double constant() const noexcept { return c_; }
    [[nodiscard]] double peak() const;

private:
    double a_;
    Vector p_;
    double c_;
};

[[nodiscard]] double bubble_eval(const Bubble& b, const Vector& x);

/// Value, gradient and Hessian in closed form.
[[nodiscard]] conformal::ScalarJet bubble_jet(const Bubble& b, const Vector& x);

/// The bubble as a conformal factor. Analytic mode uses bubble_jet; otherwise
/// derivatives are central differences with the given mode's step.
[[nodiscard]] conformal::ConformalFactor as_factor(const Bubble& b,
                                                    conformal::DerivativeMode mode = conformal::DerivativeMode::analytic());

/// U_{1,0}(x): the round metric in stereographic coordinates is
/// U_{1,0}^{4/(n-2)} |dx|^2 = (2 / (1 + |x|^2))^2 |dx|^2.
[[nodiscard]] double stereographic_factor(int n, const Vector& x);

/// Pull-back of |dz|^2 under the inverse stereographic map
/// z = (2x / (1 + |x|^2), (|x|^2 - 1) / (|x|^2 + 1)), computed from its Jacobian.
[[nodiscard]] Matrix stereographic_pullback(const Vector& x);

struct BubbleReport {
    int samples = 0;
    double max_eigen_deviation = 0.0;  // max |lambda_i - 1/2|
    double max_f_deviation = 0.0;      // max |f(lambda) - 1|
    double tolerance = 0.0;
    bool pass = false;
};

/// sqrt(1 + a^2 |x - p|^2) / a. Used as the finite-difference step unit, it keeps the
/// truncation and round-off errors of lambda(A) balanced from the core out to the tail.
[[nodiscard]] double local_length_scale(const Bubble& b, const Vector& x);

/// Default tolerance for a derivative mode: 1e-8 analytic, 1e-6 finite differences.
[[nodiscard]] double default_tolerance(const conformal::DerivativeMode& mode);

/// Checks lambda(A_{g_U}) = (1/2, ..., 1/2) relative to g_U = U^{4/(n-2)} g_flat
/// and f(lambda) = 1 at every sample. A violation yields pass = false.
/// In finite-difference mode the step at x is mode.h * local_length_scale(b, x).
[[nodiscard]] BubbleReport bubble_verify(const cones::CurvatureFunction& f, const Bubble& b,
                                         std::span<const Vector> samples, conformal::DerivativeMode mode,
                                         double tolerance);

[[nodiscard]] inline BubbleReport bubble_verify(const cones::CurvatureFunction& f, const Bubble& b,
                                                std::span<const Vector> samples,
                                                conformal::DerivativeMode mode = conformal::DerivativeMode::analytic()) {
    return bubble_verify(f, b, samples, mode, default_tolerance(mode));
}

struct ScaleRule {
    enum class Kind { Critical, Subcritical };
    Kind kind = Kind::Critical;
    double p = 0.0;  // subcritical exponent p_i

    static ScaleRule critical() { return {}; }
    static ScaleRule subcritical(double p) { return {Kind::Subcritical, p}; }

    /// 2/(n-2) for the critical rule, (p-1)/2 otherwise.
    [[nodiscard]] double exponent(int n) const;
};

/// x -> (c / u(y0)) u(y0 + c^s u(y0)^{-s} x) on the ball |x|_inf <= radius.
/// Throws DomainError if u(y0) <= 0 or the image of that ball leaves `chart`.
[[nodiscard]] conformal::ConformalFactor rescale_profile(const conformal::ConformalFactor& u, const Vector& y0,
                                                         ScaleRule rule, const conformal::Box& chart, double radius);

}  // namespace sigmak::bubbles
