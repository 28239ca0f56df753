#pragma once

// Comparison geometry: the distance bound to a mean-convex boundary under a
// Ricci lower bound, hyperbolic model volumes, Bishop-Gromov ratios and an
// isoperimetric diagnostic.

#include <functional>
#include <ostream>
#include <span>
#include <vector>

namespace sigmak::comparison {

/// U(alpha, c0) = 1/c0 for alpha = 0, (1/alpha) arccoth(c0/alpha) otherwise.
/// Throws DomainError unless 0 <= alpha < c0.
[[nodiscard]] double hawking_bound(double alpha, double c0);

/// Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1).
[[nodiscard]] double unit_ball_volume(int n);

/// Simply connected space form of curvature -alpha^2.
struct ModelSpace {
    int n = 3;
    double alpha = 0.0;

    /// Throws std::invalid_argument unless n >= 2 and alpha >= 0.
    static ModelSpace make(int n, double alpha);
};

/// n c(n) int_0^r f(t)^{n-1} dt for a warping profile f with f(0) = 0, f'(0) = 1,
/// by adaptive Gauss-Kronrod quadrature.
[[nodiscard]] double warped_ball_volume(int n, const std::function<double(double)>& profile, double r);

/// Geodesic ball volume in the model space; c(n) r^n exactly when alpha = 0.
/// Throws DomainError unless r > 0.
[[nodiscard]] double model_ball_volume(const ModelSpace& m, double r);

/// Geodesic ball volume on the unit round sphere S^n, 0 < r <= pi.
[[nodiscard]] double sphere_ball_volume(int n, double r);

struct RatioRow {
    double r = 0.0;
    double volume = 0.0;
    double model_volume = 0.0;
    double ratio = 0.0;
};

struct RatioTable {
    std::vector<RatioRow> rows;
    /// Largest ratio(r_{i+1}) - ratio(r_i) over the grid.
    double max_increase = 0.0;
    double tolerance = 1e-8;
    bool nonincreasing = true;
};

/// Vol(B_r) / Vol_model(B_r) on an increasing grid. Successive increases up to
/// `tolerance` count as round-off. Throws std::invalid_argument if the grid is
/// not increasing and positive or a volume is not positive.
[[nodiscard]] RatioTable bg_ratio(const std::function<double(double)>& volumes, const ModelSpace& m,
                                  std::span<const double> r_grid, double tolerance = 1e-8);

/// Header "r,volume,model_volume,ratio".
void write_ratio_csv(std::ostream& os, const RatioTable& table);

/// area^{n/(n-1)} / volume. Throws DomainError unless both are positive.
[[nodiscard]] double isoperimetric_ratio(int n, double area, double volume);

/// The Euclidean ball value n^{n/(n-1)} c(n)^{1/(n-1)}.
[[nodiscard]] double euclidean_isoperimetric_constant(int n);

struct AnnulusRow {
    double thickness = 0.0;
    double area = 0.0;
    double volume = 0.0;
    double ratio = 0.0;          // area^{n/(n-1)} / volume, grows without bound
    double inverse_ratio = 0.0;  // volume / area^{n/(n-1)}, tends to 0
};

/// Flat annuli {outer - w < |x| < outer}; both boundary spheres count toward the area.
[[nodiscard]] std::vector<AnnulusRow> annulus_isoperimetric_table(int n, double outer_radius,
                                                                  std::span<const double> thicknesses);

}  // namespace sigmak::comparison
