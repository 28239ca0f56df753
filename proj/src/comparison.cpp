#include "sigmak/comparison.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "sigmak/errors.hpp"

namespace sigmak::comparison {

double hawking_bound(double alpha, double c0) {
    if (!(alpha >= 0.0) || !(c0 > alpha))
        throw DomainError(fmt::format("hawking_bound: need 0 <= alpha < c0, got alpha = {}, c0 = {}", alpha, c0));
    if (alpha == 0.0) return 1.0 / c0;
    return std::atanh(alpha / c0) / alpha;
}

double unit_ball_volume(int n) { return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

ModelSpace ModelSpace::make(int n, double alpha) {
    if (n < 2) throw std::invalid_argument("ModelSpace: n must be >= 2");
    if (!(alpha >= 0.0)) throw std::invalid_argument(fmt::format("ModelSpace: alpha = {} must be >= 0", alpha));
    return {n, alpha};
}

double warped_ball_volume(int n, const std::function<double(double)>& profile, double r) {
    if (!(r > 0.0)) throw DomainError(fmt::format("ball volume: r = {} must be positive", r));
    auto integrand = [&](double t) { return std::pow(profile(t), n - 1); };
    double error = 0.0;
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, r, 15, 1e-14, &error);
    return n * unit_ball_volume(n) * integral;
}

double model_ball_volume(const ModelSpace& m, double r) {
    if (!(r > 0.0)) throw DomainError(fmt::format("model_ball_volume: r = {} must be positive", r));
    if (m.alpha == 0.0) return unit_ball_volume(m.n) * std::pow(r, m.n);
    const double a = m.alpha;
    return warped_ball_volume(m.n, [a](double t) { return std::sinh(a * t) / a; }, r);
}

double sphere_ball_volume(int n, double r) {
    if (!(r > 0.0 && r <= std::numbers::pi))
        throw DomainError(fmt::format("sphere_ball_volume: r = {} not in (0, pi]", r));
    return warped_ball_volume(n, [](double t) { return std::sin(t); }, r);
}

RatioTable bg_ratio(const std::function<double(double)>& volumes, const ModelSpace& m, std::span<const double> r_grid,
                    double tolerance) {
    RatioTable table;
    table.tolerance = tolerance;
    double prev_r = 0.0;
    for (double r : r_grid) {
        if (!(r > prev_r)) throw std::invalid_argument("bg_ratio: grid must be positive and increasing");
        prev_r = r;
        RatioRow row;
        row.r = r;
        row.volume = volumes(r);
        if (!(row.volume > 0.0)) throw std::invalid_argument(fmt::format("bg_ratio: volume {} at r = {}", row.volume, r));
        row.model_volume = model_ball_volume(m, r);
        row.ratio = row.volume / row.model_volume;
        if (!table.rows.empty()) table.max_increase = std::max(table.max_increase, row.ratio - table.rows.back().ratio);
        table.rows.push_back(row);
    }
    table.nonincreasing = table.max_increase <= tolerance;
    return table;
}

void write_ratio_csv(std::ostream& os, const RatioTable& table) {
    os << "r,volume,model_volume,ratio\n";
    for (const auto& row : table.rows)
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", row.r, row.volume, row.model_volume, row.ratio);
}

double isoperimetric_ratio(int n, double area, double volume) {
    if (!(area > 0.0 && volume > 0.0))
        throw DomainError(fmt::format("isoperimetric_ratio: area = {}, volume = {} must be positive", area, volume));
    return std::pow(area, n / (n - 1.0)) / volume;
}

double euclidean_isoperimetric_constant(int n) {
    return std::pow(static_cast<double>(n), n / (n - 1.0)) * std::pow(unit_ball_volume(n), 1.0 / (n - 1.0));
}

std::vector<AnnulusRow> annulus_isoperimetric_table(int n, double outer_radius, std::span<const double> thicknesses) {
    std::vector<AnnulusRow> rows;
    const double sphere = n * unit_ball_volume(n);
    for (double w : thicknesses) {
        if (!(w > 0.0 && w < outer_radius))
            throw DomainError(fmt::format("annulus thickness {} not in (0, {})", w, outer_radius));
        const double inner = outer_radius - w;
        auto integrand = [n, sphere](double t) { return sphere * std::pow(t, n - 1); };
        AnnulusRow row;
        row.thickness = w;
        row.area = sphere * (std::pow(outer_radius, n - 1) + std::pow(inner, n - 1));
        row.volume = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, inner, outer_radius, 15, 1e-14);
        row.ratio = isoperimetric_ratio(n, row.area, row.volume);
        row.inverse_ratio = 1.0 / row.ratio;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace sigmak::comparison
