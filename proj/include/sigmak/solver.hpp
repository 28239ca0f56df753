#pragma once

// Rotationally symmetric solves on the round sphere S^n. A profile is u(theta)
// sampled on theta_j = j pi / (N - 1), j = 0..N-1, with both poles included.
// Derivatives come either from Chebyshev collocation in x = cos(theta) or from
// second-order central differences in theta.

#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigmak/cones.hpp"
#include "sigmak/conformal.hpp"
#include "sigmak/errors.hpp"

namespace sigmak::solver {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Discretization { Chebyshev, UniformFD };

[[nodiscard]] std::string to_string(Discretization d);
/// "chebyshev" or "fd"; throws ConfigError otherwise.
[[nodiscard]] Discretization discretization_from_string(const std::string& s);

/// u_theta, u_theta_theta and cot(theta) u_theta at every node. At the poles
/// u_theta = 0 and cot(theta) u_theta is replaced by its limit u_theta_theta.
struct RadialDerivatives {
    Vector d1;
    Vector d2;
    Vector tangential;
};

class RadialGrid {
public:
    /// Throws std::invalid_argument unless n >= 3 and nodes >= 5.
    static std::shared_ptr<const RadialGrid> make(int n, int nodes, Discretization kind);

    [[nodiscard]] int dim() const noexcept { return n_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(theta_.size()); }
    [[nodiscard]] Discretization kind() const noexcept { return kind_; }
    [[nodiscard]] const Vector& theta() const noexcept { return theta_; }

    /// int_{S^n} phi dv ~ weights . phi (exact for polynomials in cos(theta) of
    /// degree < N).
    [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
    [[nodiscard]] double volume() const noexcept { return volume_; }

    [[nodiscard]] const Matrix& d1() const noexcept { return d1_; }
    [[nodiscard]] const Matrix& d2() const noexcept { return d2_; }
    [[nodiscard]] const Matrix& tangential() const noexcept { return tan_; }
    /// Delta = d2 + (n - 1) tangential on radial functions.
    [[nodiscard]] const Matrix& laplacian() const noexcept { return lap_; }

    [[nodiscard]] RadialDerivatives derivatives(const Vector& u) const;

private:
    RadialGrid() = default;

    int n_ = 3;
    Discretization kind_ = Discretization::Chebyshev;
    Vector theta_;
    Vector weights_;
    double volume_ = 0.0;
    Matrix d1_, d2_, tan_, lap_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

struct RadialProfile {
    GridPtr grid;
    Vector u;

    /// Samples u(theta) at the nodes. Throws DomainError if a value is not positive.
    static RadialProfile sample(GridPtr grid, const std::function<double(double)>& u);
    static RadialProfile constant(GridPtr grid, double c);

    [[nodiscard]] int dim() const { return grid->dim(); }
    [[nodiscard]] int size() const { return grid->size(); }
};

/// Schouten eigenvalues of g_u relative to g_u for a radial u, from u and its
/// theta derivatives: (radial, tangential) with multiplicities 1 and n - 1.
struct RadialEigs {
    double radial = 0.0;
    double tangential = 0.0;

    [[nodiscard]] conformal::EigenvalueVector full(int n) const;
};

/// Throws DomainError unless u > 0.
[[nodiscard]] RadialEigs schouten_radial(int n, double u, double d1, double d2, double tangential);

/// Eigenvalues at node j, ascending, length n. Throws DomainError if u_j <= 0
/// or j is out of range.
[[nodiscard]] conformal::EigenvalueVector radial_schouten_eigs(const RadialProfile& profile, int j);

/// Pair form at every node.
[[nodiscard]] std::vector<RadialEigs> radial_schouten_all(const RadialProfile& profile);

/// Smallest eigenvalue of Ric_{g_u} + (n-1) alpha^2 g_u relative to g_u.
[[nodiscard]] double ricci_margin(int n, const RadialEigs& e, double alpha = 0.0);

using AngularField = std::function<double(double)>;

/// f(lambda(A_{g_u})) - psi u^{-s} at every node; an empty psi means psi = 1.
/// Throws ConeExitError carrying the first node where lambda leaves the cone
/// of f, DomainError if u <= 0 somewhere.
[[nodiscard]] Vector residual_Fs(const RadialProfile& profile, const cones::CurvatureFunction& f, double s,
                                 const AngularField& psi = {});

/// f_t(lambda(A_{g_u})) - u^{-2/(n-2)} for the undeformed f.
[[nodiscard]] Vector residual_Gt(const RadialProfile& profile, const cones::CurvatureFunction& f, double t);

/// -Delta u + [(1-t) + t c(n) R] u - [(1-t) avg(u^2) + t] u^{p_t} with
/// p_t = (1 - t) + t n/(n-2), c(n) = (n-2)/(4(n-1)), R = n(n-1).
[[nodiscard]] Vector ht_residual(const RadialProfile& profile, double t);

/// -Delta u + c(n) R u - u^{n/(n-2)}.
[[nodiscard]] Vector g0_semilinear_residual(const RadialProfile& profile);

/// (c(n) n (n-1))^{(n-2)/2}, the constant solution of the semilinear equation.
[[nodiscard]] double g0_constant_solution(int n);

/// (t + (1 - t) n)^{(n-2)/2}, the constant solution of f_t = u^{-2/(n-2)} on
/// the round sphere with the base normalization f(1/2, ..., 1/2) = 1.
[[nodiscard]] double gt_constant_solution(int n, double t);

// ---------------------------------------------------------------------------
// Newton

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

enum class JacobianKind { Analytic, FiniteDifference };

struct NewtonOptions {
    /// Used by the problem-level entry points; newton_solve itself falls back
    /// to finite differences when no Jacobian is supplied.
    JacobianKind jacobian = JacobianKind::Analytic;
    double tol = 1e-10;
    int max_iterations = 50;
    /// Forward-difference step is fd_step * (1 + |u_j|).
    double fd_step = 1e-7;
    double min_damping = 1.0 / 1024.0;
    int jobs = 1;
};

struct NewtonResult {
    Vector u;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Forward-difference Jacobian, columns computed on up to `jobs` threads.
[[nodiscard]] Matrix fd_jacobian(const ResidualFn& residual, const Vector& u, const Vector& r0, double step, int jobs);

/// Damped Newton with backtracking. A trial step is rejected when the residual
/// throws DomainError (cone exit, u <= 0) or fails to decrease. Exceptions from
/// the residual at the initial guess propagate. Without `jacobian` the
/// forward-difference Jacobian is used.
[[nodiscard]] NewtonResult newton_solve(const ResidualFn& residual, Vector u0, const NewtonOptions& opt = {},
                                        const JacobianFn& jacobian = {});

// ---------------------------------------------------------------------------
// Continuation

enum class Family {
    Curvature,  // f_t(lambda(A_{g_u})) = psi u^{-s}; t = 1 is F_s, s = 2/(n-2) is G_t
    Semilinear  // H_t
};

struct Problem {
    Family family = Family::Curvature;
    cones::CurvatureFunction f = cones::CurvatureFunction::sigma_k_root(3, 2);
    AngularField psi;
};

[[nodiscard]] Vector problem_residual(const Problem& p, const RadialProfile& profile, double s, double t);

/// Gradient of f (deformed or not) at lambda inside its cone.
[[nodiscard]] Vector curvature_gradient(const cones::CurvatureFunction& f, std::span<const double> lambda);

/// Exact Jacobian of problem_residual by the chain rule through the radial
/// eigenvalues. Throws ConeExitError where the residual would.
[[nodiscard]] Matrix problem_jacobian(const Problem& p, const RadialProfile& profile, double s, double t);

/// Newton at fixed (s, t) from `start`, with the Jacobian kind in `opt`.
[[nodiscard]] NewtonResult solve(const Problem& p, const RadialProfile& start, double s, double t,
                                 const NewtonOptions& opt = {});

struct MarginRecord {
    double min_cone_margin = 0.0;
    double min_ricci_margin = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double max_abs_log_u = 0.0;
    double c1_log_u = 0.0;
    double c2_log_u = 0.0;
};

struct ContinuationState {
    double s = 0.0;
    double t = 1.0;
    double alpha = 0.0;
    RadialProfile profile;
    double residual = 0.0;
    int newton_iterations = 0;
    MarginRecord margins;
};

/// Residual (infinity outside the cone) and margins of a profile. Never throws
/// on cone exit.
[[nodiscard]] ContinuationState evaluate_state(const Problem& p, const RadialProfile& profile, double s, double t);

enum class Parameter { S, T };

struct PathSegment {
    Parameter parameter = Parameter::S;
    double target = 0.0;
    int steps = 20;
};

/// s: 2/(n-2) -> 0 at t = 1 (the F_s leg).
[[nodiscard]] std::vector<PathSegment> s_schedule(int steps = 20);
/// t: 1 -> 0 at s = 2/(n-2) (the G_t leg). Both legs start from the common
/// point s = 2/(n-2), t = 1; at s = 0 the round sphere is degenerate.
[[nodiscard]] std::vector<PathSegment> t_schedule(int steps = 20);

class ContinuationFailure : public NumericalError {
public:
    ContinuationFailure(const std::string& what, ContinuationState last)
        : NumericalError(what), last_(std::move(last)) {}
    [[nodiscard]] const ContinuationState& last_good() const noexcept { return last_; }

private:
    ContinuationState last_;
};

struct ContinuationOptions {
    NewtonOptions newton;
    double min_step = 1e-6;
};

/// Walks the schedule from `start`, whose residual must already be <= tol
/// (std::invalid_argument otherwise). Each step is corrected by Newton; on
/// cone exit, divergence or a nonpositive cone margin the step is halved.
/// Returns every accepted state, the start included. Throws
/// ContinuationFailure when the step falls below min_step. Throws
/// std::invalid_argument if a segment leaves s in [0, 4/(n-2)) or t in [0, 1].
[[nodiscard]] std::vector<ContinuationState> newton_continuation(const Problem& p, const ContinuationState& start,
                                                                 std::span<const PathSegment> path,
                                                                 const ContinuationOptions& opt = {});

/// step,s,t,residual,min_u,max_u,cone_margin
void write_transcript_csv(std::ostream& os, std::span<const ContinuationState> states);

/// One "theta u" line per node.
void write_profile(std::ostream& os, const RadialProfile& profile);

// ---------------------------------------------------------------------------
// Degree checkpoints and a priori margins

struct H0Spectrum {
    /// Lowest m eigenvalues by real part, ascending.
    std::vector<double> eigenvalues;
    /// Largest imaginary part among them (zero up to round-off).
    double max_imaginary = 0.0;
    /// Eigenvector of the lowest eigenvalue and its relative spread
    /// (max - min) / max |phi|.
    Vector ground_state;
    double ground_state_spread = 0.0;
    int nonpositive_count = 0;
};

/// Spectrum of phi -> -Delta phi - (2 / Vol) int phi dv on radial functions.
[[nodiscard]] H0Spectrum linearized_H0_spectrum(const GridPtr& grid, int m);

struct MarginReport {
    double max_abs_log_u = 0.0;
    double c1_log_u = 0.0;
    double c2_log_u = 0.0;
    double min_cone_margin = 0.0;
    double min_ricci_margin = 0.0;
    /// min and max of s^{1/(p_t - 1)} u along semilinear states with t > 0;
    /// NaN when there are none.
    double band_low = 0.0;
    double band_high = 0.0;
    bool blowup_warning = false;
    std::vector<std::string> warnings;
};

/// Aggregates margins over the states. A cone or Ricci margin below `floor`
/// raises a blow-up warning. For curvature problems the Ricci margin is only
/// meaningful when mu+ of the cone is at most 1; it is reported either way.
[[nodiscard]] MarginReport apriori_margins(std::span<const ContinuationState> states, Family family,
                                           double floor = 1e-3);
[[nodiscard]] MarginReport apriori_margins(const ContinuationState& state, Family family, double floor = 1e-3);

}  // namespace sigmak::solver
