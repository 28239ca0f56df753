#pragma once

// Radial barrier functions near a point and their numerical certification:
//   sub-solution   v(r) = r^{-(n-2-2 delta)} e^r            (mu+ <= 1)
//   super-solution v(r) = (eps r^{1-mu} + 1 - r^delta)^{(n-2)/(mu-1)}   (mu+ > 1)
// For a radial v on flat space the Schouten tensor of v^{4/(n-2)} |dx|^2 is
// chi1 Id - chi2 (x/r) (x/r)^T; on a curved background that holds up to a
// bounded remainder, which the sweeps measure.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sigmak/cones.hpp"
#include "sigmak/conformal.hpp"

namespace sigmak::barriers {

using conformal::Matrix;
using conformal::Vector;

// ---------------------------------------------------------------------------
// Eigenvalue continuity

struct GershgorinResult {
    /// lambda_i(M) is paired with lambda_{permutation[i]}(Mt), both ascending.
    std::vector<int> permutation;
    double total_deviation = 0.0;
    double perturbation_max = 0.0;  // max_ij |M - Mt|
    double bound = 0.0;             // n^2 * perturbation_max
    /// total_deviation / perturbation_max (0 when the matrices coincide).
    double sharp_constant = 0.0;
    bool within_bound = true;
};

/// Diagonalizes M, writes Mt in that eigenbasis and assigns the eigenvalues of
/// Mt to its diagonal entries in sorted order, as Gershgorin's theorem allows.
/// Throws std::invalid_argument on size mismatch or non-symmetric input.
[[nodiscard]] GershgorinResult gershgorin_pairing(const Matrix& m, const Matrix& mt);

// ---------------------------------------------------------------------------
// Radial profiles

/// v, v', v'' at one radius.
struct RadialJet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

struct RadialValue {
    double value = 0.0;
    double log_derivative = 0.0;  // v'/v
};

struct Chi {
    double chi1 = 0.0;
    double chi2 = 0.0;
};

/// chi1 = -2/(n-2) v'/(r v) - 2/(n-2)^2 (v'/v)^2,
/// chi2 = 2/(n-2) (v'' - v'/r)/v - 2n/(n-2)^2 (v'/v)^2.
[[nodiscard]] Chi chi_from_radial(int n, double r, const RadialJet& v);

/// Throws DomainError unless r > 0 and 0 < delta < 1/4.
[[nodiscard]] RadialValue subsolution_eval(int n, double delta, double r);
[[nodiscard]] RadialJet subsolution_jet(int n, double delta, double r);

/// With a = n - 2 - 2 delta: chi1 = 2/(n-2)^2 (a - r)(2 delta + r)/r^2 and
/// chi2 = 2/(n-2)^2 ((n-2)(2a - r) - 2(r - a)^2)/r^2, so chi2 - 2 chi1 = 2/((n-2) r).
/// Throws DomainError unless 0 < r < a.
[[nodiscard]] Chi chi_coefficients_sub(int n, double delta, double r);

/// Throws DomainError if the base eps r^{1-mu} + 1 - r^delta is not positive or
/// a parameter is out of range (1 < mu < 2, 0 < delta < 1, 0 <= eps < 1, r > 0).
[[nodiscard]] double supersolution_eval(int n, double mu, double delta, double eps, double r);
[[nodiscard]] RadialJet supersolution_jet(int n, double mu, double delta, double eps, double r);
[[nodiscard]] Chi chi_coefficients_super(int n, double mu, double delta, double eps, double r);

/// x -> v(|x|) with closed-form gradient and Hessian. Throws DomainError at x = 0.
[[nodiscard]] conformal::ConformalFactor radial_factor(int n, std::function<RadialJet(double)> profile,
                                                       std::string name);

// ---------------------------------------------------------------------------
// Sweeps

enum class Background { Flat, SphereNormal };

[[nodiscard]] std::string to_string(Background b);
/// Accepts "flat" and "sphere". Throws ConfigError otherwise.
[[nodiscard]] Background background_from_string(const std::string& s);

struct BarrierSweepConfig {
    int n = 4;
    int k = 2;
    std::vector<double> deltas;
    std::vector<double> mus;       // super-solution only
    std::vector<double> epsilons;  // super-solution only
    double r_min = 1e-4;
    double r1_start = 0.5;
    /// Smallest r1 the dyadic descent may certify.
    double r1_floor = 1e-2;
    int r_nodes = 64;
    int directions = 8;
    Background background = Background::SphereNormal;
    std::uint64_t seed = 1;
    int jobs = 1;
    /// When false the mu+ precondition is not enforced (negative controls).
    bool check_precondition = true;

    /// delta in {0.01, 0.05, 0.1, 0.2}.
    static BarrierSweepConfig sub_default(int n, int k);
    /// Three mu evenly inside (1, min(mu+, 2)), delta in {0.25, 0.5}, eps in {1e-3, 0.1, 0.9},
    /// r1_floor = 1e-3 (chi1 > 0 needs r^delta < (mu-1)/(mu-1+delta), which can sit below 1e-2).
    static BarrierSweepConfig super_default(int n, int k);
};

struct SweepSample {
    int n = 0;
    int k = 0;
    double delta = 0.0;
    double mu = 0.0;
    double eps = 0.0;
    double r = 0.0;
    int direction = 0;
    double margin = 0.0;
    /// margin / max_i |lambda_i|.
    double relative_margin = 0.0;
    /// chi2 - 2 chi1 (sub) or chi2 - (mu + 1) chi1 (super).
    double chi_gap = 0.0;
    /// Paired deviation of lambda from v^{-4/(n-2)} (chi1 - chi2, chi1, ..., chi1),
    /// divided by v^{-4/(n-2)} (1 + r |v'/v| + r^2 (v'/v)^2).
    double remainder_constant = 0.0;
    bool pass = false;
};

struct SweepLevel {
    double r1 = 0.0;
    bool pass = false;
    int failures = 0;
};

struct SweepReport {
    std::string kind;  // "sub" or "super"
    int n = 0;
    int k = 0;
    Background background = Background::SphereNormal;
    bool pass = false;
    /// Largest dyadic r1 at which every sample passed (0 if none did).
    double r1 = 0.0;
    double worst_margin = 0.0;           // sub: max margin; super: min margin
    double worst_relative_margin = 0.0;  // same, scaled by max_i |lambda_i|
    double max_remainder_constant = 0.0;
    /// Super only: for every (mu, delta) the verdicts of all eps agree at the final level.
    bool eps_uniform = true;
    std::vector<SweepLevel> levels;
    /// Samples of the certified level, or of the last level tried on failure.
    std::vector<SweepSample> samples;
    std::optional<SweepSample> first_failure;
};

/// Requires mu+(Gamma_k) <= 1; throws ConfigError otherwise or on invalid grids.
[[nodiscard]] SweepReport barrier_sweep_sub(const BarrierSweepConfig& cfg);

/// Requires mu+(Gamma_k) > 1 and every mu in (1, min(mu+, 2)); throws ConfigError otherwise.
/// r1 is searched separately for each (mu, delta) and the smallest is reported.
[[nodiscard]] SweepReport barrier_sweep_super(const BarrierSweepConfig& cfg);

/// Header "n,k,delta,mu,eps,r,margin,pass" and one row per sample.
void write_sweep_csv(std::ostream& os, const SweepReport& report);

// ---------------------------------------------------------------------------
// Conformal-Laplacian barrier G = r^{2-n} - K r^{5/2-n} - (d^{2-n} - K d^{5/2-n})

struct SupHReport {
    double K = 0.0;
    double delta = 0.0;
    double min_G = 0.0;
    double min_LG = 0.0;  // min of (Delta_g - (n-2)/(4(n-1)) R_g) G over the annulus
    /// One entry per probe w; true if G^{-1} w is nondecreasing on the radial grid.
    std::vector<std::pair<std::string, bool>> monotone;
    /// r^{n-2} for w = 1 at the innermost radius (tends to 0).
    double bounded_w_limit = 0.0;
    bool pass = false;
};

[[nodiscard]] double suph_G(int n, double K, double delta, double r);

/// Evaluates on radii log-spaced in [delta * inner_fraction, delta] along
/// `directions` unit directions. pass = G >= 0, L_g G >= 0 and every probe monotone.
[[nodiscard]] SupHReport suph_barrier_check(const conformal::MetricField& g, double K, double delta,
                                            int nodes = 64, int directions = 8, double inner_fraction = 1e-3);

}  // namespace sigmak::barriers
