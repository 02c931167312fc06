#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "syncforge/dynamics.hpp"

namespace syncforge {

/// Parameters of the Benettin estimate of the largest Lyapunov exponent.
/// Times are in model time units.
struct LyapunovSettings {
    double warmup_time = 100.0;
    double total_time = 2000.0;
    double renorm_interval = 1.0;
    double h = 1e-3;
    std::uint64_t seed = 1;               // initial tangent direction
    std::vector<double> initial_state;    // empty: model default

    /// van der Pol: warm-up 100, total 2000. Rössler: warm-up 500, total 20000.
    static LyapunovSettings defaults_for(const OscillatorModel& model);

    void validate() const;
};

struct LyapunovEstimate {
    double exponent = 0.0;
    /// |full-run estimate - first-half estimate|
    double convergence = 0.0;
};

/// (Df(x) - η E) z
std::vector<double> variational_rhs(const OscillatorModel& model, std::span<const double> x, double eta,
                                    std::span<const double> z);

/// Largest Lyapunov (Floquet) exponent of z' = (Df(x(t)) - η E) z along
/// the single-agent orbit. The tangent vector is aligned during warm-up and
/// renormalized every renorm_interval afterwards.
/// Throws IntegrationError if the orbit diverges and NumericalError if the
/// tangent vector collapses below 1e-300 between renormalizations.
LyapunovEstimate largest_lyapunov(const OscillatorModel& model, double eta, const LyapunovSettings& settings);

struct NegativeInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool open_right = false; // still negative at the end of the grid
};

struct MsfCurve {
    std::vector<double> etas;
    std::vector<double> values;      // NaN where the point failed
    std::vector<double> convergence;
    std::vector<std::string> errors; // empty string on success
    std::vector<NegativeInterval> negative_intervals;
};

/// lo, lo + step, ... up to hi (inclusive within rounding).
std::vector<double> eta_grid(double lo, double hi, double step);

/// Evaluates the MSF on every grid point, in parallel over `threads`
/// workers (0 picks the hardware concurrency). Failed points are recorded,
/// not fatal.
MsfCurve msf_scan(const OscillatorModel& model, std::span<const double> etas, const LyapunovSettings& settings,
                  unsigned threads = 0);

/// Maximal runs of negative values, with endpoints refined by linear
/// interpolation between the bracketing grid points.
std::vector<NegativeInterval> negative_intervals(std::span<const double> etas, std::span<const double> values);
std::vector<NegativeInterval> negative_intervals(const MsfCurve& curve);

/// Smallest diffusive coupling strength with σ λ_2 above `threshold`.
double required_sigma(double threshold, std::size_t n);

struct DiffusiveFeasibility {
    bool feasible = false;
    double eigen_ratio = 0.0;    // λ_N / λ_2
    double interval_ratio = 0.0; // η_2 / η_1
    double sigma_lo = 0.0;       // open range (η_1/λ_2, η_2/λ_N) when feasible
    double sigma_hi = 0.0;
};

/// Whether some σ places the whole nonzero diffusive spectrum σλ_k in [η_1, η_2].
DiffusiveFeasibility diffusive_feasibility(double eta_lo, double eta_hi, std::size_t n);

} // namespace syncforge
