#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncforge/dense.hpp"
#include "syncforge/error.hpp"
#include "syncforge/tridiag.hpp"

namespace syncforge {

using VectorField = std::function<void(std::span<const double> x, std::span<double> dx)>;
/// Writes Df(x) row-major into an n*n buffer.
using JacobianField = std::function<void(std::span<const double> x, std::span<double> jac)>;

/// Single-agent dynamics x' = f(x) together with its Jacobian and the
/// inner coupling matrix E.
struct OscillatorModel {
    std::string name;
    std::size_t dim = 0;
    VectorField field;
    JacobianField jacobian;
    DenseMatrix coupling;
    std::vector<double> default_state; // start point for warm-up
    double default_warmup = 100.0;

    std::vector<double> evaluate(std::span<const double> x) const;
    DenseMatrix jacobian_at(std::span<const double> x) const;
};

OscillatorModel van_der_pol();
OscillatorModel rossler();

/// "van_der_pol" (alias "vdp") or "rossler".
OscillatorModel make_model(std::string_view name);

/// Any |x_i| above this aborts an integration.
inline constexpr double kBlowupThreshold = 1e8;

/// Integration diverged or produced a non-finite state.
class IntegrationError : public NumericalError {
public:
    IntegrationError(std::size_t step, double time, const std::string& what)
        : NumericalError(what), step_(step), time_(time) {}
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

/// Classical fixed-step fourth-order Runge-Kutta with reusable scratch space.
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

    /// Advances x by one step of size h for the autonomous system x' = rhs(x).
    template <class Rhs>
    void step(Rhs&& rhs, std::span<double> x, double h) {
        const std::size_t n = x.size();
        rhs(std::span<const double>(x), std::span<double>(k1_));
        for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = x[i] + 0.5 * h * k1_[i];
        }
        rhs(std::span<const double>(tmp_), std::span<double>(k2_));
        for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = x[i] + 0.5 * h * k2_[i];
        }
        rhs(std::span<const double>(tmp_), std::span<double>(k3_));
        for (std::size_t i = 0; i < n; ++i) {
            tmp_[i] = x[i] + h * k3_[i];
        }
        rhs(std::span<const double>(tmp_), std::span<double>(k4_));
        const double h6 = h / 6.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += h6 * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
        }
    }

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// True if every component is finite and within kBlowupThreshold.
bool state_is_sane(std::span<const double> x) noexcept;

struct TrajectorySample {
    double time;
    std::vector<double> state;
};

/// Fixed-step RK4 from x0 for `steps` steps. Samples at t = 0, every
/// `stride` steps and at the final step. Throws IntegrationError on blow-up.
std::vector<TrajectorySample> rk4_integrate(const VectorField& rhs, std::span<const double> x0, double h,
                                            std::size_t steps, std::size_t stride);

/// Coupled network x' = F(x) - (L ⊗ E) x over N agents, with L tridiagonal.
class NetworkSystem {
public:
    /// Throws std::invalid_argument if L has a row sum above
    /// 1e-10 · max(1, ||L||_inf): the synchronous manifold must be invariant.
    NetworkSystem(OscillatorModel model, TridiagonalMatrix laplacian);

    const OscillatorModel& model() const noexcept { return model_; }
    const TridiagonalMatrix& laplacian() const noexcept { return laplacian_; }
    std::size_t agents() const noexcept { return laplacian_.order(); }
    std::size_t dimension() const noexcept { return agents() * model_.dim; }

    /// dx = F(x) - (L ⊗ E) x without forming the Kronecker product.
    void rhs(std::span<const double> x, std::span<double> dx) const;

private:
    struct CouplingEntry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    OscillatorModel model_;
    TridiagonalMatrix laplacian_;
    std::vector<CouplingEntry> coupling_; // nonzeros of E
};

/// Allocating convenience wrapper over NetworkSystem::rhs.
std::vector<double> network_rhs(const NetworkSystem& sys, std::span<const double> x);

/// max_i ||x_i - x_{i+1}||_2, or over all pairs when `all_pairs` is set.
double sync_error(std::span<const double> x, std::size_t dim, bool all_pairs = false);

struct SimulationOptions {
    double h = 1e-3;
    double t_end = 100.0;
    std::size_t sample_stride = 100;
    bool record_states = false;
    bool all_pairs = false;
};

struct SyncSeries {
    std::vector<double> times;
    std::vector<double> sync_error;
    std::vector<std::vector<double>> states; // filled when record_states
    bool blew_up = false;
    double failure_time = 0.0;
    std::string failure;
};

/// RK4 on the network. Blow-up is reported in the series, not thrown.
SyncSeries simulate_network(const NetworkSystem& sys, std::span<const double> x0, const SimulationOptions& opts);

/// `agents` copies of `point` plus i.i.d. N(0, variance) noise per
/// component, reproducible from `seed`.
std::vector<double> perturbed_sync_ic(std::span<const double> point, std::size_t agents, double variance,
                                      std::uint64_t seed);

/// Integrates the single agent for t_transient and returns the final state.
std::vector<double> attractor_warmup(const OscillatorModel& model, std::span<const double> x0, double t_transient,
                                     double h = 1e-3);

/// Counter-based normal generator: splitmix64 over (seed, index) and
/// Box-Muller. The i-th draw depends only on seed and i.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : seed_(seed) {}
    double next();
    std::uint64_t position() const noexcept { return counter_; }

private:
    double uniform();

    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace syncforge
