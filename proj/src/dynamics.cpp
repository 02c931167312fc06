#include "syncforge/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace syncforge {

std::vector<double> OscillatorModel::evaluate(std::span<const double> x) const {
    if (x.size() != dim) {
        throw std::invalid_argument("OscillatorModel::evaluate: dimension mismatch");
    }
    std::vector<double> dx(dim);
    field(x, dx);
    return dx;
}

DenseMatrix OscillatorModel::jacobian_at(std::span<const double> x) const {
    if (x.size() != dim) {
        throw std::invalid_argument("OscillatorModel::jacobian_at: dimension mismatch");
    }
    DenseMatrix j(dim, dim);
    jacobian(x, j.data());
    return j;
}

OscillatorModel van_der_pol() {
    OscillatorModel m;
    m.name = "van_der_pol";
    m.dim = 2;
    m.field = [](std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0] + y[1] * (1.0 - y[0] * y[0]);
    };
    m.jacobian = [](std::span<const double> y, std::span<double> j) {
        j[0] = 0.0;
        j[1] = 1.0;
        j[2] = -1.0 - 2.0 * y[0] * y[1];
        j[3] = 1.0 - y[0] * y[0];
    };
    m.coupling = DenseMatrix{{0.0, 0.0}, {1.0, 0.0}};
    m.default_state = {0.1, 0.0};
    m.default_warmup = 100.0;
    return m;
}

OscillatorModel rossler() {
    OscillatorModel m;
    m.name = "rossler";
    m.dim = 3;
    m.field = [](std::span<const double> y, std::span<double> dy) {
        dy[0] = -y[1] - y[2];
        dy[1] = y[0] + 0.2 * y[1];
        dy[2] = 0.2 + (y[0] - 9.0) * y[2];
    };
    m.jacobian = [](std::span<const double> y, std::span<double> j) {
        j[0] = 0.0;
        j[1] = -1.0;
        j[2] = -1.0;
        j[3] = 1.0;
        j[4] = 0.2;
        j[5] = 0.0;
        j[6] = y[2];
        j[7] = 0.0;
        j[8] = y[0] - 9.0;
    };
    m.coupling = DenseMatrix{{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    m.default_state = {1.0, 1.0, 1.0};
    m.default_warmup = 500.0;
    return m;
}

OscillatorModel make_model(std::string_view name) {
    if (name == "van_der_pol" || name == "vdp") {
        return van_der_pol();
    }
    if (name == "rossler") {
        return rossler();
    }
    throw std::invalid_argument("unknown oscillator model '" + std::string(name) + "'");
}

bool state_is_sane(std::span<const double> x) noexcept {
    for (double v : x) {
        // Negated comparison also catches NaN.
        if (!(std::abs(v) <= kBlowupThreshold)) {
            return false;
        }
    }
    return true;
}

std::vector<TrajectorySample> rk4_integrate(const VectorField& rhs, std::span<const double> x0, double h,
                                            std::size_t steps, std::size_t stride) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("rk4_integrate: step size must be positive");
    }
    if (steps < 1 || stride < 1) {
        throw std::invalid_argument("rk4_integrate: steps and stride must be >= 1");
    }
    std::vector<double> x(x0.begin(), x0.end());
    Rk4Stepper stepper(x.size());
    std::vector<TrajectorySample> out;
    out.push_back({0.0, x});
    for (std::size_t s = 1; s <= steps; ++s) {
        stepper.step(rhs, x, h);
        const double t = static_cast<double>(s) * h;
        if (!state_is_sane(x)) {
            throw IntegrationError(s, t, "rk4_integrate: state diverged at step " + std::to_string(s));
        }
        if (s % stride == 0 || s == steps) {
            out.push_back({t, x});
        }
    }
    return out;
}

NetworkSystem::NetworkSystem(OscillatorModel model, TridiagonalMatrix laplacian)
    : model_(std::move(model)), laplacian_(std::move(laplacian)) {
    if (model_.coupling.rows() != model_.dim || model_.coupling.cols() != model_.dim) {
        throw std::invalid_argument("NetworkSystem: coupling matrix must be dim x dim");
    }
    const double tol = 1e-10 * std::max(1.0, laplacian_.norm_inf());
    for (double r : laplacian_.row_sums()) {
        if (std::abs(r) > tol) {
            throw std::invalid_argument("NetworkSystem: Laplacian rows must sum to zero");
        }
    }
    for (std::size_t r = 0; r < model_.dim; ++r) {
        for (std::size_t c = 0; c < model_.dim; ++c) {
            if (model_.coupling(r, c) != 0.0) {
                coupling_.push_back({r, c, model_.coupling(r, c)});
            }
        }
    }
}

void NetworkSystem::rhs(std::span<const double> x, std::span<double> dx) const {
    const std::size_t n = model_.dim;
    const std::size_t agents = laplacian_.order();
    if (x.size() != n * agents || dx.size() != n * agents) {
        throw std::invalid_argument("NetworkSystem::rhs: dimension mismatch");
    }
    const auto a = laplacian_.diag();
    const auto b = laplacian_.super();
    const auto c = laplacian_.sub();
    for (std::size_t i = 0; i < agents; ++i) {
        const auto xi = x.subspan(i * n, n);
        auto dxi = dx.subspan(i * n, n);
        model_.field(xi, dxi);
        for (const auto& e : coupling_) {
            // (L x)_i restricted to component e.col.
            double mix = a[i] * xi[e.col];
            if (i > 0) {
                mix += c[i - 1] * x[(i - 1) * n + e.col];
            }
            if (i + 1 < agents) {
                mix += b[i] * x[(i + 1) * n + e.col];
            }
            dxi[e.row] -= e.value * mix;
        }
    }
}

std::vector<double> network_rhs(const NetworkSystem& sys, std::span<const double> x) {
    std::vector<double> dx(sys.dimension());
    sys.rhs(x, dx);
    return dx;
}

double sync_error(std::span<const double> x, std::size_t dim, bool all_pairs) {
    if (dim == 0 || x.size() % dim != 0) {
        throw std::invalid_argument("sync_error: state length is not a multiple of dim");
    }
    const std::size_t agents = x.size() / dim;
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double d = x[i * dim + k] - x[j * dim + k];
            s += d * d;
        }
        return std::sqrt(s);
    };
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < agents; ++i) {
        if (all_pairs) {
            for (std::size_t j = i + 1; j < agents; ++j) {
                worst = std::max(worst, dist(i, j));
            }
        } else {
            worst = std::max(worst, dist(i, i + 1));
        }
    }
    return worst;
}

SyncSeries simulate_network(const NetworkSystem& sys, std::span<const double> x0, const SimulationOptions& opts) {
    if (x0.size() != sys.dimension()) {
        throw std::invalid_argument("simulate_network: initial state has wrong dimension");
    }
    if (!(opts.h > 0.0) || !(opts.t_end >= 0.0) || opts.sample_stride < 1) {
        throw std::invalid_argument("simulate_network: need h > 0, t_end >= 0, stride >= 1");
    }
    const auto steps = static_cast<std::size_t>(std::llround(opts.t_end / opts.h));
    const std::size_t dim = sys.model().dim;

    SyncSeries out;
    std::vector<double> x(x0.begin(), x0.end());
    auto record = [&](double t) {
        out.times.push_back(t);
        out.sync_error.push_back(sync_error(x, dim, opts.all_pairs));
        if (opts.record_states) {
            out.states.push_back(x);
        }
    };
    record(0.0);

    Rk4Stepper stepper(x.size());
    auto rhs = [&sys](std::span<const double> y, std::span<double> dy) { sys.rhs(y, dy); };
    for (std::size_t s = 1; s <= steps; ++s) {
        stepper.step(rhs, x, opts.h);
        const double t = static_cast<double>(s) * opts.h;
        if (!state_is_sane(x)) {
            out.blew_up = true;
            out.failure_time = t;
            out.failure = "state diverged at step " + std::to_string(s);
            break;
        }
        if (s % opts.sample_stride == 0 || s == steps) {
            record(t);
        }
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

double NormalStream::uniform() {
    const std::uint64_t z = splitmix64(seed_ ^ splitmix64(counter_++));
    // (0, 1]: never zero, so the logarithm below is finite.
    return static_cast<double>((z >> 11) + 1) * 0x1.0p-53;
}

double NormalStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::vector<double> perturbed_sync_ic(std::span<const double> point, std::size_t agents, double variance,
                                      std::uint64_t seed) {
    if (!(variance >= 0.0)) {
        throw std::invalid_argument("perturbed_sync_ic: variance must be >= 0");
    }
    if (agents < 1 || point.empty()) {
        throw std::invalid_argument("perturbed_sync_ic: need at least one agent and a nonempty state");
    }
    const double sd = std::sqrt(variance);
    NormalStream noise(seed);
    std::vector<double> x;
    x.reserve(agents * point.size());
    for (std::size_t i = 0; i < agents; ++i) {
        for (double p : point) {
            x.push_back(sd == 0.0 ? p : p + sd * noise.next());
        }
    }
    return x;
}

std::vector<double> attractor_warmup(const OscillatorModel& model, std::span<const double> x0, double t_transient,
                                     double h) {
    if (x0.size() != model.dim) {
        throw std::invalid_argument("attractor_warmup: state has wrong dimension");
    }
    if (!(t_transient >= 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("attractor_warmup: need t_transient >= 0 and h > 0");
    }
    std::vector<double> x(x0.begin(), x0.end());
    const auto steps = static_cast<std::size_t>(std::llround(t_transient / h));
    Rk4Stepper stepper(x.size());
    for (std::size_t s = 1; s <= steps; ++s) {
        stepper.step(model.field, x, h);
        if (!state_is_sane(x)) {
            throw IntegrationError(s, static_cast<double>(s) * h, "attractor_warmup: trajectory diverged");
        }
    }
    return x;
}

} // namespace syncforge
