#include "syncforge/msf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "syncforge/synthesis.hpp"

namespace syncforge {

LyapunovSettings LyapunovSettings::defaults_for(const OscillatorModel& model) {
    LyapunovSettings s;
    if (model.name == "rossler") {
        s.warmup_time = 500.0;
        s.total_time = 20000.0;
    } else {
        s.warmup_time = 100.0;
        s.total_time = 2000.0;
    }
    s.renorm_interval = 1.0;
    s.h = 1e-3;
    return s;
}

void LyapunovSettings::validate() const {
    if (!(warmup_time >= 0.0) || !(total_time > 0.0) || !(renorm_interval > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("LyapunovSettings: times and step must be positive");
    }
    if (renorm_interval < h || total_time < renorm_interval) {
        throw std::invalid_argument("LyapunovSettings: need h <= renorm_interval <= total_time");
    }
}

std::vector<double> variational_rhs(const OscillatorModel& model, std::span<const double> x, double eta,
                                    std::span<const double> z) {
    const std::size_t n = model.dim;
    if (x.size() != n || z.size() != n) {
        throw std::invalid_argument("variational_rhs: dimension mismatch");
    }
    if (!(eta >= 0.0)) {
        throw std::invalid_argument("variational_rhs: eta must be >= 0");
    }
    std::vector<double> jac(n * n);
    model.jacobian(x, jac);
    std::vector<double> dz(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            s += (jac[r * n + c] - eta * model.coupling(r, c)) * z[c];
        }
        dz[r] = s;
    }
    return dz;
}

LyapunovEstimate largest_lyapunov(const OscillatorModel& model, double eta, const LyapunovSettings& settings) {
    if (!(eta >= 0.0)) {
        throw std::invalid_argument("largest_lyapunov: eta must be >= 0");
    }
    settings.validate();
    const std::size_t n = model.dim;
    const std::vector<double>& start = settings.initial_state.empty() ? model.default_state : settings.initial_state;
    if (start.size() != n) {
        throw std::invalid_argument("largest_lyapunov: initial state has wrong dimension");
    }

    // Shifted matrix -η E, added to Df at every evaluation.
    std::vector<double> shift(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            shift[r * n + c] = -eta * model.coupling(r, c);
        }
    }
    std::vector<double> jac(n * n);
    auto rhs = [&](std::span<const double> y, std::span<double> dy) {
        const auto x = y.first(n);
        const auto z = y.subspan(n, n);
        model.field(x, dy.first(n));
        model.jacobian(x, jac);
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                s += (jac[r * n + c] + shift[r * n + c]) * z[c];
            }
            dy[n + r] = s;
        }
    };

    std::vector<double> y(2 * n);
    std::copy(start.begin(), start.end(), y.begin());
    NormalStream noise(settings.seed);
    double znorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[n + i] = noise.next();
        znorm += y[n + i] * y[n + i];
    }
    znorm = std::sqrt(znorm);
    for (std::size_t i = 0; i < n; ++i) {
        y[n + i] /= znorm;
    }

    const double h = settings.h;
    const auto block = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(settings.renorm_interval / h)));
    const auto warm_blocks = static_cast<std::size_t>(std::llround(settings.warmup_time / h)) / block;
    const auto blocks = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(settings.total_time / h)) / block);
    const double block_time = static_cast<double>(block) * h;

    Rk4Stepper stepper(y.size());
    std::size_t step = 0;
    auto advance_block = [&]() -> double {
        for (std::size_t s = 0; s < block; ++s) {
            stepper.step(rhs, y, h);
            ++step;
        }
        if (!state_is_sane(std::span<const double>(y).first(n))) {
            throw IntegrationError(step, static_cast<double>(step) * h, "largest_lyapunov: reference orbit diverged");
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            norm += y[n + i] * y[n + i];
        }
        norm = std::sqrt(norm);
        if (!std::isfinite(norm) || norm < 1e-300) {
            throw NumericalError("largest_lyapunov: tangent vector collapsed or overflowed; reduce renorm_interval");
        }
        for (std::size_t i = 0; i < n; ++i) {
            y[n + i] /= norm;
        }
        return std::log(norm);
    };

    for (std::size_t b = 0; b < warm_blocks; ++b) {
        advance_block();
    }
    double sum = 0.0;
    double half_sum = 0.0;
    const std::size_t half = std::max<std::size_t>(1, blocks / 2);
    for (std::size_t b = 0; b < blocks; ++b) {
        sum += advance_block();
        if (b + 1 == half) {
            half_sum = sum;
        }
    }
    LyapunovEstimate est;
    est.exponent = sum / (static_cast<double>(blocks) * block_time);
    const double half_exponent = half_sum / (static_cast<double>(half) * block_time);
    est.convergence = std::abs(est.exponent - half_exponent);
    return est;
}

std::vector<double> eta_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo) || !(lo >= 0.0)) {
        throw std::invalid_argument("eta_grid: need 0 <= lo <= hi and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = lo + step * static_cast<double>(i);
    }
    return g;
}

MsfCurve msf_scan(const OscillatorModel& model, std::span<const double> etas, const LyapunovSettings& settings,
                  unsigned threads) {
    if (etas.empty()) {
        throw std::invalid_argument("msf_scan: empty grid");
    }
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (!(etas[i] >= 0.0) || (i > 0 && !(etas[i] > etas[i - 1]))) {
            throw std::invalid_argument("msf_scan: grid must be nonnegative and strictly increasing");
        }
    }
    settings.validate();

    MsfCurve curve;
    curve.etas.assign(etas.begin(), etas.end());
    curve.values.assign(etas.size(), std::numeric_limits<double>::quiet_NaN());
    curve.convergence.assign(etas.size(), std::numeric_limits<double>::quiet_NaN());
    curve.errors.assign(etas.size(), std::string());

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, etas.size()));

    // Each worker writes only to its own grid indices.
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < etas.size(); i = next++) {
            try {
                const auto est = largest_lyapunov(model, etas[i], settings);
                curve.values[i] = est.exponent;
                curve.convergence[i] = est.convergence;
            } catch (const std::exception& e) {
                curve.errors[i] = e.what();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    curve.negative_intervals = negative_intervals(curve);
    return curve;
}

std::vector<NegativeInterval> negative_intervals(std::span<const double> etas, std::span<const double> values) {
    if (etas.size() != values.size()) {
        throw std::invalid_argument("negative_intervals: grid and values differ in length");
    }
    std::vector<NegativeInterval> out;
    const std::size_t n = etas.size();
    auto crossing = [&](std::size_t i, std::size_t j) {
        // Root of the line through (etas[i], values[i]) and (etas[j], values[j]).
        return etas[i] + (etas[j] - etas[i]) * values[i] / (values[i] - values[j]);
    };
    std::size_t i = 0;
    while (i < n) {
        if (!(values[i] < 0.0)) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < n && values[i] < 0.0) {
            ++i;
        }
        NegativeInterval iv;
        iv.lo = (start > 0 && std::isfinite(values[start - 1])) ? crossing(start - 1, start) : etas[start];
        if (i < n && std::isfinite(values[i])) {
            iv.hi = crossing(i - 1, i);
        } else {
            iv.hi = etas[i - 1];
            iv.open_right = i == n;
        }
        out.push_back(iv);
    }
    return out;
}

std::vector<NegativeInterval> negative_intervals(const MsfCurve& curve) {
    return negative_intervals(curve.etas, curve.values);
}

double required_sigma(double threshold, std::size_t n) {
    if (!(threshold > 0.0) || n < 2) {
        throw std::invalid_argument("required_sigma: need threshold > 0 and N >= 2");
    }
    return threshold / diffusive_eigenvalue(1, n);
}

DiffusiveFeasibility diffusive_feasibility(double eta_lo, double eta_hi, std::size_t n) {
    if (!(eta_lo > 0.0) || !(eta_hi > eta_lo) || n < 2) {
        throw std::invalid_argument("diffusive_feasibility: need 0 < eta_lo < eta_hi and N >= 2");
    }
    const double l2 = diffusive_eigenvalue(1, n);
    const double ln = diffusive_eigenvalue(n - 1, n);
    DiffusiveFeasibility f;
    f.eigen_ratio = ln / l2;
    f.interval_ratio = eta_hi / eta_lo;
    f.feasible = f.eigen_ratio < f.interval_ratio;
    if (f.feasible) {
        f.sigma_lo = eta_lo / l2;
        f.sigma_hi = eta_hi / ln;
    }
    return f;
}

} // namespace syncforge
