#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "syncforge/dynamics.hpp"
#include "syncforge/synthesis.hpp"
#include "test_support.hpp"

using namespace syncforge;
using testing::max_abs_diff;

namespace {

DenseMatrix finite_difference_jacobian(const OscillatorModel& m, std::span<const double> x) {
    const std::size_t n = m.dim;
    double norm = 0.0;
    for (double v : x) {
        norm += v * v;
    }
    const double step = 1e-6 * (1.0 + std::sqrt(norm));
    DenseMatrix j(n, n);
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    for (std::size_t c = 0; c < n; ++c) {
        xp[c] = x[c] + step;
        xm[c] = x[c] - step;
        const auto fp = m.evaluate(xp);
        const auto fm = m.evaluate(xm);
        for (std::size_t r = 0; r < n; ++r) {
            j(r, c) = (fp[r] - fm[r]) / (2.0 * step);
        }
        xp[c] = xm[c] = x[c];
    }
    return j;
}

/// Random tridiagonal matrix with zero row sums (arbitrary signs).
TridiagonalMatrix random_zero_row_sum(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> sub(n - 1), super(n - 1), diag(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sub[i] = testing::uniform(rng, -3.0, 1.0);
        super[i] = testing::uniform(rng, -3.0, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            diag[i] -= sub[i - 1];
        }
        if (i + 1 < n) {
            diag[i] -= super[i];
        }
    }
    return TridiagonalMatrix(std::move(diag), std::move(sub), std::move(super));
}

std::vector<double> random_state(std::mt19937_64& rng, std::size_t len, double amp) {
    std::vector<double> x(len);
    for (auto& v : x) {
        v = testing::uniform(rng, -amp, amp);
    }
    return x;
}

OscillatorModel quadratic_growth() {
    OscillatorModel m;
    m.name = "quadratic";
    m.dim = 1;
    m.field = [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
    m.jacobian = [](std::span<const double> x, std::span<double> j) { j[0] = 2.0 * x[0]; };
    m.coupling = DenseMatrix{{1.0}};
    m.default_state = {1.0};
    return m;
}

} // namespace

TEST_CASE("model definitions") {
    const auto vdp = van_der_pol();
    CHECK(vdp.dim == 2);
    const std::vector<double> p{2.0, 0.0};
    CHECK(vdp.evaluate(p) == std::vector<double>{0.0, -2.0});
    const std::vector<double> origin2{0.0, 0.0};
    CHECK(vdp.jacobian_at(origin2) == DenseMatrix{{0, 1}, {-1, 1}});
    CHECK(vdp.coupling == DenseMatrix{{0, 0}, {1, 0}});

    const auto ros = rossler();
    CHECK(ros.dim == 3);
    const std::vector<double> origin3{0.0, 0.0, 0.0};
    CHECK(ros.evaluate(origin3) == std::vector<double>{0.0, 0.0, 0.2});
    CHECK(ros.coupling == DenseMatrix{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}});

    CHECK(make_model("vdp").name == "van_der_pol");
    CHECK(make_model("rossler").name == "rossler");
    CHECK_THROWS_AS(make_model("lorenz"), std::invalid_argument);
}

TEST_CASE("jacobians match central differences") {
    std::mt19937_64 rng(41);
    for (const auto& m : {van_der_pol(), rossler()}) {
        for (int rep = 0; rep < 100; ++rep) {
            const auto x = random_state(rng, m.dim, 10.0);
            const auto diff = m.jacobian_at(x) - finite_difference_jacobian(m, x);
            CHECK(diff.norm_inf() <= 1e-5);
        }
    }
}

TEST_CASE("rk4 integration") {
    const VectorField decay = [](std::span<const double> x, std::span<double> dx) { dx[0] = -x[0]; };
    SUBCASE("one step of x' = -x") {
        const std::vector<double> x0{1.0};
        const auto traj = rk4_integrate(decay, x0, 0.1, 1, 1);
        REQUIRE(traj.size() == 2);
        const double h = 0.1;
        const double poly = 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
        CHECK(std::abs(traj[1].state[0] - poly) < 1e-15);
        CHECK(std::abs(traj[1].state[0] - 0.9048375) < 1e-7);
    }
    SUBCASE("zero field is constant") {
        const VectorField zero = [](std::span<const double>, std::span<double> dx) {
            std::fill(dx.begin(), dx.end(), 0.0);
        };
        const std::vector<double> x0{1.5, -2.0};
        for (const auto& s : rk4_integrate(zero, x0, 0.01, 100, 7)) {
            CHECK(s.state == x0);
        }
    }
    SUBCASE("sampling stride") {
        const std::vector<double> x0{1.0};
        const auto traj = rk4_integrate(decay, x0, 0.1, 10, 4);
        REQUIRE(traj.size() == 4);
        CHECK(traj[0].time == 0.0);
        CHECK(std::abs(traj[1].time - 0.4) < 1e-15);
        CHECK(std::abs(traj[2].time - 0.8) < 1e-15);
        CHECK(std::abs(traj[3].time - 1.0) < 1e-15);
    }
    SUBCASE("fourth-order convergence") {
        const std::vector<double> x0{1.0};
        const auto err = [&](double h, std::size_t steps) {
            return std::abs(rk4_integrate(decay, x0, h, steps, steps).back().state[0] - std::exp(-1.0));
        };
        const double ratio = err(0.1, 10) / err(0.05, 20);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
    }
    SUBCASE("van der Pol stays on a bounded orbit") {
        const auto vdp = van_der_pol();
        const std::vector<double> x0{2.0, 0.0};
        for (const auto& s : rk4_integrate(vdp.field, x0, 1e-3, 10000, 100)) {
            CHECK(testing::max_abs(s.state) < 5.0);
        }
    }
    SUBCASE("blow-up aborts with the step index") {
        const VectorField grow = [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
        const std::vector<double> x0{1.0};
        try {
            rk4_integrate(grow, x0, 1e-3, 2000, 10);
            FAIL("expected IntegrationError");
        } catch (const IntegrationError& e) {
            CHECK(e.step() > 900);
            CHECK(e.step() <= 1002);
            CHECK(e.time() == doctest::Approx(e.step() * 1e-3));
        }
    }
    const std::vector<double> x0{1.0};
    CHECK_THROWS_AS(rk4_integrate(decay, x0, 0.0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(rk4_integrate(decay, x0, 0.1, 0, 1), std::invalid_argument);
}

TEST_CASE("state_is_sane") {
    const std::vector<double> ok{1.0, -1e7};
    const std::vector<double> big{1.0, 2e8};
    const std::vector<double> nan{NAN};
    CHECK(state_is_sane(ok));
    CHECK_FALSE(state_is_sane(big));
    CHECK_FALSE(state_is_sane(nan));
}

TEST_CASE("network right-hand side") {
    SUBCASE("synchronous states feel no coupling") {
        std::mt19937_64 rng(43);
        for (const auto& m : {van_der_pol(), rossler()}) {
            for (int rep = 0; rep < 20; ++rep) {
                const std::size_t n = 2 + rep % 12;
                const NetworkSystem sys(m, synthesize(SpectrumSpec(testing::random_laplacian_spectrum(rng, n, 10.0)))
                                               .laplacian.matrix());
                const auto z = random_state(rng, m.dim, 3.0);
                std::vector<double> x;
                for (std::size_t i = 0; i < n; ++i) {
                    x.insert(x.end(), z.begin(), z.end());
                }
                const auto dx = network_rhs(sys, x);
                const auto fz = m.evaluate(z);
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t k = 0; k < m.dim; ++k) {
                        CHECK(std::abs(dx[i * m.dim + k] - fz[k]) <= 1e-13 * testing::max_abs(x));
                    }
                }
            }
        }
    }
    SUBCASE("two van der Pol agents against the dense Kronecker product") {
        const auto m = van_der_pol();
        const auto l = TridiagonalMatrix::symmetric({1, 1}, {-1});
        const NetworkSystem sys(m, l);
        const std::vector<double> x{0.3, -1.2, 2.0, 0.7};
        const auto dx = network_rhs(sys, x);
        const auto coupling = kronecker(l.to_dense(), m.coupling).multiply(x);
        for (std::size_t i = 0; i < 2; ++i) {
            const auto f = m.evaluate(std::span<const double>(x).subspan(2 * i, 2));
            CHECK(std::abs(dx[2 * i] - (f[0] - coupling[2 * i])) < 1e-15);
            CHECK(std::abs(dx[2 * i + 1] - (f[1] - coupling[2 * i + 1])) < 1e-15);
        }
        // x_1' = f(x_1) - E (x_1 - x_2): E picks the first component into the second slot.
        CHECK(std::abs(dx[1] - (m.evaluate(std::vector<double>{0.3, -1.2})[1] - (0.3 - 2.0))) < 1e-15);
    }
    SUBCASE("structured product equals the dense oracle") {
        std::mt19937_64 rng(47);
        for (int rep = 0; rep < 50; ++rep) {
            const auto m = rep % 2 ? rossler() : van_der_pol();
            const std::size_t n = 1 + rep % 8;
            const auto l = n == 1 ? TridiagonalMatrix({0.0}, {}, {}) : random_zero_row_sum(rng, n);
            const NetworkSystem sys(m, l);
            const auto x = random_state(rng, n * m.dim, 3.0);
            const auto dx = network_rhs(sys, x);
            const auto coupling = kronecker(l.to_dense(), m.coupling).multiply(x);
            for (std::size_t i = 0; i < n; ++i) {
                const auto f = m.evaluate(std::span<const double>(x).subspan(i * m.dim, m.dim));
                for (std::size_t k = 0; k < m.dim; ++k) {
                    CHECK(std::abs(dx[i * m.dim + k] - (f[k] - coupling[i * m.dim + k])) <= 1e-13);
                }
            }
        }
    }
    SUBCASE("pairwise form sum_j a_ij E (x_j - x_i)") {
        std::mt19937_64 rng(53);
        for (int rep = 0; rep < 20; ++rep) {
            const auto m = rossler();
            const std::size_t n = 2 + rep % 7;
            const auto l = random_zero_row_sum(rng, n);
            const NetworkSystem sys(m, l);
            const auto x = random_state(rng, n * m.dim, 3.0);
            const auto dx = network_rhs(sys, x);
            for (std::size_t i = 0; i < n; ++i) {
                const auto f = m.evaluate(std::span<const double>(x).subspan(i * m.dim, m.dim));
                std::vector<double> pair(m.dim, 0.0);
                for (std::size_t j = 0; j < n; ++j) {
                    if (j == i) {
                        continue;
                    }
                    const double aij = -l(i, j);
                    for (std::size_t r = 0; r < m.dim; ++r) {
                        for (std::size_t c = 0; c < m.dim; ++c) {
                            pair[r] += aij * m.coupling(r, c) * (x[j * m.dim + c] - x[i * m.dim + c]);
                        }
                    }
                }
                for (std::size_t k = 0; k < m.dim; ++k) {
                    CHECK(std::abs(dx[i * m.dim + k] - f[k] - pair[k]) <= 1e-12);
                }
            }
        }
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(NetworkSystem(van_der_pol(), TridiagonalMatrix::symmetric({1, 2}, {-1})),
                        std::invalid_argument);
        const NetworkSystem sys(van_der_pol(), TridiagonalMatrix::symmetric({1, 1}, {-1}));
        CHECK(sys.dimension() == 4);
        CHECK_THROWS_AS(network_rhs(sys, std::vector<double>(3)), std::invalid_argument);
    }
}

TEST_CASE("sync_error") {
    const std::vector<double> x{0, 0, 3, 4, 3, 4};
    CHECK(sync_error(x, 2) == 5.0);
    const std::vector<double> y{0, 0, 3, 4, 6, 8};
    CHECK(sync_error(y, 2) == 5.0);
    CHECK(sync_error(y, 2, true) == 10.0);
    CHECK_THROWS_AS(sync_error(std::vector<double>(5), 2), std::invalid_argument);
}

TEST_CASE("simulate_network") {
    const auto m = van_der_pol();
    const auto l = synthesize(place_eigenvalues(Placement::linear, 1.0, 10.0, 7)).laplacian.matrix();
    const NetworkSystem sys(m, l);
    const auto point = attractor_warmup(m, m.default_state, 20.0);
    SimulationOptions opts;
    opts.t_end = 5.0;
    opts.sample_stride = 50;

    SUBCASE("synchronous start stays synchronous") {
        const auto x0 = perturbed_sync_ic(point, 8, 0.0, 1);
        const auto s = simulate_network(sys, x0, opts);
        for (double e : s.sync_error) {
            CHECK(e <= 1e-14);
        }
        CHECK_FALSE(s.blew_up);
    }
    SUBCASE("samples, states and determinism") {
        opts.record_states = true;
        const auto x0 = perturbed_sync_ic(point, 8, 1.0, 9);
        const auto a = simulate_network(sys, x0, opts);
        const auto b = simulate_network(sys, x0, opts);
        CHECK(a.sync_error == b.sync_error);
        CHECK(a.times.size() == 101);
        CHECK(a.states.size() == a.times.size());
        CHECK(a.states.front() == x0);
        for (std::size_t i = 1; i < a.times.size(); ++i) {
            CHECK(a.times[i] > a.times[i - 1]);
        }
        for (double e : a.sync_error) {
            CHECK(e >= 0.0);
        }
        CHECK(a.sync_error.front() == sync_error(x0, 2));
    }
    SUBCASE("blow-up is recorded, not thrown") {
        const NetworkSystem bad(quadratic_growth(), TridiagonalMatrix::symmetric({1, 1}, {-1}));
        const std::vector<double> x0{1.0, 1.0};
        opts.t_end = 2.0;
        const auto s = simulate_network(bad, x0, opts);
        CHECK(s.blew_up);
        CHECK(s.failure_time > 0.9);
        CHECK(s.failure_time < 1.01);
        CHECK_FALSE(s.failure.empty());
    }
    CHECK_THROWS_AS(simulate_network(sys, std::vector<double>(3), opts), std::invalid_argument);
}

TEST_CASE("diffusive Rossler ring of 8 outside the feasible range does not synchronize") {
    const auto m = rossler();
    const NetworkSystem sys(m, diffusive_laplacian(1.0, 8).laplacian.matrix());
    const auto point = attractor_warmup(m, m.default_state, 500.0);
    const auto x0 = perturbed_sync_ic(point, 8, 1.0, 3);
    SimulationOptions opts;
    opts.t_end = 500.0;
    const auto s = simulate_network(sys, x0, opts);
    REQUIRE_FALSE(s.blew_up);
    double late_min = INFINITY;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (s.times[i] >= 250.0) {
            late_min = std::min(late_min, s.sync_error[i]);
        }
    }
    CHECK(late_min > 1e-3);
}

TEST_CASE("perturbed_sync_ic") {
    const std::vector<double> p{1.0, -2.0, 0.5};
    const auto exact = perturbed_sync_ic(p, 4, 0.0, 5);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(exact[3 * i] == 1.0);
        CHECK(exact[3 * i + 1] == -2.0);
        CHECK(exact[3 * i + 2] == 0.5);
    }
    CHECK(perturbed_sync_ic(p, 64, 1.0, 5) == perturbed_sync_ic(p, 64, 1.0, 5));
    CHECK(perturbed_sync_ic(p, 64, 1.0, 5) != perturbed_sync_ic(p, 64, 1.0, 6));

    const std::size_t agents = 3334;
    const auto x = perturbed_sync_ic(p, agents, 1.0, 12345);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - p[i % 3];
        mean += d;
        var += d * d;
    }
    mean /= static_cast<double>(x.size());
    var = var / static_cast<double>(x.size()) - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(var >= 0.8);
    CHECK(var <= 1.2);

    const auto scaled = perturbed_sync_ic(p, agents, 4.0, 12345);
    CHECK(std::abs((scaled[7] - p[1]) - 2.0 * (x[7] - p[1])) < 1e-12);
    CHECK_THROWS_AS(perturbed_sync_ic(p, 4, -1.0, 1), std::invalid_argument);
}

TEST_CASE("NormalStream is counter based") {
    NormalStream a(77), b(77);
    std::vector<double> xs;
    for (int i = 0; i < 1000; ++i) {
        xs.push_back(a.next());
        CHECK(xs.back() == b.next());
        CHECK(std::isfinite(xs.back()));
    }
    NormalStream c(78);
    CHECK(c.next() != xs.front());
}

TEST_CASE("attractor_warmup") {
    SUBCASE("van der Pol lands on the limit cycle") {
        const auto m = van_der_pol();
        const auto p = attractor_warmup(m, std::vector<double>{0.1, 0.0}, 100.0);
        const double r = std::hypot(p[0], p[1]);
        CHECK(r >= 1.5);
        CHECK(r <= 2.5);

        // Return to the section through p normal to f(p) after one period.
        const auto f = m.evaluate(p);
        const auto side = [&](std::span<const double> x) { return (x[0] - p[0]) * f[0] + (x[1] - p[1]) * f[1]; };
        std::vector<double> x = p, prev = p;
        Rk4Stepper stepper(2);
        double closest = INFINITY;
        for (int s = 1; s < 20000; ++s) {
            prev = x;
            stepper.step(m.field, x, 1e-3);
            if (s > 1000 && side(prev) < 0.0 && side(x) >= 0.0) {
                const double w = side(prev) / (side(prev) - side(x));
                const double cx = prev[0] + w * (x[0] - prev[0]);
                const double cy = prev[1] + w * (x[1] - prev[1]);
                closest = std::hypot(cx - p[0], cy - p[1]);
                break;
            }
        }
        CHECK(closest < 1e-4);
    }
    SUBCASE("Rossler stays bounded") {
        const auto m = rossler();
        const auto p = attractor_warmup(m, std::vector<double>{1.0, 1.0, 1.0}, 500.0);
        CHECK(std::abs(p[0]) < 25.0);
        CHECK(testing::max_abs(p) < 50.0);
    }
    SUBCASE("zero transient returns the start") {
        const std::vector<double> x0{0.3, 0.4};
        CHECK(attractor_warmup(van_der_pol(), x0, 0.0) == x0);
    }
    CHECK_THROWS_AS(attractor_warmup(van_der_pol(), std::vector<double>{1.0}, 1.0), std::invalid_argument);
}
