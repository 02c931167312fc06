#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "syncforge/synthesis.hpp"
#include "test_support.hpp"

using namespace syncforge;
using testing::max_abs_diff;

TEST_CASE("SpectrumSpec validation") {
    CHECK_THROWS_AS(SpectrumSpec({}), std::invalid_argument);
    CHECK_THROWS_AS(SpectrumSpec({0, 2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(SpectrumSpec({0, 3, 2}), std::invalid_argument);
    CHECK_THROWS_AS(SpectrumSpec({0, INFINITY}), std::invalid_argument);
    CHECK(SpectrumSpec({0, 1}).is_laplacian());
    CHECK_FALSE(SpectrumSpec({1, 2}).is_laplacian());
    CHECK_FALSE(SpectrumSpec({-1, 0, 2}).is_laplacian());
    CHECK(SpectrumSpec({-4, 0, 2}).max_abs() == 4.0);
}

TEST_CASE("place_eigenvalues") {
    SUBCASE("linear") {
        const auto s = place_eigenvalues(Placement::linear, 1.0, 10.0, 4);
        CHECK(std::vector<double>(s.values().begin(), s.values().end()) == std::vector<double>{0, 1, 4, 7, 10});
    }
    SUBCASE("chebyshev") {
        const auto s = place_eigenvalues(Placement::chebyshev, 1.0, 10.0, 2);
        REQUIRE(s.size() == 3);
        const double c = std::cos(std::numbers::pi / 4.0);
        CHECK(s[0] == 0.0);
        CHECK(std::abs(s[1] - (1.0 + 9.0 * (1.0 - c) / 2.0)) < 1e-14);
        CHECK(std::abs(s[2] - (1.0 + 9.0 * (1.0 + c) / 2.0)) < 1e-14);
        CHECK(std::abs(s[1] - 2.31802) < 1e-5);
        CHECK(std::abs(s[2] - 8.68198) < 1e-5);
    }
    SUBCASE("63 points on [0.5, 3]") {
        const auto s = place_eigenvalues(Placement::linear, 0.5, 3.0, 63);
        CHECK(s.size() == 64);
        CHECK(s[1] == 0.5);
        CHECK(s[63] == 3.0);
        for (std::size_t i = 2; i < 64; ++i) {
            CHECK(std::abs((s[i] - s[i - 1]) - 2.5 / 62.0) < 1e-14);
        }
    }
    SUBCASE("chebyshev nodes stay inside the interval") {
        for (std::size_t m : {1, 5, 31, 127}) {
            const auto s = place_eigenvalues(Placement::chebyshev, 1.0, 50.0, m);
            for (std::size_t i = 1; i < s.size(); ++i) {
                CHECK(s[i] > 1.0);
                CHECK(s[i] < 50.0);
            }
        }
    }
    CHECK(place_eigenvalues(Placement::linear, 2.0, 4.0, 1)[1] == 3.0);
    CHECK_THROWS_AS(place_eigenvalues(Placement::linear, 0.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(place_eigenvalues(Placement::linear, 2.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(place_eigenvalues(Placement::linear, 1.0, 2.0, 0), std::invalid_argument);
    CHECK(parse_placement("chebyshev") == Placement::chebyshev);
    CHECK_THROWS_AS(parse_placement("random"), std::invalid_argument);
}

TEST_CASE("diag2trid") {
    SUBCASE("two eigenvalues") {
        const auto s = diag2trid(SpectrumSpec({0, 2}));
        CHECK(std::abs(s(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(s(1, 1) - 1.0) < 1e-15);
        CHECK(std::abs(s(0, 1) + 1.0) < 1e-15);
        CHECK(s.is_symmetric());
    }
    SUBCASE("{0, 1, 3}") {
        const auto s = diag2trid(SpectrumSpec({0, 1, 3}));
        CHECK(s.is_symmetric());
        CHECK(max_abs_diff(testing::oracle_eigenvalues(s), std::vector<double>{0, 1, 3}) < 1e-12);
        for (double b : s.super()) {
            CHECK(b < 0.0);
        }
        for (double a : s.diag()) {
            CHECK(a > 0.0);
        }
    }
    SUBCASE("spectrum without zero") {
        const auto s = diag2trid(SpectrumSpec({1, 2, 3}));
        CHECK(max_abs_diff(testing::oracle_eigenvalues(s), std::vector<double>{1, 2, 3}) < 1e-12);
        for (double b : s.super()) {
            CHECK(b < 0.0);
        }
    }
    SUBCASE("custom first row") {
        const std::vector<double> q{0.6, 0.48, 0.64};
        const auto s = diag2trid(SpectrumSpec({0, 1, 5}), q);
        CHECK(max_abs_diff(testing::oracle_eigenvalues(s), std::vector<double>{0, 1, 5}) < 1e-12);
        const std::vector<double> not_unit{0.6, 0.6, 0.6};
        CHECK_THROWS_AS(diag2trid(SpectrumSpec({0, 1, 5}), not_unit), std::invalid_argument);
        const std::vector<double> wrong_size{1.0};
        CHECK_THROWS_AS(diag2trid(SpectrumSpec({0, 1, 5}), wrong_size), std::invalid_argument);
    }
    SUBCASE("a zero in q is rejected") {
        const std::vector<double> q{1.0, 0.0, 0.0};
        CHECK_THROWS_AS(diag2trid(SpectrumSpec({0, 1, 5}), q), std::invalid_argument);
    }
    CHECK_THROWS_AS(diag2trid(SpectrumSpec({1})), std::invalid_argument);
}

TEST_CASE("diag2trid output properties") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rep % 63;
        const auto spec = testing::random_laplacian_spectrum(rng, n, 100.0);
        const auto s = diag2trid(SpectrumSpec(spec));
        CHECK(s.is_symmetric());
        const auto ev = eigenvalues(s);
        CHECK(max_abs_diff(ev, spec) <= 1e-10 * spec.back());
        for (double b : s.super()) {
            CHECK(b < 0.0);
        }
        for (double a : s.diag()) {
            CHECK(a > 0.0);
        }
    }
}

TEST_CASE("trid_zero_row_sum examples") {
    SUBCASE("already balanced") {
        const auto s = TridiagonalMatrix::symmetric({1, 1}, {-1});
        const auto r = trid_zero_row_sum(s);
        CHECK(r.report.alphas == std::vector<double>{1.0});
        CHECK(r.laplacian.matrix() == s);
    }
    SUBCASE("path graph is a fixed point") {
        const auto t = TridiagonalMatrix::symmetric({1, 2, 2, 1}, {-1, -1, -1});
        const auto r = trid_zero_row_sum(t);
        for (double a : r.report.alphas) {
            CHECK(std::abs(a - 1.0) < 1e-14);
        }
        CHECK(max_abs_diff(r.laplacian.matrix().diag(), t.diag()) < 1e-14);
        CHECK(max_abs_diff(r.laplacian.matrix().super(), t.super()) < 1e-14);
        CHECK(max_abs_diff(r.laplacian.matrix().sub(), t.sub()) < 1e-14);
    }
    SUBCASE("{0, 1, 3}") {
        const auto s = diag2trid(SpectrumSpec({0, 1, 3}));
        const auto r = trid_zero_row_sum(s);
        const auto& l = r.laplacian.matrix();
        CHECK(testing::max_abs(l.row_sums()) <= 1e-14 * l.norm_inf() * 10);
        CHECK(max_abs_diff(testing::oracle_eigenvalues(l), std::vector<double>{0, 1, 3}) < 1e-12);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(l.super()[i] < 0.0);
            CHECK(l.sub()[i] < 0.0);
        }
        const auto v = null_vector(s);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(r.report.alphas[k] == doctest::Approx(v[k + 1] / v[k]).epsilon(1e-12));
        }
        CHECK(r.report.similarity[0] == 1.0);
        CHECK(r.report.similarity[2] == doctest::Approx(r.report.alphas[0] * r.report.alphas[1]).epsilon(1e-15));
    }
    SUBCASE("rejections") {
        CHECK_THROWS_AS(trid_zero_row_sum(TridiagonalMatrix::symmetric({2, 2}, {-1})), SynthesisError);
        try {
            trid_zero_row_sum(TridiagonalMatrix::symmetric({2, 2}, {-1}));
        } catch (const SynthesisError& e) {
            CHECK(e.stage() == SynthesisError::Stage::zero_row_sum);
            CHECK(to_string(e.stage()) == "trid_zero_row_sum");
        }
        CHECK_THROWS_AS(trid_zero_row_sum(TridiagonalMatrix({1, 1}, {-1}, {-2})), std::invalid_argument);
        CHECK_THROWS_AS(trid_zero_row_sum(TridiagonalMatrix::symmetric({1, 1}, {1})), std::invalid_argument);
        CHECK_THROWS_AS(trid_zero_row_sum(TridiagonalMatrix({0}, {}, {})), std::invalid_argument);
    }
}

TEST_CASE("synthesize") {
    SUBCASE("two nodes") {
        const auto r = synthesize(SpectrumSpec({0, 2}));
        const auto& l = r.laplacian.matrix();
        CHECK(std::abs(l(0, 0) - 1.0) < 1e-15);
        CHECK(std::abs(l(1, 1) - 1.0) < 1e-15);
        CHECK(std::abs(l(0, 1) + 1.0) < 1e-15);
        CHECK(std::abs(l(1, 0) + 1.0) < 1e-15);
        CHECK(r.laplacian.provenance() == Provenance::synthesized);
    }
    SUBCASE("32 nodes, linear on [1, 10]: entries below 6.2") {
        const auto r = synthesize(place_eigenvalues(Placement::linear, 1.0, 10.0, 31));
        CHECK(r.report.max_abs_entry < 6.2);
        CHECK(r.laplacian.matrix().max_abs_entry() < 6.2);
    }
    SUBCASE("128 nodes, chebyshev on [1, 50]: entries below 27") {
        const auto r = synthesize(place_eigenvalues(Placement::chebyshev, 1.0, 50.0, 127));
        CHECK(r.report.max_abs_entry < 27.0);
        CHECK(r.report.spectral_residual <= 1e-9 * 50.0);
    }
    SUBCASE("null vector of the result is the constant vector") {
        const auto r = synthesize(place_eigenvalues(Placement::chebyshev, 1.0, 10.0, 40));
        const auto v = null_vector(r.laplacian.matrix());
        for (double x : v) {
            CHECK(std::abs(x - 1.0 / std::sqrt(41.0)) < 1e-10);
        }
    }
    CHECK_THROWS_AS(synthesize(SpectrumSpec({1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(synthesize(SpectrumSpec({0})), std::invalid_argument);
}

TEST_CASE("synthesis round trip on random spectra") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rng() % 63;
        const auto spec = testing::random_laplacian_spectrum(rng, n, 100.0);
        const auto r = synthesize(SpectrumSpec(spec));
        const auto& l = r.laplacian.matrix();
        const double norm = l.norm_inf();
        CHECK(max_abs_diff(eigenvalues(l), spec) <= 1e-9 * spec.back());
        CHECK(testing::max_abs(l.row_sums()) <= 1e-11 * norm);
        for (double a : l.diag()) {
            CHECK(a > 1e-13 * norm);
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            CHECK(l.super()[i] < -1e-13 * norm);
            CHECK(l.sub()[i] < -1e-13 * norm);
        }
    }
}

TEST_CASE("scaling factors equal null vector ratios") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng() % 63;
        const auto s = diag2trid(SpectrumSpec(testing::random_laplacian_spectrum(rng, n, 50.0)));
        const auto r = trid_zero_row_sum(s);
        const auto v = null_vector(s);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            CHECK(r.report.alphas[k] > 0.0);
            CHECK(r.report.alphas[k] == doctest::Approx(v[k + 1] / v[k]).epsilon(1e-9));
        }
        for (std::size_t k = 0; k < n; ++k) {
            CHECK(r.report.null_vec[k] == doctest::Approx(v[k]).epsilon(1e-9));
        }
    }
}

TEST_CASE("infeasible symmetric 3x3 spectra synthesize to asymmetric Laplacians") {
    for (auto [l2, l3] : {std::pair{1.0, 2.0}, {1.0, 1.5}, {2.0, 5.0}, {0.5, 1.2}}) {
        REQUIRE_FALSE(symmetric_3x3_feasible(l2, l3).feasible);
        const auto l = synthesize(SpectrumSpec({0, l2, l3})).laplacian.matrix();
        double gap = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            gap = std::max(gap, std::abs(l.super()[i] - l.sub()[i]));
        }
        CHECK(gap > 1e-10);
    }
}

TEST_CASE("diffusive_laplacian") {
    const auto d13 = diffusive_laplacian(1.0, 3);
    CHECK(max_abs_diff(d13.spectrum.values(), std::vector<double>{0, 1, 3}) < 1e-15);
    CHECK(d13.laplacian.matrix() == TridiagonalMatrix::symmetric({1, 2, 1}, {-1, -1}));
    CHECK(max_abs_diff(diffusive_laplacian(2.0, 3).spectrum.values(), std::vector<double>{0, 2, 6}) < 1e-14);
    CHECK(max_abs_diff(diffusive_laplacian(1.0, 4).spectrum.values(),
                       std::vector<double>{0, 2 - std::sqrt(2.0), 2, 2 + std::sqrt(2.0)}) < 1e-14);
    for (std::size_t n = 2; n <= 128; ++n) {
        for (double sigma : {1.0, 2.5}) {
            const auto d = diffusive_laplacian(sigma, n);
            CHECK(max_abs_diff(eigenvalues(d.laplacian.matrix()), d.spectrum.values()) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(diffusive_laplacian(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(diffusive_laplacian(1.0, 1), std::invalid_argument);
}

TEST_CASE("bidiagonal_optimal_laplacian") {
    const auto l = bidiagonal_optimal_laplacian(2.0, 3);
    const DenseMatrix expected{{2, -2, 0}, {0, 2, -2}, {0, 0, 0}};
    CHECK(l.to_dense() == expected);
    CHECK(l.row_sums() == std::vector<double>{0, 0, 0});
    for (std::size_t n : {2, 5, 9}) {
        for (double lambda : {2.0, 8.0}) {
            const auto m = bidiagonal_optimal_laplacian(lambda, n);
            CHECK(testing::max_abs(m.row_sums()) == 0.0);
            // det(mu I - L) = mu (mu - lambda)^(n-1) at several mu.
            for (double mu : {-1.0, 0.5, 3.0, 7.5}) {
                auto a = m.to_dense();
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        a(i, j) = (i == j ? mu : 0.0) - a(i, j);
                    }
                }
                const double expect = mu * std::pow(mu - lambda, static_cast<double>(n - 1));
                CHECK(testing::determinant(a) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(bidiagonal_optimal_laplacian(-1.0, 3), std::invalid_argument);
}

TEST_CASE("symmetric 3x3 feasibility") {
    SUBCASE("(1, 3) is the boundary case and reproduces the path graph") {
        const auto r = symmetric_3x3_feasible(1.0, 3.0);
        CHECK(r.feasible);
        CHECK(r.boundary);
        REQUIRE(r.solutions.size() == 1);
        CHECK(std::abs(r.solutions[0].first - 1.0) < 1e-15);
        CHECK(std::abs(r.solutions[0].second - 1.0) < 1e-15);
        CHECK(symmetric_3x3_matrix(1.0, 1.0) == diffusive_laplacian(1.0, 3).laplacian.matrix().to_dense());
    }
    SUBCASE("(1, 2) is infeasible") {
        const auto r = symmetric_3x3_feasible(1.0, 2.0);
        CHECK_FALSE(r.feasible);
        CHECK(r.solutions.empty());
    }
    SUBCASE("(1, 4): both branches have the requested spectrum") {
        const auto r = symmetric_3x3_feasible(1.0, 4.0);
        CHECK(r.feasible);
        CHECK_FALSE(r.boundary);
        REQUIRE(r.solutions.size() == 2);
        for (auto [x, y] : r.solutions) {
            CHECK(max_abs_diff(jacobi_eigenvalues(symmetric_3x3_matrix(x, y)), std::vector<double>{0, 1, 4}) < 1e-10);
        }
    }
    SUBCASE("classification matches the inequality on a grid") {
        for (int i = 1; i <= 12; ++i) {
            for (int j = i + 1; j <= 24; ++j) {
                const double a = 0.5 * i, b = 0.5 * j;
                const bool expect = 10.0 * a * b <= 3.0 * a * a + 3.0 * b * b;
                const auto r = symmetric_3x3_feasible(a, b);
                CHECK(r.feasible == expect);
                for (auto [x, y] : r.solutions) {
                    CHECK(max_abs_diff(jacobi_eigenvalues(symmetric_3x3_matrix(x, y)),
                                       std::vector<double>{0, a, b}) < 1e-10 * b);
                }
            }
        }
    }
    CHECK_THROWS_AS(symmetric_3x3_feasible(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(symmetric_3x3_feasible(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("TridiagonalLaplacian invariants") {
    CHECK_NOTHROW(TridiagonalLaplacian(TridiagonalMatrix::symmetric({1, 1}, {-1}), Provenance::loaded));
    CHECK_THROWS_AS(TridiagonalLaplacian(TridiagonalMatrix::symmetric({1, 1}, {1}), Provenance::loaded),
                    NumericalError);
    CHECK_THROWS_AS(TridiagonalLaplacian(TridiagonalMatrix::symmetric({1, 1.1}, {-1}), Provenance::loaded),
                    NumericalError);
    CHECK_THROWS_AS(TridiagonalLaplacian(TridiagonalMatrix({0}, {}, {}), Provenance::loaded), std::invalid_argument);
}

TEST_CASE("check_laplacian") {
    const auto good = synthesize(SpectrumSpec({0, 1, 4, 9})).laplacian.matrix();
    CHECK(check_laplacian(good).ok());
    CHECK(check_laplacian(good, SpectrumSpec({0, 1, 4, 9})).ok());
    CHECK_FALSE(check_laplacian(good, SpectrumSpec({0, 1, 4, 9.1})).ok());
    CHECK_FALSE(check_laplacian(TridiagonalMatrix::symmetric({1, 1.5}, {-1})).ok());
    CHECK_FALSE(check_laplacian(TridiagonalMatrix::symmetric({-1, -1}, {1})).ok());
    CHECK_FALSE(check_laplacian(bidiagonal_optimal_laplacian(2.0, 4)).ok());
}
