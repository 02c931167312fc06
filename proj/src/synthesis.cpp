#include "syncforge/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace syncforge {

SpectrumSpec::SpectrumSpec(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("SpectrumSpec: at least one eigenvalue required");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw std::invalid_argument("SpectrumSpec: eigenvalues must be finite");
        }
        if (i > 0 && !(values_[i] > values_[i - 1])) {
            throw std::invalid_argument("SpectrumSpec: eigenvalues must be strictly increasing");
        }
    }
}

bool SpectrumSpec::is_laplacian() const noexcept {
    // Strictly increasing, so values_[1] > 0 covers the rest.
    return values_[0] == 0.0 && (values_.size() == 1 || values_[1] > 0.0);
}

double SpectrumSpec::max_abs() const noexcept {
    return std::max(std::abs(values_.front()), std::abs(values_.back()));
}

Placement parse_placement(std::string_view name) {
    if (name == "linear") {
        return Placement::linear;
    }
    if (name == "chebyshev") {
        return Placement::chebyshev;
    }
    throw std::invalid_argument("unknown eigenvalue placement '" + std::string(name) + "'");
}

std::string_view to_string(Placement p) {
    return p == Placement::linear ? "linear" : "chebyshev";
}

SpectrumSpec place_eigenvalues(Placement strategy, double lo, double hi, std::size_t count) {
    if (!(lo > 0.0)) {
        throw std::invalid_argument("place_eigenvalues: interval must lie in (0, inf)");
    }
    if (!(hi > lo)) {
        throw std::invalid_argument("place_eigenvalues: interval must satisfy lo < hi");
    }
    if (count < 1) {
        throw std::invalid_argument("place_eigenvalues: count must be >= 1");
    }
    std::vector<double> v;
    v.reserve(count + 1);
    v.push_back(0.0);
    if (strategy == Placement::linear) {
        if (count == 1) {
            v.push_back(0.5 * (lo + hi));
        } else {
            const double step = (hi - lo) / static_cast<double>(count - 1);
            for (std::size_t i = 0; i < count; ++i) {
                v.push_back(i + 1 == count ? hi : lo + step * static_cast<double>(i));
            }
        }
    } else {
        const double m = static_cast<double>(count);
        // k = m .. 1 gives cos((2k-1)π/2m) in ascending order.
        for (std::size_t k = count; k >= 1; --k) {
            const double x = std::cos((2.0 * static_cast<double>(k) - 1.0) * std::numbers::pi / (2.0 * m));
            v.push_back(lo + (hi - lo) * 0.5 * (1.0 + x));
        }
    }
    return SpectrumSpec(std::move(v));
}

TridiagonalMatrix diag2trid(const SpectrumSpec& spec, std::span<const double> q) {
    const std::size_t n = spec.size();
    if (n < 2) {
        throw std::invalid_argument("diag2trid: at least two eigenvalues required");
    }

    std::vector<double> start(n, 1.0 / std::sqrt(static_cast<double>(n)));
    if (!q.empty()) {
        if (q.size() != n) {
            throw std::invalid_argument("diag2trid: starting vector has wrong length");
        }
        double norm2 = 0.0;
        for (double x : q) {
            if (x == 0.0 || !std::isfinite(x)) {
                throw std::invalid_argument("diag2trid: starting vector needs finite nonzero components");
            }
            norm2 += x * x;
        }
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12) {
            throw std::invalid_argument("diag2trid: starting vector must have unit 2-norm");
        }
        start.assign(q.begin(), q.end());
    }

    // Reflector Q = I - 2 w w^T / w^T w with w = e_1 - q, so Q e_1 = q.
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = (i == 0 ? 1.0 : 0.0) - start[i];
    }
    double wtw = 0.0;
    for (double x : w) {
        wtw += x * x;
    }
    DenseMatrix reflector = DenseMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            reflector(i, j) -= 2.0 * w[i] * w[j] / wtw;
        }
    }

    // A = Q^T diag(λ) Q, Q symmetric.
    const auto lambda = spec.values();
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += reflector(k, i) * lambda[k] * reflector(k, j);
            }
            a(i, j) = s;
            a(j, i) = s;
        }
    }

    auto [s, h] = householder_tridiagonalize(a);

    // ±1 diagonal similarity making every off-diagonal entry negative.
    std::vector<double> signs(n, 1.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        signs[i + 1] = s.super()[i] > 0.0 ? -signs[i] : signs[i];
    }
    TridiagonalMatrix out = diag_similarity(s, signs);

    const double span = lambda[n - 1] - lambda[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(std::abs(out.super()[i]) >= 1e-13 * span)) {
            throw SynthesisError(SynthesisError::Stage::symmetric_tridiagonal,
                                 "diag2trid: result is numerically reduced at off-diagonal " + std::to_string(i + 2));
        }
    }
    // Exact symmetry; the ±1 similarity keeps sub and super equal already.
    return TridiagonalMatrix::symmetric(std::vector<double>(out.diag().begin(), out.diag().end()),
                                        std::vector<double>(out.super().begin(), out.super().end()));
}

std::string_view to_string(Provenance p) {
    switch (p) {
    case Provenance::synthesized:
        return "synthesized";
    case Provenance::diffusive:
        return "diffusive";
    case Provenance::loaded:
        return "loaded";
    }
    return "unknown";
}

std::string_view to_string(SynthesisError::Stage s) {
    return s == SynthesisError::Stage::symmetric_tridiagonal ? "diag2trid" : "trid_zero_row_sum";
}

TridiagonalLaplacian::TridiagonalLaplacian(TridiagonalMatrix matrix, Provenance provenance, double row_sum_tol)
    : matrix_(std::move(matrix)), provenance_(provenance) {
    const std::size_t n = matrix_.order();
    if (n < 2) {
        throw std::invalid_argument("TridiagonalLaplacian: a network needs at least two nodes");
    }
    for (double x : matrix_.diag()) {
        if (!(x > 0.0)) {
            throw NumericalError("TridiagonalLaplacian: diagonal must be strictly positive");
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(matrix_.super()[i] < 0.0) || !(matrix_.sub()[i] < 0.0)) {
            throw NumericalError("TridiagonalLaplacian: off-diagonals must be strictly negative");
        }
    }
    const double tol = row_sum_tol * matrix_.norm_inf();
    for (double r : matrix_.row_sums()) {
        if (std::abs(r) > tol) {
            throw NumericalError("TridiagonalLaplacian: row sums must vanish (residual " + std::to_string(r) + ")");
        }
    }
}

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
    }
    return d;
}

void fill_entry_stats(const TridiagonalMatrix& l, SynthesisReport& r) {
    r.max_abs_entry = l.max_abs_entry();
    r.max_abs_offdiag = 0.0;
    for (std::size_t i = 0; i < l.super().size(); ++i) {
        r.max_abs_offdiag = std::max({r.max_abs_offdiag, std::abs(l.super()[i]), std::abs(l.sub()[i])});
    }
    r.diag_positive_ok = std::all_of(l.diag().begin(), l.diag().end(), [](double x) { return x > 0.0; });
    r.offdiag_sign_ok = std::all_of(l.super().begin(), l.super().end(), [](double x) { return x < 0.0; }) &&
                        std::all_of(l.sub().begin(), l.sub().end(), [](double x) { return x < 0.0; });
    r.row_sum_residual = 0.0;
    for (double x : l.row_sums()) {
        r.row_sum_residual = std::max(r.row_sum_residual, std::abs(x));
    }
}

} // namespace

SynthesisResult trid_zero_row_sum(const TridiagonalMatrix& s) {
    const std::size_t n = s.order();
    if (n < 2) {
        throw std::invalid_argument("trid_zero_row_sum: order must be >= 2");
    }
    if (!s.is_symmetric()) {
        throw std::invalid_argument("trid_zero_row_sum: input must be symmetric");
    }
    for (double b : s.super()) {
        if (!(b < 0.0)) {
            throw std::invalid_argument("trid_zero_row_sum: off-diagonals must be strictly negative");
        }
    }

    const auto a = s.diag();
    const auto b = s.super();
    using Stage = SynthesisError::Stage;

    // alpha[j] holds α_{j+2}: row j+1 (1-based) of L = D^{-1} S D sums to zero.
    // Rows above the twist row are solved top-down (a_j + b_{j-1}/α + α b_j = 0
    // for the next α), rows below it bottom-up; the twist row is the one left
    // to verify. A pure top-down sweep loses all accuracy once the null vector
    // decays, because its final pivot carries the error divided by v_N^2.
    const auto tp = twisted_pivots(s);
    const std::size_t r = tp.twist;
    std::vector<double> alpha(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        alpha[j] = j < r ? -tp.forward[j] / b[j] : -b[j] / tp.backward[j + 1];
        if (!std::isfinite(alpha[j]) || !(alpha[j] > 0.0)) {
            throw SynthesisError(Stage::zero_row_sum, "trid_zero_row_sum: scaling factor alpha_" +
                                                          std::to_string(j + 2) +
                                                          " is not positive; input violates preconditions");
        }
    }

    const double left = r > 0 ? b[r - 1] / alpha[r - 1] : 0.0;
    const double right = r + 1 < n ? alpha[r] * b[r] : 0.0;
    const double twist_sum = a[r] + left + right;
    if (std::abs(twist_sum) > 1e-10 * s.norm_inf()) {
        throw SynthesisError(Stage::zero_row_sum, "trid_zero_row_sum: input is not singular (row " +
                                                      std::to_string(r + 1) + " sum " + std::to_string(twist_sum) +
                                                      ")");
    }

    std::vector<double> diag(a.begin(), a.end());
    std::vector<double> sub(n - 1), super(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        super[j] = alpha[j] * b[j];
        sub[j] = b[j] / alpha[j];
    }
    TridiagonalMatrix l(std::move(diag), std::move(sub), std::move(super));

    SynthesisReport report;
    report.alphas = alpha;
    report.similarity.resize(n);
    report.similarity[0] = 1.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        report.similarity[j + 1] = report.similarity[j] * alpha[j];
    }
    double norm = 0.0;
    for (double x : report.similarity) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    report.null_vec.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.null_vec[i] = report.similarity[i] / norm;
    }
    fill_entry_stats(l, report);
    report.spectral_residual = max_abs_diff(eigenvalues(l), eigenvalues(s));

    try {
        return {TridiagonalLaplacian(std::move(l), Provenance::synthesized), std::move(report)};
    } catch (const NumericalError& e) {
        throw SynthesisError(Stage::zero_row_sum, e.what());
    }
}

SynthesisResult synthesize(const SpectrumSpec& spec, std::span<const double> q) {
    if (spec.size() < 2) {
        throw std::invalid_argument("synthesize: a network needs at least two nodes");
    }
    if (!spec.is_laplacian()) {
        throw std::invalid_argument("synthesize: spectrum must be 0 followed by positive values");
    }
    const TridiagonalMatrix s = diag2trid(spec, q);
    SynthesisResult result = trid_zero_row_sum(s);
    result.report.spectral_residual = max_abs_diff(eigenvalues(result.laplacian.matrix()), spec.values());
    return result;
}

double diffusive_eigenvalue(std::size_t k, std::size_t n) {
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi / (2.0 * static_cast<double>(n)));
    return 4.0 * s * s;
}

DiffusiveCoupling diffusive_laplacian(double sigma, std::size_t n) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("diffusive_laplacian: sigma must be positive");
    }
    if (n < 2) {
        throw std::invalid_argument("diffusive_laplacian: N must be >= 2");
    }
    std::vector<double> diag(n, 2.0 * sigma);
    diag.front() = sigma;
    diag.back() = sigma;
    std::vector<double> off(n - 1, -sigma);
    std::vector<double> spectrum(n);
    for (std::size_t k = 0; k < n; ++k) {
        spectrum[k] = sigma * diffusive_eigenvalue(k, n);
    }
    return {TridiagonalLaplacian(TridiagonalMatrix::symmetric(std::move(diag), std::move(off)), Provenance::diffusive),
            SpectrumSpec(std::move(spectrum))};
}

TridiagonalMatrix bidiagonal_optimal_laplacian(double lambda, std::size_t n) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("bidiagonal_optimal_laplacian: lambda must be positive");
    }
    if (n < 2) {
        throw std::invalid_argument("bidiagonal_optimal_laplacian: N must be >= 2");
    }
    std::vector<double> diag(n, lambda);
    diag.back() = 0.0;
    return TridiagonalMatrix(std::move(diag), std::vector<double>(n - 1, 0.0), std::vector<double>(n - 1, -lambda));
}

Symmetric3x3 symmetric_3x3_feasible(double lambda2, double lambda3) {
    if (!(lambda2 > 0.0) || !(lambda3 > lambda2)) {
        throw std::invalid_argument("symmetric_3x3_feasible: need 0 < lambda2 < lambda3");
    }
    const double disc = 3.0 * lambda2 * lambda2 - 10.0 * lambda2 * lambda3 + 3.0 * lambda3 * lambda3;
    const double slack = 1e-12 * lambda3 * lambda3;
    const double base = 3.0 * lambda2 + 3.0 * lambda3;

    Symmetric3x3 out;
    if (disc < -slack) {
        return out;
    }
    out.feasible = true;
    if (std::abs(disc) <= slack) {
        out.boundary = true;
        out.solutions.emplace_back(base / 12.0, base / 12.0);
        return out;
    }
    const double r = std::sqrt(3.0) * std::sqrt(disc);
    out.solutions.emplace_back((base + r) / 12.0, (base - r) / 12.0);
    out.solutions.emplace_back((base - r) / 12.0, (base + r) / 12.0);
    return out;
}

DenseMatrix symmetric_3x3_matrix(double x, double y) {
    return DenseMatrix{{x, -x, 0.0}, {-x, x + y, -y}, {0.0, -y, y}};
}

LaplacianCheck check_laplacian(const TridiagonalMatrix& l, const std::optional<SpectrumSpec>& expected,
                               double spectral_tol) {
    LaplacianCheck c;
    c.offdiag_negative = std::all_of(l.super().begin(), l.super().end(), [](double x) { return x < 0.0; }) &&
                         std::all_of(l.sub().begin(), l.sub().end(), [](double x) { return x < 0.0; });
    c.diag_positive = std::all_of(l.diag().begin(), l.diag().end(), [](double x) { return x > 0.0; });
    for (double r : l.row_sums()) {
        c.row_sum_residual = std::max(c.row_sum_residual, std::abs(r));
    }
    c.row_sums_ok = c.row_sum_residual <= 1e-11 * l.norm_inf();

    const auto prods = l.off_products();
    c.real_spectrum = l.order() >= 2 && std::all_of(prods.begin(), prods.end(), [](double p) { return p > 0.0; });
    if (!c.real_spectrum) {
        return c;
    }
    c.spectrum = eigenvalues(l);
    const double scale = std::max(std::abs(c.spectrum.front()), std::abs(c.spectrum.back()));
    bool shape = std::abs(c.spectrum.front()) <= 1e-9 * scale;
    for (std::size_t i = 1; i < c.spectrum.size(); ++i) {
        shape = shape && c.spectrum[i] > 1e-9 * scale;
    }
    c.spectrum_ok = shape;
    if (expected) {
        if (expected->size() != c.spectrum.size()) {
            c.spectrum_ok = false;
        } else {
            c.spectral_residual = max_abs_diff(c.spectrum, expected->values());
            c.spectrum_ok = shape && *c.spectral_residual <= spectral_tol * std::max(expected->max_abs(), 1.0);
        }
    }
    return c;
}

} // namespace syncforge
