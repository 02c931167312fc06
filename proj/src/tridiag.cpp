#include "syncforge/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "syncforge/error.hpp"

namespace syncforge {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string("TridiagonalMatrix: non-finite entry in ") + what);
        }
    }
}

} // namespace

TridiagonalMatrix::TridiagonalMatrix(std::vector<double> diag, std::vector<double> sub, std::vector<double> super)
    : diag_(std::move(diag)), sub_(std::move(sub)), super_(std::move(super)) {
    if (diag_.empty()) {
        throw std::invalid_argument("TridiagonalMatrix: order must be >= 1");
    }
    if (sub_.size() + 1 != diag_.size() || super_.size() + 1 != diag_.size()) {
        throw std::invalid_argument("TridiagonalMatrix: off-diagonals must have n-1 entries");
    }
    check_finite(diag_, "diag");
    check_finite(sub_, "sub");
    check_finite(super_, "super");
}

TridiagonalMatrix TridiagonalMatrix::symmetric(std::vector<double> diag, std::vector<double> off) {
    auto copy = off;
    return TridiagonalMatrix(std::move(diag), std::move(copy), std::move(off));
}

TridiagonalMatrix TridiagonalMatrix::from_dense_band(const DenseMatrix& a) {
    if (!a.is_square()) {
        throw std::invalid_argument("from_dense_band: matrix must be square");
    }
    const std::size_t n = a.rows();
    std::vector<double> d(n), lo(n - 1), up(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = a(i, i);
        if (i + 1 < n) {
            lo[i] = a(i + 1, i);
            up[i] = a(i, i + 1);
        }
    }
    return TridiagonalMatrix(std::move(d), std::move(lo), std::move(up));
}

double TridiagonalMatrix::operator()(std::size_t i, std::size_t j) const {
    if (i == j) {
        return diag_[i];
    }
    if (j == i + 1) {
        return super_[i];
    }
    if (i == j + 1) {
        return sub_[j];
    }
    return 0.0;
}

std::vector<double> TridiagonalMatrix::off_products() const {
    std::vector<double> p(super_.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = super_[i] * sub_[i];
    }
    return p;
}

bool TridiagonalMatrix::is_unreduced() const noexcept {
    for (std::size_t i = 0; i < super_.size(); ++i) {
        if (super_[i] == 0.0 || sub_[i] == 0.0) {
            return false;
        }
    }
    return true;
}

bool TridiagonalMatrix::is_symmetric(double tol) const noexcept {
    for (std::size_t i = 0; i < super_.size(); ++i) {
        if (std::abs(super_[i] - sub_[i]) > tol) {
            return false;
        }
    }
    return true;
}

double TridiagonalMatrix::norm_inf() const noexcept {
    double best = 0.0;
    const std::size_t n = order();
    for (std::size_t i = 0; i < n; ++i) {
        double s = std::abs(diag_[i]);
        if (i > 0) {
            s += std::abs(sub_[i - 1]);
        }
        if (i + 1 < n) {
            s += std::abs(super_[i]);
        }
        best = std::max(best, s);
    }
    return best;
}

double TridiagonalMatrix::max_abs_entry() const noexcept {
    double best = 0.0;
    for (double x : diag_) {
        best = std::max(best, std::abs(x));
    }
    for (std::size_t i = 0; i < super_.size(); ++i) {
        best = std::max({best, std::abs(super_[i]), std::abs(sub_[i])});
    }
    return best;
}

std::vector<double> TridiagonalMatrix::multiply(std::span<const double> x) const {
    const std::size_t n = order();
    if (x.size() != n) {
        throw std::invalid_argument("TridiagonalMatrix::multiply: dimension mismatch");
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag_[i] * x[i];
        if (i > 0) {
            s += sub_[i - 1] * x[i - 1];
        }
        if (i + 1 < n) {
            s += super_[i] * x[i + 1];
        }
        y[i] = s;
    }
    return y;
}

std::vector<double> TridiagonalMatrix::row_sums() const {
    std::vector<double> ones(order(), 1.0);
    return multiply(ones);
}

TridiagonalMatrix TridiagonalMatrix::leading(std::size_t p) const {
    if (p == 0 || p > order()) {
        throw std::invalid_argument("leading: submatrix order out of range");
    }
    return TridiagonalMatrix({diag_.begin(), diag_.begin() + p}, {sub_.begin(), sub_.begin() + (p - 1)},
                             {super_.begin(), super_.begin() + (p - 1)});
}

TridiagonalMatrix TridiagonalMatrix::trailing(std::size_t p) const {
    if (p == 0 || p > order()) {
        throw std::invalid_argument("trailing: submatrix order out of range");
    }
    const std::size_t skip = order() - p;
    return TridiagonalMatrix({diag_.begin() + skip, diag_.end()}, {sub_.begin() + skip, sub_.end()},
                             {super_.begin() + skip, super_.end()});
}

DenseMatrix TridiagonalMatrix::to_dense() const {
    const std::size_t n = order();
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = diag_[i];
        if (i + 1 < n) {
            a(i, i + 1) = super_[i];
            a(i + 1, i) = sub_[i];
        }
    }
    return a;
}

std::vector<double> sturm_sequence(const TridiagonalMatrix& t, double lambda) {
    const std::size_t n = t.order();
    const auto a = t.diag();
    const auto b = t.super();
    const auto c = t.sub();
    std::vector<double> p(n + 1);
    p[0] = 1.0;
    p[1] = lambda - a[0];
    for (std::size_t j = 2; j <= n; ++j) {
        p[j] = (lambda - a[j - 1]) * p[j - 1] - (b[j - 2] * c[j - 2]) * p[j - 2];
    }
    return p;
}

std::size_t count_eigenvalues_below(const TridiagonalMatrix& t, double lambda) {
    // q_j = -p_j / p_{j-1}: the pivots of T - λI. A negative pivot is a sign
    // agreement between consecutive Sturm polynomials.
    const std::size_t n = t.order();
    const auto a = t.diag();
    const auto prod = t.off_products();
    double max_prod = 1.0;
    for (double x : prod) {
        max_prod = std::max(max_prod, std::abs(x));
    }
    const double pivmin = std::numeric_limits<double>::min() * max_prod;

    std::size_t count = 0;
    double q = a[0] - lambda;
    for (std::size_t j = 0;; ++j) {
        if (std::abs(q) < pivmin) {
            q = -pivmin;
        }
        if (q < 0.0) {
            ++count;
        }
        if (j + 1 == n) {
            break;
        }
        q = (a[j + 1] - lambda) - prod[j] / q;
    }
    return count;
}

std::vector<double> eigenvalues(const TridiagonalMatrix& t) {
    const std::size_t n = t.order();
    if (n == 1) {
        return {t.diag()[0]};
    }
    for (double p : t.off_products()) {
        if (!(p > 0.0)) {
            throw std::invalid_argument("eigenvalues: every off-diagonal product must be positive");
        }
    }

    const auto a = t.diag();
    const auto b = t.super();
    const auto c = t.sub();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) {
            r += std::abs(c[i - 1]);
        }
        if (i + 1 < n) {
            r += std::abs(b[i]);
        }
        lo = std::min(lo, a[i] - r);
        hi = std::max(hi, a[i] + r);
    }
    const double span = hi - lo;
    const double pad = 4.0 * kEps * std::max({std::abs(lo), std::abs(hi), span});
    lo -= pad;
    hi += pad;

    std::vector<double> ev(n);
    double floor = lo;
    for (std::size_t k = 0; k < n; ++k) {
        double left = floor;
        double right = hi;
        for (int iter = 0; iter < 256; ++iter) {
            const double width = right - left;
            const double tol = std::max(2.0 * kEps * std::max(std::abs(left), std::abs(right)), 1e-15 * span);
            if (width <= tol) {
                break;
            }
            const double mid = left + 0.5 * width;
            if (mid <= left || mid >= right) {
                break;
            }
            if (count_eigenvalues_below(t, mid) > k) {
                right = mid;
            } else {
                left = mid;
            }
        }
        ev[k] = left + 0.5 * (right - left);
        // Eigenvalue k+1 is not below eigenvalue k.
        floor = left;
    }
    return ev;
}

TwistedPivots twisted_pivots(const TridiagonalMatrix& t) {
    const std::size_t n = t.order();
    const auto a = t.diag();
    const auto b = t.super();
    const auto c = t.sub();
    double max_prod = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        max_prod = std::max(max_prod, std::abs(b[i] * c[i]));
    }
    const double pivmin = std::numeric_limits<double>::min() * max_prod;
    const auto guard = [pivmin](double p) { return std::abs(p) < pivmin ? -pivmin : p; };

    TwistedPivots tp;
    tp.forward.resize(n);
    tp.backward.resize(n);
    tp.forward[0] = guard(a[0]);
    for (std::size_t j = 1; j < n; ++j) {
        tp.forward[j] = guard(a[j] - b[j - 1] * c[j - 1] / tp.forward[j - 1]);
    }
    tp.backward[n - 1] = guard(a[n - 1]);
    for (std::size_t j = n - 1; j-- > 0;) {
        tp.backward[j] = guard(a[j] - b[j] * c[j] / tp.backward[j + 1]);
    }
    tp.gamma = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
        const double g = tp.forward[r] + tp.backward[r] - a[r];
        if (std::abs(g) < std::abs(tp.gamma)) {
            tp.gamma = g;
            tp.twist = r;
        }
    }
    return tp;
}

std::vector<double> null_vector(const TridiagonalMatrix& t) {
    const std::size_t n = t.order();
    const double scale = t.norm_inf();
    if (n == 1) {
        if (t.diag()[0] != 0.0) {
            throw NumericalError("null_vector: matrix is not singular");
        }
        return {1.0};
    }
    if (!t.is_unreduced()) {
        throw std::invalid_argument("null_vector: matrix must be unreduced");
    }

    const auto b = t.super();
    const auto c = t.sub();
    const auto tp = twisted_pivots(t);
    const std::size_t r = tp.twist;

    std::vector<double> v(n, 0.0);
    v[r] = 1.0;
    double big = 1.0;
    for (std::size_t k = r; k-- > 0;) {
        v[k] = -(b[k] / tp.forward[k]) * v[k + 1];
        big = std::max(big, std::abs(v[k]));
        if (big > 1e150) {
            for (std::size_t i = k; i < n; ++i) {
                v[i] /= big;
            }
            big = 1.0;
        }
    }
    for (std::size_t k = r + 1; k < n; ++k) {
        v[k] = -(c[k - 1] / tp.backward[k]) * v[k - 1];
        big = std::max(big, std::abs(v[k]));
        if (big > 1e150) {
            for (std::size_t i = 0; i <= k; ++i) {
                v[i] /= big;
            }
            big = 1.0;
        }
    }

    double vmax = 0.0;
    for (double x : v) {
        vmax = std::max(vmax, std::abs(x));
    }
    if (!(vmax > 0.0) || !std::isfinite(vmax)) {
        throw NumericalError("null_vector: degenerate recurrence");
    }
    double norm = 0.0;
    for (double& x : v) {
        x /= vmax;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    const double sign = v[0] > 0.0 ? 1.0 : -1.0;
    for (double& x : v) {
        x *= sign / norm;
        if (x == 0.0) {
            throw NumericalError("null_vector: a component underflowed to zero");
        }
    }

    const auto res_vec = t.multiply(v);
    double res = 0.0;
    for (double x : res_vec) {
        res = std::max(res, std::abs(x));
    }
    if (res > 1e-10 * scale) {
        throw NumericalError("null_vector: matrix is not singular (residual " + std::to_string(res) + ")");
    }
    return v;
}

TridiagonalMatrix diag_similarity(const TridiagonalMatrix& t, std::span<const double> d) {
    const std::size_t n = t.order();
    if (d.size() != n) {
        throw std::invalid_argument("diag_similarity: scaling vector has wrong length");
    }
    for (double x : d) {
        if (x == 0.0 || !std::isfinite(x)) {
            throw std::invalid_argument("diag_similarity: scaling entries must be finite and nonzero");
        }
    }
    std::vector<double> diag(t.diag().begin(), t.diag().end());
    std::vector<double> sub(n - 1), super(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        super[i] = t.super()[i] * (d[i + 1] / d[i]);
        sub[i] = t.sub()[i] * (d[i] / d[i + 1]);
    }
    return TridiagonalMatrix(std::move(diag), std::move(sub), std::move(super));
}

HouseholderTridiagonalization householder_tridiagonalize(const DenseMatrix& a) {
    if (!a.is_square()) {
        throw std::invalid_argument("householder_tridiagonalize: matrix must be square");
    }
    const std::size_t n = a.rows();
    if (!a.is_symmetric(1e-13 * std::max(1.0, a.norm_inf()))) {
        throw std::invalid_argument("householder_tridiagonalize: matrix must be symmetric");
    }

    DenseMatrix s = a;
    DenseMatrix h = DenseMatrix::identity(n);
    std::vector<double> u(n), p(n), w(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        double tail = 0.0;
        for (std::size_t i = 1; i < m; ++i) {
            const double x = s(k + 1 + i, k);
            tail += x * x;
        }
        if (tail == 0.0) {
            continue;
        }
        const double x0 = s(k + 1, k);
        const double norm = std::sqrt(x0 * x0 + tail);
        // Pivot sign chosen so u_0 = x0 - alpha does not cancel.
        const double alpha = x0 >= 0.0 ? -norm : norm;
        u[0] = x0 - alpha;
        for (std::size_t i = 1; i < m; ++i) {
            u[i] = s(k + 1 + i, k);
        }
        double utu = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            utu += u[i] * u[i];
        }
        const double beta = 2.0 / utu;

        // Symmetric rank-2 update of the trailing block: P S P with P = I - beta u u^T.
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                acc += s(k + 1 + i, k + 1 + j) * u[j];
            }
            p[i] = beta * acc;
        }
        double up = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            up += u[i] * p[i];
        }
        const double kappa = 0.5 * beta * up;
        for (std::size_t i = 0; i < m; ++i) {
            w[i] = p[i] - kappa * u[i];
        }
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                s(k + 1 + i, k + 1 + j) -= u[i] * w[j] + w[i] * u[j];
            }
        }
        s(k + 1, k) = alpha;
        s(k, k + 1) = alpha;
        for (std::size_t i = 1; i < m; ++i) {
            s(k + 1 + i, k) = 0.0;
            s(k, k + 1 + i) = 0.0;
        }

        // Accumulate H <- H P.
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                acc += h(r, k + 1 + j) * u[j];
            }
            acc *= beta;
            for (std::size_t j = 0; j < m; ++j) {
                h(r, k + 1 + j) -= acc * u[j];
            }
        }
    }

    std::vector<double> diag(n), off(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = s(i, i);
        if (i + 1 < n) {
            off[i] = 0.5 * (s(i + 1, i) + s(i, i + 1));
        }
    }
    return {TridiagonalMatrix::symmetric(std::move(diag), std::move(off)), std::move(h)};
}

} // namespace syncforge
