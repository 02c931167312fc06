#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "syncforge/tridiag.hpp"

namespace testing {

using wide = boost::multiprecision::cpp_bin_float_100;

/// Tridiagonal matrix held in 100-digit arithmetic.
class WideTridiagonal {
public:
    explicit WideTridiagonal(const syncforge::TridiagonalMatrix& t)
        : n_(t.order()), a_(n_), sub_(n_ - 1), super_(n_ - 1), b2_(n_ - 1), scale_(std::max(1.0, t.norm_inf())) {
        for (std::size_t i = 0; i < n_; ++i) {
            a_[i] = t.diag()[i];
        }
        for (std::size_t i = 0; i + 1 < n_; ++i) {
            sub_[i] = t.sub()[i];
            super_[i] = t.super()[i];
            b2_[i] = super_[i] * sub_[i];
        }
    }

    std::vector<wide> forward_pivots(const wide& shift) const {
        std::vector<wide> d(n_);
        d[0] = a_[0] - shift;
        for (std::size_t j = 1; j < n_; ++j) {
            d[j] = a_[j] - shift - b2_[j - 1] / d[j - 1];
        }
        return d;
    }

    std::vector<wide> backward_pivots(const wide& shift) const {
        std::vector<wide> d(n_);
        d[n_ - 1] = a_[n_ - 1] - shift;
        for (std::size_t j = n_ - 1; j-- > 0;) {
            d[j] = a_[j] - shift - b2_[j] / d[j + 1];
        }
        return d;
    }

    static std::size_t negatives(const std::vector<wide>& d) {
        return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](const wide& x) { return x < 0; }));
    }

    /// Bracket [lo, hi] of width 1e-95 ||T|| around the smallest eigenvalue,
    /// which must lie below `upper` with no other eigenvalue there.
    bool bracket_smallest(double upper, wide& lo, wide& hi) const {
        lo = -scale_;
        hi = upper;
        if (negatives(forward_pivots(lo)) != 0 || negatives(forward_pivots(hi)) != 1) {
            return false;
        }
        const wide width = wide(scale_) * wide("1e-95");
        while (hi - lo > width) {
            const wide mid = (lo + hi) / 2;
            (negatives(forward_pivots(mid)) == 0 ? lo : hi) = mid;
        }
        return true;
    }

    /// Eigenvector for `lambda` by the three-term recurrence from v_1 = 1.
    std::vector<wide> eigenvector(const wide& lambda) const {
        std::vector<wide> v(n_);
        v[0] = 1;
        if (n_ > 1) {
            v[1] = -(a_[0] - lambda) * v[0] / super_[0];
        }
        for (std::size_t k = 1; k + 1 < n_; ++k) {
            v[k + 1] = -(sub_[k - 1] * v[k - 1] + (a_[k] - lambda) * v[k]) / super_[k];
        }
        return v;
    }

    std::size_t order() const { return n_; }

private:
    std::size_t n_;
    std::vector<wide> a_, sub_, super_, b2_;
    double scale_;
};

struct BorderPivots {
    bool bracketed = false;       // exactly one eigenvalue below the shift
    bool leading_positive = false;  // forward pivots 1..N-1 positive, pivot N negative
    bool trailing_positive = false; // backward pivots 2..N positive, pivot 1 negative
};

/// Definiteness of the proper leading and trailing principal submatrices of
/// S - λ_min I, decided in 100-digit arithmetic. The shift is placed just
/// above the smallest eigenvalue of the symmetric tridiagonal S, where only
/// one pivot of each elimination order may be negative. In double precision
/// this is undecidable once the null vector decays: the smallest eigenvalue
/// of the order-(N-1) block then exceeds λ_min by about v_N^2 ||S||.
inline BorderPivots border_pivots(const syncforge::TridiagonalMatrix& s, double lambda2) {
    const WideTridiagonal w(s);
    const std::size_t n = w.order();
    BorderPivots out;
    wide lo, hi;
    if (!w.bracket_smallest(0.5 * lambda2, lo, hi)) {
        return out;
    }
    const auto d = w.forward_pivots(hi);
    const auto e = w.backward_pivots(hi);
    out.bracketed = WideTridiagonal::negatives(d) == 1 && WideTridiagonal::negatives(e) == 1;
    out.leading_positive = d[n - 1] < 0;
    out.trailing_positive = e[0] < 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        out.leading_positive = out.leading_positive && d[j] > 0;
        out.trailing_positive = out.trailing_positive && e[j + 1] > 0;
    }
    return out;
}

/// Consecutive ratios v_{k+1}/v_k of the eigenvector for the smallest
/// eigenvalue, which must lie below lambda2 / 2. Empty on failure.
inline std::vector<double> exact_null_ratios(const syncforge::TridiagonalMatrix& s, double lambda2) {
    const WideTridiagonal w(s);
    wide lo, hi;
    if (!w.bracket_smallest(0.5 * lambda2, lo, hi)) {
        return {};
    }
    const auto v = w.eigenvector((lo + hi) / 2);
    std::vector<double> r(v.size() - 1);
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        r[k] = static_cast<double>(v[k + 1] / v[k]);
    }
    return r;
}

} // namespace testing
