#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "syncforge/dense.hpp"

namespace syncforge {

/// Tridiagonal matrix in compact band storage.
///
/// For an order-n matrix T:
/// - diag[i]  = T(i, i),     i = 0..n-1
/// - super[i] = T(i, i + 1), i = 0..n-2
/// - sub[i]   = T(i + 1, i), i = 0..n-2
///
/// In the usual 1-based notation with rows (c_k, a_k, b_{k+1}), super[k-2]
/// holds b_k and sub[k-2] holds c_k.
class TridiagonalMatrix {
public:
    TridiagonalMatrix() = default;
    TridiagonalMatrix(std::vector<double> diag, std::vector<double> sub, std::vector<double> super);

    static TridiagonalMatrix symmetric(std::vector<double> diag, std::vector<double> off);

    /// Keeps only the three central bands of `a`.
    static TridiagonalMatrix from_dense_band(const DenseMatrix& a);

    std::size_t order() const noexcept { return diag_.size(); }

    std::span<const double> diag() const noexcept { return diag_; }
    std::span<const double> sub() const noexcept { return sub_; }
    std::span<const double> super() const noexcept { return super_; }

    double operator()(std::size_t i, std::size_t j) const;

    /// Products super[i] * sub[i]; these alone determine the spectrum.
    std::vector<double> off_products() const;

    /// No zero entry on either off-diagonal.
    bool is_unreduced() const noexcept;
    bool is_symmetric(double tol = 0.0) const noexcept;

    double norm_inf() const noexcept;
    double max_abs_entry() const noexcept;

    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> row_sums() const;

    /// Leading / trailing principal submatrix of order p.
    TridiagonalMatrix leading(std::size_t p) const;
    TridiagonalMatrix trailing(std::size_t p) const;

    DenseMatrix to_dense() const;

    friend bool operator==(const TridiagonalMatrix&, const TridiagonalMatrix&) = default;

private:
    std::vector<double> diag_;
    std::vector<double> sub_;
    std::vector<double> super_;
};

/// Characteristic polynomials p_0..p_N of the leading principal
/// submatrices, p_j(λ) = det(λI - T_j), evaluated by the three-term
/// recurrence. Values are unscaled and may overflow for large N; use
/// count_eigenvalues_below for sign information.
std::vector<double> sturm_sequence(const TridiagonalMatrix& t, double lambda);

/// Number of eigenvalues strictly below `lambda` (sign agreements in the
/// Sturm sequence), computed from the scale-free ratios p_j / p_{j-1}.
/// Requires real off-diagonal products >= 0 to be meaningful.
std::size_t count_eigenvalues_below(const TridiagonalMatrix& t, double lambda);

/// All eigenvalues, ascending, by Sturm bisection.
/// Throws std::invalid_argument unless every product super*sub is > 0
/// (order 1 is accepted).
std::vector<double> eigenvalues(const TridiagonalMatrix& t);

/// Pivots of the top-down and bottom-up eliminations of T (at shift 0) and
/// the twist row r where they meet best. Row r of the twisted factorization
/// leaves the residual `gamma`; every other row is solved exactly.
struct TwistedPivots {
    std::vector<double> forward;  // forward[j]  = a_j - b_{j-1} c_{j-1} / forward[j-1]
    std::vector<double> backward; // backward[j] = a_j - b_j c_j / backward[j+1]
    std::size_t twist = 0;
    double gamma = 0.0;           // forward[r] + backward[r] - a_r
};

TwistedPivots twisted_pivots(const TridiagonalMatrix& t);

/// Unit null vector of an unreduced singular tridiagonal matrix, with
/// v[0] > 0. Ratios v_k / v_{k-1} come from the forward pivots above the
/// twist row and the backward pivots below it, so components that decay by
/// many orders of magnitude are still resolved to full relative accuracy.
/// Throws NumericalError if the matrix is not singular to 1e-10 relative
/// or a component vanishes.
std::vector<double> null_vector(const TridiagonalMatrix& t);

/// D^{-1} T D with D = diag(d). Products super*sub are preserved.
TridiagonalMatrix diag_similarity(const TridiagonalMatrix& t, std::span<const double> d);

struct HouseholderTridiagonalization {
    TridiagonalMatrix tridiagonal;
    DenseMatrix transform; // H, with H^T A H = tridiagonal and H e_1 = e_1
};

/// Householder reduction of a symmetric matrix to tridiagonal form.
HouseholderTridiagonalization householder_tridiagonalize(const DenseMatrix& a);

} // namespace syncforge
