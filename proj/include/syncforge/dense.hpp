#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace syncforge {

/// Small row-major dense matrix.
///
/// Only used for verification computations and for the Householder
/// intermediates of the inverse-eigenvalue construction, so it favors
/// clarity over speed.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    DenseMatrix transpose() const;
    std::vector<double> multiply(std::span<const double> x) const;

    /// Max absolute row sum.
    double norm_inf() const;
    bool is_symmetric(double tol = 0.0) const;

    friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
    friend DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Kronecker product a ⊗ b.
DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, sorted
/// ascending. Limited to n <= 256; intended as a verification oracle.
std::vector<double> jacobi_eigenvalues(const DenseMatrix& a);

} // namespace syncforge
