#include "syncforge/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace syncforge {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be positive");
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) {
        throw std::invalid_argument("DenseMatrix: dimensions must be positive");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("DenseMatrix: ragged initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
    DenseMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        m(i, i) = d[i];
    }
    return m;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t(j, i) = (*this)(i, j);
        }
    }
    return t;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
    if (x.size() != cols_) {
        throw std::invalid_argument("DenseMatrix::multiply: dimension mismatch");
    }
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            s += (*this)(i, j) * x[j];
        }
        y[i] = s;
    }
    return y;
}

double DenseMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            s += std::abs((*this)(i, j));
        }
        best = std::max(best, s);
    }
    return best;
}

bool DenseMatrix::is_symmetric(double tol) const {
    if (!is_square()) {
        return false;
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = i + 1; j < cols_; ++j) {
            if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) {
                return false;
            }
        }
    }
    return true;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) {
        throw std::invalid_argument("DenseMatrix product: dimension mismatch");
    }
    DenseMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols_; ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
        throw std::invalid_argument("DenseMatrix difference: dimension mismatch");
    }
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) {
        c.data_[i] -= b.data_[i];
    }
    return c;
}

DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            for (std::size_t p = 0; p < b.rows(); ++p) {
                for (std::size_t q = 0; q < b.cols(); ++q) {
                    k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
                }
            }
        }
    }
    return k;
}

std::vector<double> jacobi_eigenvalues(const DenseMatrix& a) {
    if (!a.is_square()) {
        throw std::invalid_argument("jacobi_eigenvalues: matrix must be square");
    }
    const std::size_t n = a.rows();
    if (n > 256) {
        throw std::invalid_argument("jacobi_eigenvalues: order limited to 256");
    }
    if (!a.is_symmetric(1e-12 * std::max(1.0, a.norm_inf()))) {
        throw std::invalid_argument("jacobi_eigenvalues: matrix must be symmetric");
    }

    DenseMatrix m = a;
    double total = 0.0;
    for (double x : m.data()) {
        total += x * x;
    }
    const double target = 1e-30 * std::max(total, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                off += 2.0 * m(i, j) * m(i, j);
            }
        }
        if (off <= target) {
            break;
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) {
                    continue;
                }
                // Rotation annihilating m(p, q) (Rutishauser's formulas).
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }

    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = m(i, i);
    }
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace syncforge
