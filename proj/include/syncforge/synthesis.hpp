#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "syncforge/error.hpp"
#include "syncforge/tridiag.hpp"

namespace syncforge {

/// Strictly increasing list of target eigenvalues.
class SpectrumSpec {
public:
    explicit SpectrumSpec(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    /// values[0] == 0 and every other value positive.
    bool is_laplacian() const noexcept;

    /// Largest |value|.
    double max_abs() const noexcept;

private:
    std::vector<double> values_;
};

enum class Placement { linear, chebyshev };

Placement parse_placement(std::string_view name);
std::string_view to_string(Placement p);

/// {0} followed by `count` points in [lo, hi]: equispaced (endpoints
/// included) or first-kind Chebyshev nodes mapped onto the interval.
SpectrumSpec place_eigenvalues(Placement strategy, double lo, double hi, std::size_t count);

/// Symmetric unreduced tridiagonal matrix with negative off-diagonal and
/// the given spectrum. `q` is the first row of the eigenvector matrix;
/// empty means e/sqrt(N).
TridiagonalMatrix diag2trid(const SpectrumSpec& spec, std::span<const double> q = {});

enum class Provenance { synthesized, diffusive, loaded };

std::string_view to_string(Provenance p);

/// A tridiagonal matrix known to be a connected path-graph Laplacian:
/// negative off-diagonals, positive diagonal, zero row sums.
class TridiagonalLaplacian {
public:
    /// Checks the structural invariants and throws NumericalError when
    /// they fail. Row sums are tested against row_sum_tol * ||L||_inf.
    TridiagonalLaplacian(TridiagonalMatrix matrix, Provenance provenance, double row_sum_tol = 1e-12);

    const TridiagonalMatrix& matrix() const noexcept { return matrix_; }
    Provenance provenance() const noexcept { return provenance_; }
    std::size_t order() const noexcept { return matrix_.order(); }

private:
    TridiagonalMatrix matrix_;
    Provenance provenance_;
};

struct SynthesisReport {
    std::vector<double> alphas;     // α_2..α_N
    std::vector<double> similarity; // D = diag(1, α_2, α_2 α_3, ...)
    std::vector<double> null_vec;   // D e / ||D e||, null vector of the symmetric input
    double row_sum_residual = 0.0;  // max |row sum| of L
    double spectral_residual = 0.0; // max |eig(L) - target|
    bool offdiag_sign_ok = false;
    bool diag_positive_ok = false;
    double max_abs_entry = 0.0;
    double max_abs_offdiag = 0.0;
};

struct SynthesisResult {
    TridiagonalLaplacian laplacian;
    SynthesisReport report;
};

/// Failure inside the synthesis pipeline, tagged with the failing stage.
class SynthesisError : public NumericalError {
public:
    enum class Stage { symmetric_tridiagonal, zero_row_sum };

    SynthesisError(Stage stage, const std::string& what) : NumericalError(what), stage_(stage) {}
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

std::string_view to_string(SynthesisError::Stage s);

/// Rebalances a singular symmetric unreduced tridiagonal matrix with
/// negative off-diagonals into L = D^{-1} S D with L e = 0.
SynthesisResult trid_zero_row_sum(const TridiagonalMatrix& s);

/// diag2trid followed by trid_zero_row_sum; spec must start at 0.
SynthesisResult synthesize(const SpectrumSpec& spec, std::span<const double> q = {});

struct DiffusiveCoupling {
    TridiagonalLaplacian laplacian;
    SpectrumSpec spectrum; // σ · 4 sin²((k-1)π / 2N)
};

DiffusiveCoupling diffusive_laplacian(double sigma, std::size_t n);

/// Closed-form eigenvalue k (0-based) of the unit-strength path Laplacian.
double diffusive_eigenvalue(std::size_t k, std::size_t n);

/// Upper bidiagonal Laplacian with eigenvalue 0 (null vector e) and λ of
/// algebraic multiplicity N-1. The last agent is uncoupled.
TridiagonalMatrix bidiagonal_optimal_laplacian(double lambda, std::size_t n);

struct Symmetric3x3 {
    bool feasible = false;
    bool boundary = false; // equality case, one double root
    std::vector<std::pair<double, double>> solutions; // (x, y)
};

/// Whether [[x,-x,0],[-x,x+y,-y],[0,-y,y]] can have spectrum {0, λ2, λ3}.
Symmetric3x3 symmetric_3x3_feasible(double lambda2, double lambda3);

DenseMatrix symmetric_3x3_matrix(double x, double y);

/// Verification of a candidate Laplacian, as used on files re-loaded from
/// disk. `expected` optionally pins the spectrum.
struct LaplacianCheck {
    bool finite = true;
    bool offdiag_negative = false;
    bool diag_positive = false;
    bool real_spectrum = false;
    double row_sum_residual = 0.0;
    bool row_sums_ok = false;
    std::vector<double> spectrum;
    std::optional<double> spectral_residual;
    bool spectrum_ok = false;

    bool ok() const noexcept {
        return finite && offdiag_negative && diag_positive && real_spectrum && row_sums_ok && spectrum_ok;
    }
};

LaplacianCheck check_laplacian(const TridiagonalMatrix& l, const std::optional<SpectrumSpec>& expected = std::nullopt,
                               double spectral_tol = 1e-9);

} // namespace syncforge
