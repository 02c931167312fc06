#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncforge/config.hpp"
#include "syncforge/dynamics.hpp"
#include "syncforge/msf.hpp"
#include "syncforge/synthesis.hpp"

namespace syncforge {

/// Process exit codes of the command-line driver.
enum class ExitCode : int { ok = 0, usage = 1, no_negative_interval = 2, numerical = 3 };

struct RunContext {
    unsigned threads = 0; // 0: hardware concurrency
    std::ostream* log = nullptr;
};

/// Thread count from SYNCFORGE_THREADS, or 0 when unset or malformed.
unsigned threads_from_env();

/// Spectrum requested by the config. When eigenvalues.from_msf is set the
/// interval comes from the widest negative MSF interval on disk; an empty
/// interval list raises NoNegativeInterval.
SpectrumSpec configured_spectrum(const ExperimentConfig& c);

class NoNegativeInterval : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coupling matrix for the network: loaded, synthesized, diffusive or bidiagonal.
TridiagonalMatrix build_coupling(const ExperimentConfig& c);

/// Eigenvalues of a coupling matrix, ascending. Handles the triangular
/// (bidiagonal) case where the off-diagonal products vanish.
std::vector<double> coupling_spectrum(const TridiagonalMatrix& l);

/// Least-squares slope of log(sync_error) over the window that starts when
/// the error first drops below 10% of its initial value and ends when it
/// reaches 1e-10 or the run ends. NaN if fewer than two samples qualify.
double fit_decay_rate(const SyncSeries& s);

/// First sample time with sync_error below `level`, if any.
std::optional<double> first_time_below(const SyncSeries& s, double level);

/// Maximum MSF over the distinct nonzero eigenvalues. Uses `curve` by linear
/// interpolation when given, otherwise evaluates the exponent directly.
double predicted_rate(const OscillatorModel& model, std::span<const double> spectrum, const LyapunovSettings& settings,
                      const MsfCurve* curve, unsigned threads);

/// Reads an `eta,msf` CSV.
MsfCurve read_msf_csv(const std::filesystem::path& p);

ExitCode cmd_msf(const ExperimentConfig& c, const RunContext& ctx);
ExitCode cmd_synthesize(const ExperimentConfig& c, const RunContext& ctx);
ExitCode cmd_simulate(const ExperimentConfig& c, const RunContext& ctx);

/// Presets: vdp32, vdp64, vdp128, rossler64, rossler_feasibility, sym3x3.
/// Output goes to <out_dir>/<preset>/.
ExitCode cmd_reproduce(std::string_view preset, const ExperimentConfig& base, const RunContext& ctx);
std::vector<std::string> preset_names();

/// Re-checks a Laplacian file (.json or .mtx) against the structural
/// invariants and, if given, a target spectrum.
ExitCode cmd_verify(const std::filesystem::path& laplacian, const std::optional<std::filesystem::path>& spectrum,
                    const RunContext& ctx);

TridiagonalMatrix load_laplacian(const std::filesystem::path& p);

} // namespace syncforge
