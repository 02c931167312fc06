#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "syncforge/msf.hpp"

namespace syncforge {

struct EigenvalueConfig {
    std::string strategy = "linear"; // linear | chebyshev | explicit
    double lo = 1.0;
    double hi = 10.0;
    bool from_msf = false;           // take [lo, hi] from a negative MSF interval
    std::string intervals_path;      // default: <out_dir>/intervals.json
    std::vector<double> values;      // explicit spectrum, including the leading 0
};

struct CouplingConfig {
    std::string source = "synthesized"; // synthesized | diffusive | bidiagonal
    double sigma = 1.0;                 // diffusive strength
    double lambda = 2.0;                // bidiagonal eigenvalue
    std::string laplacian_path;         // load instead of constructing (.json or .mtx)
};

struct IntegratorConfig {
    double h = 1e-3;
    double t_end = 300.0;
    std::size_t sample_stride = 100;
    bool record_states = false;
    bool all_pairs = false;
};

struct PerturbationConfig {
    double variance = 1.0;
    std::uint64_t seed = 1;
    double warmup_time = 100.0; // single-agent transient before perturbing
};

struct MsfConfig {
    double eta_min = 0.0;
    double eta_max = 0.5;
    double eta_step = 0.01;
    LyapunovSettings lyapunov;
};

/// One experiment manifest. Every field has a model-dependent default, so a
/// JSON document only needs the fields it changes.
struct ExperimentConfig {
    std::string model = "van_der_pol";
    std::size_t agents = 32;
    EigenvalueConfig eigenvalues;
    CouplingConfig coupling;
    IntegratorConfig integrator;
    PerturbationConfig perturbation;
    MsfConfig msf;
    std::string out_dir = "out";
    bool predict_rate = true;
    std::string msf_curve_path; // optional msf.csv used to predict the decay rate

    static ExperimentConfig defaults_for(std::string_view model);

    /// Throws std::invalid_argument on values outside module preconditions.
    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);

/// Overlays `j` onto defaults_for(j["model"]). Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

} // namespace syncforge
