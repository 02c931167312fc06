#include "syncforge/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <stdexcept>

#include "syncforge/dynamics.hpp"

namespace syncforge {

using nlohmann::json;

ExperimentConfig ExperimentConfig::defaults_for(std::string_view model_name) {
    const OscillatorModel model = make_model(model_name);
    ExperimentConfig c;
    c.model = model.name;
    c.perturbation.warmup_time = model.default_warmup;
    c.msf.lyapunov = LyapunovSettings::defaults_for(model);
    if (model.name == "rossler") {
        c.agents = 64;
        c.eigenvalues.lo = 0.5;
        c.eigenvalues.hi = 3.0;
        c.msf.eta_min = 0.0;
        c.msf.eta_max = 5.0;
        c.msf.eta_step = 0.05;
    }
    return c;
}

void ExperimentConfig::validate() const {
    (void)make_model(model);
    if (agents < 2) {
        throw std::invalid_argument("config: agents must be >= 2");
    }
    if (eigenvalues.strategy == "explicit") {
        if (eigenvalues.values.size() != agents) {
            throw std::invalid_argument("config: explicit eigenvalue list must have one value per agent");
        }
    } else if (eigenvalues.strategy != "linear" && eigenvalues.strategy != "chebyshev") {
        throw std::invalid_argument("config: eigenvalues.strategy must be linear, chebyshev or explicit");
    } else if (!eigenvalues.from_msf && !(eigenvalues.lo > 0.0 && eigenvalues.hi > eigenvalues.lo)) {
        throw std::invalid_argument("config: eigenvalue interval must satisfy 0 < lo < hi");
    }
    if (coupling.source != "synthesized" && coupling.source != "diffusive" && coupling.source != "bidiagonal") {
        throw std::invalid_argument("config: coupling.source must be synthesized, diffusive or bidiagonal");
    }
    if (!(coupling.sigma > 0.0) || !(coupling.lambda > 0.0)) {
        throw std::invalid_argument("config: coupling sigma and lambda must be positive");
    }
    if (!(integrator.h > 0.0) || !(integrator.t_end > 0.0) || integrator.sample_stride < 1) {
        throw std::invalid_argument("config: integrator needs h > 0, t_end > 0 and sample_stride >= 1");
    }
    if (!(perturbation.variance >= 0.0) || !(perturbation.warmup_time >= 0.0)) {
        throw std::invalid_argument("config: perturbation variance and warmup_time must be >= 0");
    }
    if (!(msf.eta_step > 0.0) || !(msf.eta_min >= 0.0) || !(msf.eta_max >= msf.eta_min)) {
        throw std::invalid_argument("config: MSF grid needs 0 <= eta_min <= eta_max and eta_step > 0");
    }
    msf.lyapunov.validate();
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["model"] = c.model;
    j["agents"] = c.agents;
    j["eigenvalues"] = {{"strategy", c.eigenvalues.strategy}, {"lo", c.eigenvalues.lo},
                        {"hi", c.eigenvalues.hi},             {"from_msf", c.eigenvalues.from_msf},
                        {"intervals_path", c.eigenvalues.intervals_path}, {"values", c.eigenvalues.values}};
    j["coupling"] = {{"source", c.coupling.source},
                     {"sigma", c.coupling.sigma},
                     {"lambda", c.coupling.lambda},
                     {"laplacian_path", c.coupling.laplacian_path}};
    j["integrator"] = {{"h", c.integrator.h},
                       {"t_end", c.integrator.t_end},
                       {"sample_stride", c.integrator.sample_stride},
                       {"record_states", c.integrator.record_states},
                       {"all_pairs", c.integrator.all_pairs}};
    j["perturbation"] = {{"variance", c.perturbation.variance},
                         {"seed", c.perturbation.seed},
                         {"warmup_time", c.perturbation.warmup_time}};
    const auto& l = c.msf.lyapunov;
    j["msf"] = {{"eta_min", c.msf.eta_min},
                {"eta_max", c.msf.eta_max},
                {"eta_step", c.msf.eta_step},
                {"warmup_time", l.warmup_time},
                {"total_time", l.total_time},
                {"renorm_interval", l.renorm_interval},
                {"h", l.h},
                {"seed", l.seed},
                {"initial_state", l.initial_state}};
    j["out_dir"] = c.out_dir;
    j["predict_rate"] = c.predict_rate;
    j["msf_curve_path"] = c.msf_curve_path;
    return j;
}

namespace {

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) {
        throw std::invalid_argument("config: '" + std::string(where) + "' must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw std::invalid_argument("config: unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <class T>
void take(const json& j, const char* key, T& field) {
    if (j.contains(key)) {
        field = j.at(key).get<T>();
    }
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j, "config",
                   {"model", "agents", "eigenvalues", "coupling", "integrator", "perturbation", "msf", "out_dir",
                    "predict_rate", "msf_curve_path"});
    try {
        ExperimentConfig c = ExperimentConfig::defaults_for(j.value("model", std::string("van_der_pol")));
        take(j, "agents", c.agents);
        take(j, "out_dir", c.out_dir);
        take(j, "predict_rate", c.predict_rate);
        take(j, "msf_curve_path", c.msf_curve_path);
        if (j.contains("eigenvalues")) {
            const auto& e = j["eigenvalues"];
            reject_unknown(e, "eigenvalues", {"strategy", "lo", "hi", "from_msf", "intervals_path", "values"});
            take(e, "strategy", c.eigenvalues.strategy);
            take(e, "lo", c.eigenvalues.lo);
            take(e, "hi", c.eigenvalues.hi);
            take(e, "from_msf", c.eigenvalues.from_msf);
            take(e, "intervals_path", c.eigenvalues.intervals_path);
            take(e, "values", c.eigenvalues.values);
        }
        if (j.contains("coupling")) {
            const auto& e = j["coupling"];
            reject_unknown(e, "coupling", {"source", "sigma", "lambda", "laplacian_path"});
            take(e, "source", c.coupling.source);
            take(e, "sigma", c.coupling.sigma);
            take(e, "lambda", c.coupling.lambda);
            take(e, "laplacian_path", c.coupling.laplacian_path);
        }
        if (j.contains("integrator")) {
            const auto& e = j["integrator"];
            reject_unknown(e, "integrator", {"h", "t_end", "sample_stride", "record_states", "all_pairs"});
            take(e, "h", c.integrator.h);
            take(e, "t_end", c.integrator.t_end);
            take(e, "sample_stride", c.integrator.sample_stride);
            take(e, "record_states", c.integrator.record_states);
            take(e, "all_pairs", c.integrator.all_pairs);
        }
        if (j.contains("perturbation")) {
            const auto& e = j["perturbation"];
            reject_unknown(e, "perturbation", {"variance", "seed", "warmup_time"});
            take(e, "variance", c.perturbation.variance);
            take(e, "seed", c.perturbation.seed);
            take(e, "warmup_time", c.perturbation.warmup_time);
        }
        if (j.contains("msf")) {
            const auto& e = j["msf"];
            reject_unknown(e, "msf",
                           {"eta_min", "eta_max", "eta_step", "warmup_time", "total_time", "renorm_interval", "h",
                            "seed", "initial_state"});
            take(e, "eta_min", c.msf.eta_min);
            take(e, "eta_max", c.msf.eta_max);
            take(e, "eta_step", c.msf.eta_step);
            take(e, "warmup_time", c.msf.lyapunov.warmup_time);
            take(e, "total_time", c.msf.lyapunov.total_time);
            take(e, "renorm_interval", c.msf.lyapunov.renorm_interval);
            take(e, "h", c.msf.lyapunov.h);
            take(e, "seed", c.msf.lyapunov.seed);
            take(e, "initial_state", c.msf.lyapunov.initial_state);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

} // namespace syncforge
