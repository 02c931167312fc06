#include "syncforge/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "syncforge/io.hpp"

namespace syncforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ostream& out(const RunContext& ctx) {
    static std::ostream null_stream(nullptr);
    return ctx.log ? *ctx.log : null_stream;
}

fs::path intervals_file(const ExperimentConfig& c) {
    return c.eigenvalues.intervals_path.empty() ? fs::path(c.out_dir) / "intervals.json"
                                                : fs::path(c.eigenvalues.intervals_path);
}

std::string sync_csv_text(const SyncSeries& s) {
    std::ostringstream os;
    io::write_sync_csv(os, s);
    return os.str();
}

json nullable(double x) {
    return std::isfinite(x) ? json(x) : json(nullptr);
}

ExitCode worst(ExitCode a, ExitCode b) {
    return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

} // namespace

unsigned threads_from_env() {
    const char* v = std::getenv("SYNCFORGE_THREADS");
    if (v == nullptr) {
        return 0;
    }
    unsigned n = 0;
    const std::string_view s(v);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() ? n : 0;
}

SpectrumSpec configured_spectrum(const ExperimentConfig& c) {
    const auto& e = c.eigenvalues;
    if (e.strategy == "explicit") {
        return SpectrumSpec(e.values);
    }
    double lo = e.lo;
    double hi = e.hi;
    if (e.from_msf) {
        const auto path = intervals_file(c);
        if (!fs::exists(path)) {
            throw std::invalid_argument("eigenvalues.from_msf: " + path.string() + " not found; run 'msf' first");
        }
        const auto intervals = io::intervals_from_json(io::read_json_file(path));
        if (intervals.empty()) {
            throw NoNegativeInterval("the MSF has no negative interval (" + path.string() +
                                     "); refusing to derive a spectrum from it");
        }
        const auto widest = std::max_element(intervals.begin(), intervals.end(), [](const auto& a, const auto& b) {
            return a.hi - a.lo < b.hi - b.lo;
        });
        lo = widest->lo;
        hi = widest->hi;
    }
    return place_eigenvalues(parse_placement(e.strategy), lo, hi, c.agents - 1);
}

TridiagonalMatrix load_laplacian(const fs::path& p) {
    if (p.extension() == ".mtx") {
        std::ifstream in(p);
        if (!in) {
            throw std::invalid_argument("cannot open " + p.string());
        }
        return io::read_matrix_market(in);
    }
    return io::tridiagonal_from_json(io::read_json_file(p));
}

TridiagonalMatrix build_coupling(const ExperimentConfig& c) {
    if (!c.coupling.laplacian_path.empty()) {
        auto l = load_laplacian(c.coupling.laplacian_path);
        if (l.order() != c.agents) {
            throw std::invalid_argument("coupling.laplacian_path: matrix order " + std::to_string(l.order()) +
                                        " does not match agents = " + std::to_string(c.agents));
        }
        return l;
    }
    if (c.coupling.source == "diffusive") {
        return diffusive_laplacian(c.coupling.sigma, c.agents).laplacian.matrix();
    }
    if (c.coupling.source == "bidiagonal") {
        return bidiagonal_optimal_laplacian(c.coupling.lambda, c.agents);
    }
    return synthesize(configured_spectrum(c)).laplacian.matrix();
}

std::vector<double> coupling_spectrum(const TridiagonalMatrix& l) {
    const auto prods = l.off_products();
    if (std::all_of(prods.begin(), prods.end(), [](double p) { return p > 0.0; })) {
        return eigenvalues(l);
    }
    if (std::all_of(prods.begin(), prods.end(), [](double p) { return p == 0.0; })) {
        std::vector<double> d(l.diag().begin(), l.diag().end());
        std::sort(d.begin(), d.end());
        return d;
    }
    throw std::invalid_argument("coupling_spectrum: mixed-sign off-diagonal products (spectrum may be complex)");
}

double fit_decay_rate(const SyncSeries& s) {
    if (s.sync_error.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double start_level = 0.1 * s.sync_error.front();
    std::size_t begin = s.sync_error.size();
    for (std::size_t i = 0; i < s.sync_error.size(); ++i) {
        if (s.sync_error[i] < start_level) {
            begin = i;
            break;
        }
    }
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t count = 0;
    for (std::size_t i = begin; i < s.sync_error.size(); ++i) {
        const double e = s.sync_error[i];
        if (!(e > 0.0)) {
            break;
        }
        const double t = s.times[i];
        const double y = std::log(e);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++count;
        if (e <= 1e-10) {
            break;
        }
    }
    if (count < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double n = static_cast<double>(count);
    const double denom = n * stt - st * st;
    return denom > 0.0 ? (n * sty - st * sy) / denom : std::numeric_limits<double>::quiet_NaN();
}

std::optional<double> first_time_below(const SyncSeries& s, double level) {
    for (std::size_t i = 0; i < s.sync_error.size(); ++i) {
        if (s.sync_error[i] < level) {
            return s.times[i];
        }
    }
    return std::nullopt;
}

MsfCurve read_msf_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in) {
        throw std::invalid_argument("cannot open " + p.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "eta,msf") {
        throw std::invalid_argument(p.string() + ": expected header 'eta,msf'");
    }
    MsfCurve c;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument(p.string() + ": malformed row '" + line + "'");
        }
        c.etas.push_back(std::stod(line.substr(0, comma)));
        c.values.push_back(std::stod(line.substr(comma + 1)));
    }
    c.convergence.assign(c.etas.size(), std::numeric_limits<double>::quiet_NaN());
    c.errors.assign(c.etas.size(), std::string());
    c.negative_intervals = negative_intervals(c);
    return c;
}

double predicted_rate(const OscillatorModel& model, std::span<const double> spectrum, const LyapunovSettings& settings,
                      const MsfCurve* curve, unsigned threads) {
    double scale = 0.0;
    for (double x : spectrum) {
        scale = std::max(scale, std::abs(x));
    }
    std::vector<double> etas;
    for (double x : spectrum) {
        if (std::abs(x) <= 1e-9 * scale) {
            continue;
        }
        if (etas.empty() || x - etas.back() > 1e-9 * scale) {
            etas.push_back(x);
        }
    }
    if (etas.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }

    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> direct;
    for (double eta : etas) {
        if (curve != nullptr && curve->etas.size() >= 2 && eta >= curve->etas.front() && eta <= curve->etas.back()) {
            const auto it = std::upper_bound(curve->etas.begin(), curve->etas.end(), eta);
            const std::size_t j = std::min<std::size_t>(it - curve->etas.begin(), curve->etas.size() - 1);
            const std::size_t i = j - 1;
            const double w = (eta - curve->etas[i]) / (curve->etas[j] - curve->etas[i]);
            best = std::max(best, (1.0 - w) * curve->values[i] + w * curve->values[j]);
        } else {
            direct.push_back(eta);
        }
    }
    if (!direct.empty()) {
        const auto scan = msf_scan(model, direct, settings, threads);
        for (double v : scan.values) {
            if (std::isnan(v)) {
                return std::numeric_limits<double>::quiet_NaN();
            }
            best = std::max(best, v);
        }
    }
    return best;
}

ExitCode cmd_msf(const ExperimentConfig& c, const RunContext& ctx) {
    c.validate();
    const auto model = make_model(c.model);
    const auto grid = eta_grid(c.msf.eta_min, c.msf.eta_max, c.msf.eta_step);
    out(ctx) << "msf: " << model.name << ", " << grid.size() << " grid points on [" << c.msf.eta_min << ", "
             << c.msf.eta_max << "]\n";
    const auto curve = msf_scan(model, grid, c.msf.lyapunov, ctx.threads);

    std::ostringstream csv;
    io::write_msf_csv(csv, curve);
    const fs::path dir(c.out_dir);
    io::write_text_file(dir / "msf.csv", csv.str());
    io::write_json_file(dir / "intervals.json", io::to_json(curve.negative_intervals));

    for (std::size_t i = 0; i < curve.errors.size(); ++i) {
        if (!curve.errors[i].empty()) {
            out(ctx) << "msf: eta=" << curve.etas[i] << " failed: " << curve.errors[i] << '\n';
        }
    }
    if (curve.negative_intervals.empty()) {
        out(ctx) << "msf: no negative interval on the grid\n";
        return ExitCode::no_negative_interval;
    }
    for (const auto& iv : curve.negative_intervals) {
        out(ctx) << "msf: negative on [" << iv.lo << ", " << iv.hi << "]" << (iv.open_right ? " (open right)" : "")
                 << '\n';
    }
    return ExitCode::ok;
}

ExitCode cmd_synthesize(const ExperimentConfig& c, const RunContext& ctx) {
    c.validate();
    std::optional<SpectrumSpec> spec;
    try {
        spec = configured_spectrum(c);
    } catch (const NoNegativeInterval& e) {
        out(ctx) << "synthesize: " << e.what() << '\n';
        return ExitCode::no_negative_interval;
    }

    const auto ipath = intervals_file(c);
    if (!c.eigenvalues.from_msf && fs::exists(ipath)) {
        const auto intervals = io::intervals_from_json(io::read_json_file(ipath));
        for (std::size_t k = 1; k < spec->size(); ++k) {
            const double v = (*spec)[k];
            const bool inside =
                std::any_of(intervals.begin(), intervals.end(), [v](const auto& iv) { return v >= iv.lo && v <= iv.hi; });
            if (!inside) {
                out(ctx) << "synthesize: warning: eigenvalue " << v << " lies outside every negative MSF interval\n";
                break;
            }
        }
    }

    std::optional<SynthesisResult> result;
    try {
        result = synthesize(*spec);
    } catch (const SynthesisError& e) {
        out(ctx) << "synthesize: stage " << to_string(e.stage()) << " failed: " << e.what() << '\n';
        return ExitCode::numerical;
    }

    const fs::path dir(c.out_dir);
    const auto& l = result->laplacian.matrix();
    io::write_json_file(dir / "laplacian.json", io::to_json(l));
    std::ostringstream mtx;
    io::write_matrix_market(mtx, l);
    io::write_text_file(dir / "laplacian.mtx", mtx.str());

    // Re-load what was written and verify it independently of the in-memory result.
    const auto reloaded = load_laplacian(dir / "laplacian.json");
    const auto check = check_laplacian(reloaded, *spec);

    json report = io::to_json(result->report);
    report["n"] = l.order();
    report["spectrum"] = std::vector<double>(spec->values().begin(), spec->values().end());
    report["verified"] = check.ok();
    report["symmetric"] = l.is_symmetric();
    io::write_json_file(dir / "report.json", report);

    out(ctx) << "synthesize: N=" << l.order() << " max |entry| = " << result->report.max_abs_entry
             << " (off-diagonal " << result->report.max_abs_offdiag << "), row-sum residual "
             << result->report.row_sum_residual << ", spectral residual " << result->report.spectral_residual << '\n';
    if (!check.ok()) {
        out(ctx) << "synthesize: written Laplacian failed verification\n";
        return ExitCode::numerical;
    }
    return ExitCode::ok;
}

ExitCode cmd_simulate(const ExperimentConfig& c, const RunContext& ctx) {
    c.validate();
    const auto model = make_model(c.model);
    std::optional<TridiagonalMatrix> l;
    try {
        l = build_coupling(c);
    } catch (const NoNegativeInterval& e) {
        out(ctx) << "simulate: " << e.what() << '\n';
        return ExitCode::no_negative_interval;
    } catch (const SynthesisError& e) {
        out(ctx) << "simulate: synthesis stage " << to_string(e.stage()) << " failed: " << e.what() << '\n';
        return ExitCode::numerical;
    }

    const NetworkSystem sys(model, *l);
    const auto point = attractor_warmup(model, model.default_state, c.perturbation.warmup_time, c.integrator.h);
    const auto x0 = perturbed_sync_ic(point, c.agents, c.perturbation.variance, c.perturbation.seed);

    SimulationOptions opts;
    opts.h = c.integrator.h;
    opts.t_end = c.integrator.t_end;
    opts.sample_stride = c.integrator.sample_stride;
    opts.record_states = c.integrator.record_states;
    opts.all_pairs = c.integrator.all_pairs;
    out(ctx) << "simulate: " << model.name << " N=" << c.agents << " coupling=" << c.coupling.source
             << " t_end=" << opts.t_end << " h=" << opts.h << '\n';
    const auto series = simulate_network(sys, x0, opts);

    const fs::path dir(c.out_dir);
    io::write_text_file(dir / "sync.csv", sync_csv_text(series));
    if (opts.record_states) {
        std::ostringstream os;
        io::write_state_csv(os, series, model.dim);
        io::write_text_file(dir / "states.csv", os.str());
    }

    json summary;
    summary["model"] = model.name;
    summary["agents"] = c.agents;
    summary["coupling"] = c.coupling.source;
    if (!c.coupling.laplacian_path.empty()) {
        summary["laplacian_path"] = c.coupling.laplacian_path;
    }
    summary["t_end"] = opts.t_end;
    summary["h"] = opts.h;
    summary["final_sync_error"] = nullable(series.sync_error.back());
    summary["min_sync_error"] = nullable(*std::min_element(series.sync_error.begin(), series.sync_error.end()));
    const double rate = fit_decay_rate(series);
    summary["fitted_decay_rate"] = nullable(rate);
    const auto below = first_time_below(series, 1e-8);
    summary["time_below_1e-8"] = below ? json(*below) : json(nullptr);
    summary["max_abs_entry"] = l->max_abs_entry();
    summary["blew_up"] = series.blew_up;
    summary["failure_time"] = series.blew_up ? json(series.failure_time) : json(nullptr);
    if (series.blew_up) {
        summary["failure"] = series.failure;
    }
    if (c.predict_rate) {
        std::optional<MsfCurve> curve;
        if (!c.msf_curve_path.empty()) {
            curve = read_msf_csv(c.msf_curve_path);
        }
        const auto spectrum = coupling_spectrum(*l);
        const double predicted =
            predicted_rate(model, spectrum, c.msf.lyapunov, curve ? &*curve : nullptr, ctx.threads);
        summary["predicted_rate"] = nullable(predicted);
    }
    io::write_json_file(dir / "summary.json", summary);

    out(ctx) << "simulate: final sync error " << series.sync_error.back() << ", fitted decay rate " << rate << '\n';
    if (series.blew_up) {
        out(ctx) << "simulate: blow-up at t=" << series.failure_time << '\n';
        return ExitCode::numerical;
    }
    return ExitCode::ok;
}

std::vector<std::string> preset_names() {
    return {"vdp32", "vdp64", "vdp128", "rossler64", "rossler_feasibility", "sym3x3"};
}

namespace {

struct Variant {
    std::string name;
    std::string source;    // synthesized | bidiagonal
    std::string strategy;  // for synthesized
    double lo = 0.0;
    double hi = 0.0;
    double lambda = 0.0;   // for bidiagonal
};

ExitCode run_network_preset(const std::string& model, std::size_t agents, double t_end,
                            const std::vector<Variant>& variants, bool with_msf, const ExperimentConfig& base,
                            const fs::path& root, const RunContext& ctx) {
    ExitCode status = ExitCode::ok;
    fs::path curve_path;
    if (with_msf) {
        auto mc = ExperimentConfig::defaults_for(model);
        mc.out_dir = (root / "msf").string();
        mc.msf.lyapunov.seed = base.msf.lyapunov.seed;
        status = worst(status, cmd_msf(mc, ctx));
        curve_path = root / "msf" / "msf.csv";
    }

    json summary = json::object();
    for (const auto& v : variants) {
        auto c = ExperimentConfig::defaults_for(model);
        c.agents = agents;
        c.out_dir = (root / v.name).string();
        c.integrator.t_end = t_end;
        c.perturbation.seed = base.perturbation.seed;
        c.coupling.source = v.source;
        c.coupling.lambda = v.lambda > 0.0 ? v.lambda : c.coupling.lambda;
        if (v.source == "synthesized") {
            c.eigenvalues.strategy = v.strategy;
            c.eigenvalues.lo = v.lo;
            c.eigenvalues.hi = v.hi;
            status = worst(status, cmd_synthesize(c, ctx));
            c.coupling.laplacian_path = (fs::path(c.out_dir) / "laplacian.json").string();
        }
        if (!curve_path.empty()) {
            c.msf_curve_path = curve_path.string();
        }
        io::write_json_file(fs::path(c.out_dir) / "config.json", to_json(c));
        status = worst(status, cmd_simulate(c, ctx));
        summary[v.name] = io::read_json_file(fs::path(c.out_dir) / "summary.json");
    }
    io::write_json_file(root / "summary.json", summary);
    return status;
}

ExitCode rossler_feasibility_table(const fs::path& root, const RunContext& ctx) {
    constexpr double lo = 0.19;
    constexpr double hi = 4.61;
    std::ostringstream csv;
    csv << "n,eigen_ratio,interval_ratio,feasible,sigma_lo,sigma_hi,required_sigma\n";
    std::optional<std::size_t> first_infeasible;
    for (std::size_t n = 2; n <= 16; ++n) {
        const auto f = diffusive_feasibility(lo, hi, n);
        csv << n << ',' << io::format_double(f.eigen_ratio) << ',' << io::format_double(f.interval_ratio) << ','
            << (f.feasible ? 1 : 0) << ',' << io::format_double(f.sigma_lo) << ',' << io::format_double(f.sigma_hi)
            << ',' << io::format_double(required_sigma(lo, n)) << '\n';
        if (!f.feasible && !first_infeasible) {
            first_infeasible = n;
        }
    }
    io::write_text_file(root / "feasibility.csv", csv.str());
    json s = {{"interval", {lo, hi}},
              {"first_infeasible_n", first_infeasible ? json(*first_infeasible) : json(nullptr)},
              {"max_feasible_n", first_infeasible ? json(*first_infeasible - 1) : json(nullptr)}};
    io::write_json_file(root / "summary.json", s);
    out(ctx) << "rossler_feasibility: first infeasible N = " << (first_infeasible ? *first_infeasible : 0) << '\n';
    return ExitCode::ok;
}

ExitCode sym3x3_table(const fs::path& root, const RunContext& ctx) {
    std::ostringstream csv;
    csv << "lambda2,lambda3,feasible,boundary,x1,y1,x2,y2\n";
    json boundary = json::array();
    for (int i = 1; i <= 20; ++i) {
        for (int j = i + 1; j <= 40; ++j) {
            const double l2 = 0.25 * i;
            const double l3 = 0.25 * j;
            const auto r = symmetric_3x3_feasible(l2, l3);
            csv << io::format_double(l2) << ',' << io::format_double(l3) << ',' << (r.feasible ? 1 : 0) << ','
                << (r.boundary ? 1 : 0);
            for (std::size_t k = 0; k < 2; ++k) {
                if (k < r.solutions.size()) {
                    csv << ',' << io::format_double(r.solutions[k].first) << ','
                        << io::format_double(r.solutions[k].second);
                } else if (k == 1 && r.boundary) {
                    csv << ',' << io::format_double(r.solutions[0].first) << ','
                        << io::format_double(r.solutions[0].second);
                } else {
                    csv << ",,";
                }
            }
            csv << '\n';
            if (r.boundary) {
                boundary.push_back({l2, l3});
            }
        }
    }
    io::write_text_file(root / "classification.csv", csv.str());
    const auto unit = symmetric_3x3_feasible(1.0, 3.0);
    json s = {{"boundary_cases", boundary},
              {"case_1_3", {{"feasible", unit.feasible}, {"boundary", unit.boundary}}},
              {"case_1_2", {{"feasible", symmetric_3x3_feasible(1.0, 2.0).feasible}}}};
    io::write_json_file(root / "summary.json", s);
    out(ctx) << "sym3x3: (1,3) feasible=" << unit.feasible << " boundary=" << unit.boundary << '\n';
    return ExitCode::ok;
}

} // namespace

ExitCode cmd_reproduce(std::string_view preset, const ExperimentConfig& base, const RunContext& ctx) {
    const fs::path root = fs::path(base.out_dir) / std::string(preset);
    fs::create_directories(root);
    if (preset == "vdp32") {
        return run_network_preset("van_der_pol", 32, 300.0,
                                  {{"linear", "synthesized", "linear", 1.0, 10.0, 0.0},
                                   {"chebyshev", "synthesized", "chebyshev", 1.0, 10.0, 0.0}},
                                  true, base, root, ctx);
    }
    if (preset == "vdp64") {
        return run_network_preset("van_der_pol", 64, 400.0,
                                  {{"linear", "synthesized", "linear", 1.0, 10.0, 0.0},
                                   {"chebyshev", "synthesized", "chebyshev", 1.0, 10.0, 0.0},
                                   {"bidiagonal_2", "bidiagonal", "", 0.0, 0.0, 2.0},
                                   {"bidiagonal_8", "bidiagonal", "", 0.0, 0.0, 8.0}},
                                  false, base, root, ctx);
    }
    if (preset == "vdp128") {
        return run_network_preset("van_der_pol", 128, 600.0,
                                  {{"chebyshev_1_50", "synthesized", "chebyshev", 1.0, 50.0, 0.0},
                                   {"chebyshev_1_10", "synthesized", "chebyshev", 1.0, 10.0, 0.0},
                                   {"linear_1_10", "synthesized", "linear", 1.0, 10.0, 0.0},
                                   {"bidiagonal_2", "bidiagonal", "", 0.0, 0.0, 2.0}},
                                  false, base, root, ctx);
    }
    if (preset == "rossler64") {
        return run_network_preset("rossler", 64, 300.0,
                                  {{"linear", "synthesized", "linear", 0.5, 3.0, 0.0},
                                   {"chebyshev", "synthesized", "chebyshev", 0.5, 3.0, 0.0}},
                                  true, base, root, ctx);
    }
    if (preset == "rossler_feasibility") {
        return rossler_feasibility_table(root, ctx);
    }
    if (preset == "sym3x3") {
        return sym3x3_table(root, ctx);
    }
    throw std::invalid_argument("unknown preset '" + std::string(preset) + "'");
}

ExitCode cmd_verify(const fs::path& laplacian, const std::optional<fs::path>& spectrum, const RunContext& ctx) {
    const auto l = load_laplacian(laplacian);
    std::optional<SpectrumSpec> expected;
    if (spectrum) {
        const auto j = io::read_json_file(*spectrum);
        const auto& values = j.is_object() ? j.at("spectrum") : j;
        expected = SpectrumSpec(values.get<std::vector<double>>());
    }
    const auto check = check_laplacian(l, expected);
    auto& os = out(ctx);
    os << "verify: " << laplacian.string() << " (N=" << l.order() << ")\n";
    os << "  off-diagonals negative: " << (check.offdiag_negative ? "yes" : "no") << '\n';
    os << "  diagonal positive:      " << (check.diag_positive ? "yes" : "no") << '\n';
    os << "  row-sum residual:       " << check.row_sum_residual << (check.row_sums_ok ? "" : " (too large)") << '\n';
    os << "  real spectrum:          " << (check.real_spectrum ? "yes" : "no") << '\n';
    if (check.spectral_residual) {
        os << "  spectral residual:      " << *check.spectral_residual << '\n';
    }
    os << "  spectrum ok:            " << (check.spectrum_ok ? "yes" : "no") << '\n';
    os << (check.ok() ? "verify: OK\n" : "verify: FAILED\n");
    return check.ok() ? ExitCode::ok : ExitCode::numerical;
}

} // namespace syncforge
