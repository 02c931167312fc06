#include "syncforge/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace syncforge::io {

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

nlohmann::json to_json(const TridiagonalMatrix& t) {
    nlohmann::json j;
    j["n"] = t.order();
    j["diag"] = std::vector<double>(t.diag().begin(), t.diag().end());
    j["sub"] = std::vector<double>(t.sub().begin(), t.sub().end());
    j["super"] = std::vector<double>(t.super().begin(), t.super().end());
    return j;
}

TridiagonalMatrix tridiagonal_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("n") || !j.contains("diag") || !j.contains("sub") || !j.contains("super")) {
        throw std::invalid_argument("Laplacian JSON must contain n, diag, sub and super");
    }
    const auto n = j.at("n").get<std::size_t>();
    auto diag = j.at("diag").get<std::vector<double>>();
    if (diag.size() != n) {
        throw std::invalid_argument("Laplacian JSON: diag length does not match n");
    }
    return TridiagonalMatrix(std::move(diag), j.at("sub").get<std::vector<double>>(),
                             j.at("super").get<std::vector<double>>());
}

nlohmann::json to_json(const SynthesisReport& r) {
    return {
        {"alphas", r.alphas},
        {"similarity", r.similarity},
        {"null_vec", r.null_vec},
        {"row_sum_residual", r.row_sum_residual},
        {"spectral_residual", r.spectral_residual},
        {"offdiag_sign_ok", r.offdiag_sign_ok},
        {"diag_positive_ok", r.diag_positive_ok},
        {"max_abs_entry", r.max_abs_entry},
        {"max_abs_offdiag", r.max_abs_offdiag},
    };
}

nlohmann::json to_json(const std::vector<NegativeInterval>& intervals) {
    auto j = nlohmann::json::array();
    for (const auto& iv : intervals) {
        j.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
    }
    return j;
}

std::vector<NegativeInterval> intervals_from_json(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw std::invalid_argument("intervals JSON must be an array");
    }
    std::vector<NegativeInterval> out;
    for (const auto& e : j) {
        out.push_back({e.at("lo").get<double>(), e.at("hi").get<double>(), false});
    }
    return out;
}

void write_matrix_market(std::ostream& os, const TridiagonalMatrix& t) {
    const std::size_t n = t.order();
    std::size_t nnz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = (i == 0 ? 0 : i - 1); j <= std::min(n - 1, i + 1); ++j) {
            nnz += t(i, j) != 0.0;
        }
    }
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << n << ' ' << n << ' ' << nnz << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = (i == 0 ? 0 : i - 1); j <= std::min(n - 1, i + 1); ++j) {
            if (t(i, j) != 0.0) {
                os << i + 1 << ' ' << j + 1 << ' ' << format_double(t(i, j)) << '\n';
            }
        }
    }
}

TridiagonalMatrix read_matrix_market(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0) {
        throw std::invalid_argument("MatrixMarket: expected 'coordinate real general' header");
    }
    while (std::getline(is, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream dims(line);
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!(dims >> rows >> cols >> nnz) || rows != cols || rows == 0) {
        throw std::invalid_argument("MatrixMarket: bad size line");
    }
    std::vector<double> diag(rows, 0.0), sub(rows - 1, 0.0), super(rows - 1, 0.0);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t i = 0, j = 0;
        std::string value;
        if (!(is >> i >> j >> value) || i < 1 || j < 1 || i > rows || j > rows) {
            throw std::invalid_argument("MatrixMarket: bad entry line");
        }
        double v = 0.0;
        const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
            throw std::invalid_argument("MatrixMarket: bad numeric value '" + value + "'");
        }
        --i;
        --j;
        if (i == j) {
            diag[i] = v;
        } else if (j == i + 1) {
            super[i] = v;
        } else if (i == j + 1) {
            sub[j] = v;
        } else {
            throw std::invalid_argument("MatrixMarket: entry outside the tridiagonal band");
        }
    }
    return TridiagonalMatrix(std::move(diag), std::move(sub), std::move(super));
}

void write_sync_csv(std::ostream& os, const SyncSeries& s) {
    os << "t,sync_error\n";
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        os << format_double(s.times[i]) << ',' << format_double(s.sync_error[i]) << '\n';
    }
}

void write_state_csv(std::ostream& os, const SyncSeries& s, std::size_t dim) {
    if (s.states.size() != s.times.size()) {
        throw std::invalid_argument("write_state_csv: series has no recorded states");
    }
    if (s.states.empty()) {
        os << "t\n";
        return;
    }
    const std::size_t agents = s.states.front().size() / dim;
    os << 't';
    for (std::size_t i = 1; i <= agents; ++i) {
        for (std::size_t k = 1; k <= dim; ++k) {
            os << ",x_" << i << '_' << k;
        }
    }
    os << '\n';
    for (std::size_t r = 0; r < s.times.size(); ++r) {
        os << format_double(s.times[r]);
        for (double v : s.states[r]) {
            os << ',' << format_double(v);
        }
        os << '\n';
    }
}

void write_msf_csv(std::ostream& os, const MsfCurve& c) {
    os << "eta,msf\n";
    for (std::size_t i = 0; i < c.etas.size(); ++i) {
        os << format_double(c.etas[i]) << ',' << format_double(c.values[i]) << '\n';
    }
}

nlohmann::json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) {
        throw std::invalid_argument("cannot open " + p.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in " + p.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& p, const nlohmann::json& j) {
    write_text_file(p, j.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    out << text;
}

} // namespace syncforge::io
