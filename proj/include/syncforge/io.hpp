#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "syncforge/dynamics.hpp"
#include "syncforge/msf.hpp"
#include "syncforge/synthesis.hpp"
#include "syncforge/tridiag.hpp"

namespace syncforge::io {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

// Laplacian as {n, diag[], sub[], super[]}.
nlohmann::json to_json(const TridiagonalMatrix& t);
TridiagonalMatrix tridiagonal_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SynthesisReport& r);
nlohmann::json to_json(const std::vector<NegativeInterval>& intervals);
std::vector<NegativeInterval> intervals_from_json(const nlohmann::json& j);

/// MatrixMarket "coordinate real general", 1-based, nonzeros only.
void write_matrix_market(std::ostream& os, const TridiagonalMatrix& t);
TridiagonalMatrix read_matrix_market(std::istream& is);

/// Header `t,sync_error`.
void write_sync_csv(std::ostream& os, const SyncSeries& s);
/// Header `t,x_1_1,...,x_N_n`; requires recorded states.
void write_state_csv(std::ostream& os, const SyncSeries& s, std::size_t dim);
/// Header `eta,msf`; failed points are written as `nan`.
void write_msf_csv(std::ostream& os, const MsfCurve& c);

nlohmann::json read_json_file(const std::filesystem::path& p);
void write_json_file(const std::filesystem::path& p, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& p, const std::string& text);

} // namespace syncforge::io
