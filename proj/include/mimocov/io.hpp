#pragma once

// File formats: matrix JSON, per-slot CSV, summary JSON, SVG charts and
// stored baseline policies.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mimocov/harness.hpp"
#include "mimocov/linalg.hpp"

namespace mimocov {

/// {"rows": m, "cols": n, "entries": [[re, im], ...]} in row-major order.
nlohmann::json matrix_to_json(const ComplexMatrix& a);
/// Throws ConfigError on schema violations.
ComplexMatrix matrix_from_json(const nlohmann::json& j);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

inline constexpr const char* kCsvHeader = "t,r,runavg_r,tr_q,runavg_tr_q,z";
inline constexpr const char* kReferenceCsvHeader = "t,r_ref,runavg_r_ref";

void write_csv(std::ostream& out, const std::vector<SlotRecord>& records);
void write_reference_csv(std::ostream& out, const std::vector<double>& reference);
/// Throws ConfigError on a malformed file.
std::vector<SlotRecord> read_csv(std::istream& in);
std::vector<double> read_reference_csv(std::istream& in);

nlohmann::json summary_to_json(const RunSummary& s);
nlohmann::json bounds_to_json(const BoundReport& b);

struct Series {
  std::string label;
  std::vector<double> values;
};

/// Self-contained SVG line chart; x is the slot index.
std::string line_chart_svg(const std::string& title, const std::string& y_label, const std::vector<Series>& series);

nlohmann::json policy_to_json(const BaselinePolicy& p);
BaselinePolicy policy_from_json(const nlohmann::json& j);

/// Write `text` to `path`, creating parent directories. Throws
/// std::runtime_error naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mimocov
