#include "mimocov/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "mimocov/errors.hpp"

namespace mimocov {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& a) {
  json entries = json::array();
  for (const auto& x : a.entries()) entries.push_back({x.real(), x.imag()});
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"entries", std::move(entries)}};
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries")) {
    throw ConfigError("matrix: expected {\"rows\", \"cols\", \"entries\"}");
  }
  if (!j["rows"].is_number_unsigned() || !j["cols"].is_number_unsigned()) {
    throw ConfigError("matrix: rows and cols must be non-negative integers");
  }
  const auto rows = j["rows"].get<std::size_t>();
  const auto cols = j["cols"].get<std::size_t>();
  const auto& e = j["entries"];
  if (!e.is_array() || e.size() != rows * cols) {
    throw ConfigError("matrix: expected " + std::to_string(rows * cols) + " entries");
  }
  std::vector<Complex> entries;
  entries.reserve(e.size());
  for (const auto& x : e) {
    if (x.is_number()) {
      entries.emplace_back(x.get<double>(), 0.0);
    } else if (x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number()) {
      entries.emplace_back(x[0].get<double>(), x[1].get<double>());
    } else {
      throw ConfigError("matrix: entries must be [re, im] pairs");
    }
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const std::vector<SlotRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.t << ',' << format_double(r.r) << ',' << format_double(r.runavg_r) << ',' << format_double(r.tr_q) << ','
        << format_double(r.runavg_tr_q) << ',';
    if (r.z) out << format_double(*r.z);
    out << '\n';
  }
}

void write_reference_csv(std::ostream& out, const std::vector<double>& reference) {
  out << kReferenceCsvHeader << '\n';
  double sum = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    sum += reference[t];
    out << t << ',' << format_double(reference[t]) << ',' << format_double(sum / static_cast<double>(t + 1)) << '\n';
  }
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
T parse_field(std::string_view s, std::size_t line_no) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad field \"" + std::string(s) + "\"");
  }
  return value;
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ConfigError("csv: expected header \"" + std::string(header) + "\"");
  }
}

}  // namespace

std::vector<SlotRecord> read_csv(std::istream& in) {
  expect_header(in, kCsvHeader);
  std::vector<SlotRecord> records;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 6) throw ConfigError("csv line " + std::to_string(line_no) + ": expected 6 fields");
    SlotRecord r;
    r.t = parse_field<std::size_t>(f[0], line_no);
    r.r = parse_field<double>(f[1], line_no);
    r.runavg_r = parse_field<double>(f[2], line_no);
    r.tr_q = parse_field<double>(f[3], line_no);
    r.runavg_tr_q = parse_field<double>(f[4], line_no);
    if (!f[5].empty()) r.z = parse_field<double>(f[5], line_no);
    records.push_back(r);
  }
  return records;
}

std::vector<double> read_reference_csv(std::istream& in) {
  expect_header(in, kReferenceCsvHeader);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) throw ConfigError("reference csv line " + std::to_string(line_no) + ": expected 3 fields");
    out.push_back(parse_field<double>(f[1], line_no));
  }
  return out;
}

json bounds_to_json(const BoundReport& b) {
  json j = {{"b", b.inputs.b},
            {"delta", b.inputs.delta},
            {"epsilon", b.epsilon},
            {"phi_delta", b.phi_delta},
            {"psi_delta", b.psi_delta},
            {"queue_bound", b.queue_bound},
            {"grad_bound", b.grad_bound}};
  if (const auto* d = std::get_if<DppTuning>(&b.tuning)) {
    j["tuning"] = {{"type", "dpp"}, {"v", d->v}};
  } else if (const auto* o = std::get_if<OgdConstantTuning>(&b.tuning)) {
    j["tuning"] = {{"type", "ogd"}, {"gamma", o->gamma}};
  } else {
    j["tuning"] = {{"type", "ogd"}, {"step", "inverse-sqrt"}};
  }
  return j;
}

json summary_to_json(const RunSummary& s) {
  json j;
  j["name"] = s.name;
  j["controller"] = s.controller;
  j["horizon"] = s.horizon;
  j["seed"] = s.seed;
  j["p"] = s.p;
  j["p_bar"] = s.p_bar;
  j["z0"] = s.z0;
  j["final_avg_r"] = s.final_avg_r;
  j["final_avg_tr_q"] = s.final_avg_tr_q;
  j["final_z"] = s.final_z ? json(*s.final_z) : json(nullptr);
  j["channel_bounds"] = {{"b", s.channel_bounds.b},
                         {"delta", s.channel_bounds.delta},
                         {"unbounded_support", s.channel_bounds.unbounded_support}};
  j["bounds"] = s.bounds ? bounds_to_json(*s.bounds) : json(nullptr);
  j["reference_r"] = s.reference_r ? json(*s.reference_r) : json(nullptr);
  if (s.ledger) {
    const auto& l = *s.ledger;
    j["rate_adapt"] = {{"n_total", l.n_total},
                       {"completed_at", l.completed_at ? json(*l.completed_at) : json(nullptr)},
                       {"overhead", l.overhead},
                       {"relative_overhead", l.relative_overhead},
                       {"decode_ok", l.decode_ok}};
  } else {
    j["rate_adapt"] = nullptr;
  }
  json certs = json::array();
  for (const auto& c : s.certificates) {
    certs.push_back({{"name", c.name},
                     {"hard", c.hard},
                     {"applicable", c.applicable},
                     {"passed", c.passed},
                     {"worst_margin", c.worst_margin},
                     {"first_violation", c.first_violation ? json(*c.first_violation) : json(nullptr)},
                     {"detail", c.detail}});
  }
  j["certificates"] = std::move(certs);
  j["all_hard_passed"] = s.all_hard_passed();
  return j;
}

std::string line_chart_svg(const std::string& title, const std::string& y_label, const std::vector<Series>& series) {
  constexpr double kW = 720, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
  constexpr std::size_t kMaxPoints = 1200;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto x_of = [&](std::size_t t) { return kLeft + (n > 1 ? pw * static_cast<double>(t) / static_cast<double>(n - 1) : 0.0); };
  auto y_of = [&](double v) { return kTop + ph * (hi - v) / (hi - lo); };

  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
     << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const double y = y_of(v);
    os << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << format_double(std::round(v * 1e4) / 1e4)
       << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const auto t = static_cast<std::size_t>(std::llround(static_cast<double>(n > 0 ? n - 1 : 0) * k / 4.0));
    os << "<text x=\"" << x_of(t) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">slot t</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + ph / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& vals = series[s].values;
    const char* color = kColors[s % std::size(kColors)];
    const std::size_t stride = std::max<std::size_t>(1, (vals.size() + kMaxPoints - 1) / kMaxPoints);
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < vals.size(); t += stride) {
      if (std::isfinite(vals[t])) os << x_of(t) << ',' << y_of(vals[t]) << ' ';
    }
    if (!vals.empty() && (vals.size() - 1) % stride != 0 && std::isfinite(vals.back())) {
      os << x_of(vals.size() - 1) << ',' << y_of(vals.back());
    }
    os << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(s);
    os << "<line x1=\"" << kLeft + pw - 170 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw - 150 << "\" y2=\""
       << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kLeft + pw - 145 << "\" y=\"" << ly << "\">" << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

json policy_to_json(const BaselinePolicy& p) {
  json states = json::array();
  for (const auto& s : p.states) states.push_back(matrix_to_json(s));
  json covs = json::array();
  for (const auto& q : p.covariances) covs.push_back(matrix_to_json(q));
  return {{"kind", to_string(p.kind)},
          {"r_opt", p.r_opt},
          {"lambda", p.lambda},
          {"states", std::move(states)},
          {"covariances", std::move(covs)}};
}

BaselinePolicy policy_from_json(const json& j) {
  BaselinePolicy p;
  try {
    p.kind = parse_baseline_kind(j.at("kind").get<std::string>());
    p.r_opt = j.at("r_opt").get<double>();
    p.lambda = j.value("lambda", 0.0);
    for (const auto& s : j.at("states")) p.states.push_back(matrix_from_json(s));
    for (const auto& q : j.at("covariances")) p.covariances.push_back(matrix_from_json(q));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("policy: ") + e.what());
  }
  if (p.covariances.empty()) throw ConfigError("policy: no covariances");
  if (p.constant() ? p.covariances.size() != 1 : p.covariances.size() != p.states.size()) {
    throw ConfigError("policy: states and covariances disagree in length");
  }
  return p;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace mimocov
