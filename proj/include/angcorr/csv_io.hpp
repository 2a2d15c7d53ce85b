#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "angcorr/errors.hpp"
#include "angcorr/types.hpp"
#include "angcorr/units.hpp"

// Plain-text I/O: comma-separated tables with '#' header lines, and flat
// key = value configuration files.

namespace angcorr::io {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// At most `digits` significant digits; used for angles converted from radians,
/// where the last bits are conversion noise.
inline std::string format_rounded(double v, int digits = 15) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Manifest = std::vector<std::pair<std::string, std::string>>;

inline void write_manifest(std::ostream& os, const Manifest& manifest) {
  for (const auto& [k, v] : manifest) os << "# " << k << ": " << v << '\n';
}

/// Rows of optional numbers under named columns, plus the "# key: value" lines.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
  std::map<std::string, std::string> meta;
  std::vector<std::size_t> row_lines;  ///< 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  }
};

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(std::string_view field, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || field.empty()) {
    throw ParseError(source, line, "not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, "non-finite value: '" + std::string(field) + "'");
  return v;
}

inline Table read_table(std::istream& in, const std::string& source) {
  Table t;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        t.meta[std::string(trim(body.substr(0, colon)))] = std::string(trim(body.substr(colon + 1)));
      }
      continue;
    }
    const auto fields = split_commas(line);
    if (!have_header) {
      for (auto f : fields) {
        if (f.empty()) throw ParseError(source, line_no, "empty column name");
        t.columns.emplace_back(f);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(t.columns.size()) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(fields.size());
    for (auto f : fields) {
      if (f.empty()) {
        row.emplace_back();
      } else {
        row.emplace_back(parse_number(f, source, line_no));
      }
    }
    t.rows.push_back(std::move(row));
    t.row_lines.push_back(line_no);
  }
  if (!have_header) throw ParseError(source, line_no == 0 ? 1 : line_no, "no header line");
  return t;
}

inline Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_table(in, path);
}

namespace detail {

inline double required(const Table& t, std::size_t row, std::size_t col, const std::string& source) {
  if (!t.rows[row][col]) {
    throw ParseError(source, t.row_lines[row], "missing value in column '" + t.columns[col] + "'");
  }
  return *t.rows[row][col];
}

}  // namespace detail

/// Columns theta_deg, C and optionally sigma.
inline TabulatedCorrelation correlation_from_table(const Table& t, const std::string& source) {
  const auto ct = t.column("theta_deg");
  const auto cv = t.column("C");
  if (!ct || !cv) throw ParseError(source, 1, "correlation table needs columns theta_deg and C");
  const auto cs = t.column("sigma");
  TabulatedCorrelation out;
  if (cs) out.sigma.emplace();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.theta.push_back(deg_to_rad(detail::required(t, r, *ct, source)));
    out.values.push_back(detail::required(t, r, *cv, source));
    if (cs) out.sigma->push_back(detail::required(t, r, *cs, source));
    if (r > 0 && !(out.theta[r] > out.theta[r - 1])) {
      throw ParseError(source, t.row_lines[r], "theta_deg must be strictly increasing");
    }
  }
  if (out.theta.empty()) throw ParseError(source, 1, "no data rows");
  try {
    out.validate();
  } catch (const DomainError& e) {
    throw ParseError(source, t.row_lines.front(), e.what());
  }
  return out;
}

inline void write_correlation(std::ostream& os, const TabulatedCorrelation& c, const Manifest& manifest) {
  write_manifest(os, manifest);
  os << (c.sigma ? "theta_deg,C,sigma\n" : "theta_deg,C\n");
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << format_rounded(rad_to_deg(c.theta[i])) << ',' << format_double(c.values[i]);
    if (c.sigma) os << ',' << format_double((*c.sigma)[i]);
    os << '\n';
  }
}

/// Columns ell,C_ell (multipole) or k,P_k (frequency).
inline PowerSpectrum spectrum_from_table(const Table& t, const std::string& source) {
  PowerSpectrum out;
  std::optional<std::size_t> cg, cv;
  if (t.column("ell")) {
    out.kind = GridKind::Multipole;
    cg = t.column("ell");
    cv = t.column("C_ell");
  } else if (t.column("k")) {
    out.kind = GridKind::Frequency;
    cg = t.column("k");
    cv = t.column("P_k");
  }
  if (!cg || !cv) throw ParseError(source, 1, "spectrum table needs columns ell,C_ell or k,P_k");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.grid.push_back(detail::required(t, r, *cg, source));
    out.values.push_back(detail::required(t, r, *cv, source));
    if (r > 0 && !(out.grid[r] > out.grid[r - 1])) {
      throw ParseError(source, t.row_lines[r], "grid must be strictly increasing");
    }
  }
  if (out.grid.empty()) throw ParseError(source, 1, "no data rows");
  try {
    out.validate();
  } catch (const DomainError& e) {
    throw ParseError(source, t.row_lines.front(), e.what());
  }
  return out;
}

inline void write_spectrum(std::ostream& os, const PowerSpectrum& s, const Manifest& manifest) {
  write_manifest(os, manifest);
  const bool multipole = s.kind == GridKind::Multipole;
  os << "# grid: " << (multipole ? "multipole" : "frequency") << '\n';
  os << (multipole ? "ell,C_ell\n" : "k,P_k\n");
  for (std::size_t i = 0; i < s.size(); ++i) os << format_double(s.grid[i]) << ',' << format_double(s.values[i]) << '\n';
}

/// Flat "key = value" lines; '#' starts a comment.  Duplicate keys are errors.
using Config = std::map<std::string, std::string>;

inline Config read_config(std::istream& in, const std::string& source) {
  Config cfg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    if (!cfg.emplace(key, value).second) throw ParseError(source, line_no, "duplicate key '" + key + "'");
  }
  return cfg;
}

inline Config read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  return read_config(in, path);
}

}  // namespace angcorr::io
