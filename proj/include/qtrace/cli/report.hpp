// Copyright 2026 The qtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qtrace/cli/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtrace::cli {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One output row. Missing values (e.g. no oracle above its size cap) are NaN.
struct ResultRow {
  std::string quantity;
  int order = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double exact_value = std::numeric_limits<double>::quiet_NaN();
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  std::string mode;
  std::uint64_t shots = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;

  bool operator==(const ResultRow& o) const {
    auto same = [](double a, double b) {
      return (std::isnan(a) && std::isnan(b)) || a == b;
    };
    return quantity == o.quantity && order == o.order && same(estimate, o.estimate) &&
           same(std_error, o.std_error) && same(exact_value, o.exact_value) &&
           same(rel_error, o.rel_error) && mode == o.mode && shots == o.shots &&
           trials == o.trials && seed == o.seed && same(wall_ms, o.wall_ms);
  }
};

inline constexpr const char* kCsvHeader =
    "quantity,order,estimate,std_error,exact_value,rel_error,mode,shots,trials,seed,wall_ms";

/// %.17g, which round-trips every double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

inline std::string json_number(double x) {
  return std::isfinite(x) ? format_double(x) : std::string("null");
}

inline std::string render_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.quantity) << ',' << r.order << ',' << format_double(r.estimate) << ','
        << format_double(r.std_error) << ',' << format_double(r.exact_value) << ','
        << format_double(r.rel_error) << ',' << csv_field(r.mode) << ',' << r.shots << ','
        << r.trials << ',' << r.seed << ',' << format_double(r.wall_ms) << '\n';
  }
  return out.str();
}

inline std::string render_json(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << (i == 0 ? "\n  " : ",\n  ") << "{\"quantity\": " << json_string(r.quantity)
        << ", \"order\": " << r.order << ", \"estimate\": " << json_number(r.estimate)
        << ", \"std_error\": " << json_number(r.std_error)
        << ", \"exact_value\": " << json_number(r.exact_value)
        << ", \"rel_error\": " << json_number(r.rel_error) << ", \"mode\": " << json_string(r.mode)
        << ", \"shots\": " << r.shots << ", \"trials\": " << r.trials << ", \"seed\": " << r.seed
        << ", \"wall_ms\": " << json_number(r.wall_ms) << "}";
  }
  out << (rows.empty() ? "]\n" : "\n]\n");
  return out.str();
}

inline std::string render(const std::vector<ResultRow>& rows, OutputFormat fmt) {
  return fmt == OutputFormat::kCsv ? render_csv(rows) : render_json(rows);
}

/// Writes the table to `path`, or to stdout for "-".
inline void emit_table(const std::vector<ResultRow>& rows, OutputFormat fmt, const std::string& path) {
  const std::string text = render(rows, fmt);
  if (path == "-" || path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot open output path '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw OutputError("failed writing output path '" + path + "'");
}

/// Inverse of render_json; null numbers come back as NaN.
inline std::vector<ResultRow> parse_table_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  std::vector<ResultRow> rows;
  for (const auto& o : j) {
    ResultRow r;
    r.quantity = o.at("quantity").get<std::string>();
    r.order = o.at("order").get<int>();
    r.estimate = num(o.at("estimate"));
    r.std_error = num(o.at("std_error"));
    r.exact_value = num(o.at("exact_value"));
    r.rel_error = num(o.at("rel_error"));
    r.mode = o.at("mode").get<std::string>();
    r.shots = o.at("shots").get<std::uint64_t>();
    r.trials = o.at("trials").get<std::uint64_t>();
    r.seed = o.at("seed").get<std::uint64_t>();
    r.wall_ms = num(o.at("wall_ms"));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace qtrace::cli
