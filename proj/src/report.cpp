// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/report.hpp"

#include <cstdio>
#include <filesystem>

#include "lenslab/errors.hpp"

namespace lenslab {

std::string report_to_string(const Report& report) {
  Json j;
  j["kind"] = "lenslab-report";
  j["command"] = report.command;
  j["config"] = report.config;
  j["payload"] = report.payload;
  return dump_json(j, 2) + "\n";
}

Report report_from_string(const std::string& text) {
  Json j = parse_json(text);
  Report r;
  try {
    require_data(j.at("kind").get<std::string>() == "lenslab-report",
                 "not a report file");
    r.command = j.at("command").get<std::string>();
    r.config = j.at("config");
    r.payload = j.at("payload");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad report file: ") + e.what());
  }
  return r;
}

std::string write_report(const std::string& dir, const std::string& stem,
                         const Report& report) {
  std::filesystem::create_directories(dir);
  const std::string path =
      (std::filesystem::path(dir) / (stem + ".report.json")).string();
  write_text_file(path, report_to_string(report));
  return path;
}

Report load_report(const std::string& path) {
  return report_from_string(read_text_file(path));
}

namespace {

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string csv_to_string(const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += csv_escape(header[i]);
  }
  out.push_back('\n');
  for (const auto& row : rows) {
    require_data(row.size() == header.size(),
                 "csv: row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += csv_escape(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  write_text_file(path, csv_to_string(header, rows));
}

std::string csv_real(double v) { return fmt_real(v); }

std::string csv_opt_real(const Json& v) {
  if (v.is_null()) return "unresolved";
  return fmt_real(v.get<double>());
}

std::string table_cell(double critical, double accuracy_pct) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f / %.2f", critical, accuracy_pct);
  return buf;
}

}  // namespace lenslab
