// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "lenslab/jsonio.hpp"

namespace lenslab {

// Self-describing run record: the command, the full configuration it ran
// with, and the numeric payload. Re-running the embedded config reproduces
// the payload bit-for-bit.
struct Report {
  std::string command;
  Json config;
  Json payload;
};

std::string report_to_string(const Report& report);
Report report_from_string(const std::string& text);

// Writes <dir>/<stem>.report.json and returns the path.
std::string write_report(const std::string& dir, const std::string& stem,
                         const Report& report);
Report load_report(const std::string& path);

// Minimal CSV writer. Real-valued cells must be produced with fmt_real so
// CSV and JSON payloads agree to the last digit.
std::string csv_to_string(const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Cell helpers.
std::string csv_real(double v);                  // fmt_real passthrough
std::string csv_opt_real(const Json& v);         // null -> "unresolved"
std::string table_cell(double critical, double accuracy_pct);  // "x.xx / y.yy"

}  // namespace lenslab
