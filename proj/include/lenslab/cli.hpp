// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lenslab/interventions.hpp"
#include "lenslab/report.hpp"

namespace lenslab {

struct RunEntry {
  std::string name;
  std::string model;
  std::string corpus;
};

// Everything a pipeline command can be configured with. Each report embeds
// the fields its command used, so a run is reproducible from the report
// alone (plus the referenced input files).
struct RunConfig {
  std::string model_path;
  std::string corpus_path;
  std::string out_dir;
  double alpha = kDefaultAlpha;
  int position = -1;
  bool full_vocab = false;
  std::vector<double> lambdas = default_lambda_grid();
  std::size_t gap = kDefaultGap;
  std::size_t probe_n = 100;
  std::uint64_t split_seed = 42;
  std::vector<std::uint64_t> random_seeds = {1, 2, 3, 4, 5};
  std::vector<RunEntry> runs;        // rq3 model/corpus pairs
  std::vector<std::string> inputs;   // report-merge sources

  Json to_json(const std::string& command) const;
  static RunConfig from_json(const Json& j);
};

PlantSpec plant_spec_from_json(const Json& j);
Json plant_spec_to_json(const PlantSpec& plant, const std::string& scheme_name);

// Subcommand bodies. The rq commands write <stem>.report.json, <stem>.csv
// and <stem>.svg under cfg.out_dir and return the report.
void cmd_gen_model(const std::string& plant_path, const std::string& out_path,
                   const std::string& cert_path = "");
void cmd_gen_corpus(const std::string& plant_path, const std::string& scheme,
                    const std::string& format, std::size_t n,
                    std::uint64_t seed, std::size_t audio_len,
                    const std::string& out_path);
Report cmd_rq1(const RunConfig& cfg);
Report cmd_rq2(const RunConfig& cfg);
Report cmd_rq3(const RunConfig& cfg);
Report cmd_rq4(const RunConfig& cfg);
Report cmd_rq5(const RunConfig& cfg);
Report cmd_report_merge(const RunConfig& cfg);

struct RerunResult {
  Report report;
  bool payload_matches = false;
};

// Re-executes a report's embedded config into out_dir and compares the new
// payload byte-for-byte against the original.
RerunResult cmd_rerun(const std::string& report_path,
                      const std::string& out_dir);

// Full command-line front door. Exit codes: 0 success, 2 config error,
// 3 data error, 4 numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace lenslab
