// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/cli.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "lenslab/chart.hpp"
#include "lenslab/errors.hpp"

namespace lenslab {

namespace fs = std::filesystem;

namespace {

Json score_table_to_json(const ScoreTable& t) {
  Json j;
  j["position"] = t.position;
  j["subset"] = t.subset;
  j["alpha"] = t.alpha;
  j["chance"] = t.chance;
  j["n_samples"] = t.n_samples;
  j["info"] = t.info;
  j["contributions"] = std::vector<double>(t.contributions.begin() + 1,
                                           t.contributions.end());
  if (t.critical) {
    j["critical_layer"] = *t.critical;
  } else {
    j["critical_layer"] = nullptr;
  }
  j["accuracy"] = t.accuracy;
  return j;
}

Json layers_json(std::size_t n_layers) {
  std::vector<std::size_t> layers(n_layers + 1);
  for (std::size_t l = 0; l <= n_layers; ++l) layers[l] = l;
  return Json(layers);
}

struct LoadedPair {
  Model model;
  Corpus corpus;
};

LoadedPair load_pair(const std::string& model_path,
                     const std::string& corpus_path) {
  if (model_path.empty()) throw ConfigError("missing --model");
  if (corpus_path.empty()) throw ConfigError("missing --corpus");
  LoadedPair pair{load_planted(model_path).model, load_corpus(corpus_path)};
  require_data(pair.corpus.d_model == pair.model.spec.d_model,
               "corpus d_model does not match the model");
  for (TokenId id : pair.corpus.label_ids) {
    require_data(id < pair.model.spec.vocab_size,
                 "corpus label id outside the model vocabulary");
  }
  return pair;
}

void require_out(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("missing --out");
  fs::create_directories(cfg.out_dir);
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
  return (fs::path(cfg.out_dir) / file).string();
}

ChartSeries info_series(const std::string& name, const std::vector<double>& ys,
                        bool dashed = false) {
  ChartSeries s;
  s.name = name;
  s.dashed = dashed;
  s.points.reserve(ys.size());
  for (std::size_t l = 0; l < ys.size(); ++l) {
    s.points.push_back({static_cast<double>(l), ys[l], std::nullopt});
  }
  return s;
}

void emit_score_chart(const RunConfig& cfg, const std::string& stem,
                      const std::string& title,
                      const std::vector<ChartSeries>& series, double chance) {
  ChartSpec chart;
  chart.title = title;
  chart.x_label = "layer";
  chart.y_label = "information score";
  chart.series = series;
  chart.baseline = chance;
  write_line_chart(out_path(cfg, stem + ".svg"), chart);
}

}  // namespace

Json RunConfig::to_json(const std::string& command) const {
  Json j;
  j["out"] = out_dir;
  if (command == "rq3") {
    Json runs_j = Json::array();
    for (const RunEntry& e : runs) {
      runs_j.push_back(Json{{"name", e.name}, {"model", e.model},
                            {"corpus", e.corpus}});
    }
    j["runs"] = runs_j;
    j["alpha"] = alpha;
    return j;
  }
  if (command == "report-merge") {
    j["inputs"] = inputs;
    return j;
  }
  j["model"] = model_path;
  j["corpus"] = corpus_path;
  j["alpha"] = alpha;
  if (command == "rq1" || command == "rq2") {
    j["position"] = position;
    j["full_vocab"] = full_vocab;
  }
  if (command == "rq5") {
    j["lambdas"] = lambdas;
    j["gap"] = gap;
    j["probe_n"] = probe_n;
    j["split_seed"] = split_seed;
    j["random_seeds"] = random_seeds;
  }
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig cfg;
  try {
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("model")) cfg.model_path = j.at("model").get<std::string>();
    if (j.contains("corpus"))
      cfg.corpus_path = j.at("corpus").get<std::string>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("position")) cfg.position = j.at("position").get<int>();
    if (j.contains("full_vocab"))
      cfg.full_vocab = j.at("full_vocab").get<bool>();
    if (j.contains("lambdas"))
      cfg.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("gap")) cfg.gap = j.at("gap").get<std::size_t>();
    if (j.contains("probe_n"))
      cfg.probe_n = j.at("probe_n").get<std::size_t>();
    if (j.contains("split_seed"))
      cfg.split_seed = j.at("split_seed").get<std::uint64_t>();
    if (j.contains("random_seeds"))
      cfg.random_seeds = j.at("random_seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("runs")) {
      for (const Json& e : j.at("runs")) {
        cfg.runs.push_back(RunEntry{e.at("name").get<std::string>(),
                                    e.at("model").get<std::string>(),
                                    e.at("corpus").get<std::string>()});
      }
    }
    if (j.contains("inputs"))
      cfg.inputs = j.at("inputs").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  return cfg;
}

PlantSpec plant_spec_from_json(const Json& j) {
  PlantSpec plant;
  try {
    plant.base = model_spec_from_json(j.at("base"));
    plant.inject_layer = j.at("inject_layer").get<std::size_t>();
    if (j.contains("copy_gain"))
      plant.copy_gain = j.at("copy_gain").get<double>();
    if (j.contains("degrade_layer") && !j.at("degrade_layer").is_null()) {
      plant.degrade_layer = j.at("degrade_layer").get<std::size_t>();
    }
    if (j.contains("degrade_gain"))
      plant.degrade_gain = j.at("degrade_gain").get<double>();
    if (j.contains("degrade_fraction"))
      plant.degrade_fraction = j.at("degrade_fraction").get<double>();
    if (j.contains("beacon_scale"))
      plant.beacon_scale = j.at("beacon_scale").get<double>();
    if (j.contains("noise_scale"))
      plant.noise_scale = j.at("noise_scale").get<double>();
    if (j.contains("seed")) plant.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("label_alphabet")) {
      plant.label_alphabet =
          j.at("label_alphabet").get<std::vector<TokenId>>();
    } else if (j.contains("scheme")) {
      const AttributeScheme& scheme =
          scheme_by_name(j.at("scheme").get<std::string>());
      plant.label_alphabet = default_tokenizer().encode_all(scheme.labels);
    } else {
      throw ConfigError("plant spec needs label_alphabet or scheme");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad plant spec: ") + e.what());
  }
  return plant;
}

Json plant_spec_to_json(const PlantSpec& plant, const std::string& scheme_name) {
  Json j;
  j["base"] = model_spec_to_json(plant.base);
  j["inject_layer"] = plant.inject_layer;
  j["copy_gain"] = plant.copy_gain;
  if (plant.degrade_layer) {
    j["degrade_layer"] = *plant.degrade_layer;
  } else {
    j["degrade_layer"] = nullptr;
  }
  j["degrade_gain"] = plant.degrade_gain;
  j["degrade_fraction"] = plant.degrade_fraction;
  j["beacon_scale"] = plant.beacon_scale;
  j["noise_scale"] = plant.noise_scale;
  j["seed"] = plant.seed;
  if (!scheme_name.empty()) j["scheme"] = scheme_name;
  j["label_alphabet"] = plant.label_alphabet;
  return j;
}

void cmd_gen_model(const std::string& plant_path, const std::string& out_path,
                   const std::string& cert_path) {
  const PlantSpec plant = plant_spec_from_json(parse_json_file(plant_path));
  const PlantedModel pm = build_planted(plant);
  save_planted(out_path, pm);
  if (!cert_path.empty()) {
    write_text_file(cert_path,
                    dump_json(certificate_to_json(pm.certificate), 2) + "\n");
  }
}

void cmd_gen_corpus(const std::string& plant_path, const std::string& scheme,
                    const std::string& format, std::size_t n,
                    std::uint64_t seed, std::size_t audio_len,
                    const std::string& out_path) {
  const Json pj = parse_json_file(plant_path);
  const PlantSpec plant = plant_spec_from_json(pj);
  std::string scheme_name = scheme;
  if (scheme_name.empty() && pj.contains("scheme")) {
    scheme_name = pj.at("scheme").get<std::string>();
  }
  if (scheme_name.empty()) throw ConfigError("missing --scheme");
  const Corpus corpus =
      generate_corpus(scheme_by_name(scheme_name), format_from_name(format), n,
                      plant, seed, audio_len);
  save_corpus(out_path, corpus);
}

Report cmd_rq1(const RunConfig& cfg) {
  require_out(cfg);
  const LoadedPair pair = load_pair(cfg.model_path, cfg.corpus_path);
  const std::vector<Trace> traces = run_corpus(pair.model, pair.corpus);
  const ScoreTable table =
      build_score_table(pair.model, pair.corpus, traces, cfg.position,
                        cfg.alpha, !cfg.full_vocab);

  Report report;
  report.command = "rq1";
  report.config = cfg.to_json("rq1");
  report.payload["layers"] = layers_json(pair.model.spec.n_layers);
  report.payload["chance"] = table.chance;
  report.payload["table"] = score_table_to_json(table);
  write_report(cfg.out_dir, "rq1", report);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t l = 0; l < table.info.size(); ++l) {
    rows.push_back({std::to_string(l), csv_real(table.info[l]),
                    l == 0 ? "" : csv_real(table.contributions[l])});
  }
  write_csv(out_path(cfg, "rq1.csv"), {"layer", "info", "contribution"}, rows);
  emit_score_chart(cfg, "rq1", "information score by layer",
                   {info_series("I (position " + std::to_string(cfg.position) +
                                    ")",
                                table.info)},
                   table.chance);
  return report;
}

Report cmd_rq2(const RunConfig& cfg) {
  require_out(cfg);
  const LoadedPair pair = load_pair(cfg.model_path, cfg.corpus_path);
  const std::vector<Trace> traces = run_corpus(pair.model, pair.corpus);
  const ScoreTable all = build_score_table(pair.model, pair.corpus, traces,
                                           cfg.position, cfg.alpha,
                                           !cfg.full_vocab);
  const CorrectnessSplit split =
      split_by_correctness(pair.model, pair.corpus, traces);

  std::optional<ScoreTable> correct, incorrect;
  if (!split.correct.empty()) {
    correct = build_score_table_subset(pair.model, pair.corpus, traces,
                                       split.correct, "correct", cfg.position,
                                       cfg.alpha, !cfg.full_vocab);
  }
  if (!split.incorrect.empty()) {
    incorrect = build_score_table_subset(pair.model, pair.corpus, traces,
                                         split.incorrect, "incorrect",
                                         cfg.position, cfg.alpha,
                                         !cfg.full_vocab);
  }

  Report report;
  report.command = "rq2";
  report.config = cfg.to_json("rq2");
  report.payload["layers"] = layers_json(pair.model.spec.n_layers);
  report.payload["chance"] = all.chance;
  report.payload["accuracy"] = all.accuracy;
  report.payload["n_correct"] = split.correct.size();
  report.payload["n_incorrect"] = split.incorrect.size();
  report.payload["all"] = score_table_to_json(all);
  report.payload["correct"] =
      correct ? score_table_to_json(*correct) : Json(nullptr);
  report.payload["incorrect"] =
      incorrect ? score_table_to_json(*incorrect) : Json(nullptr);
  write_report(cfg.out_dir, "rq2", report);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t l = 0; l < all.info.size(); ++l) {
    rows.push_back({std::to_string(l), csv_real(all.info[l]),
                    correct ? csv_real(correct->info[l]) : "",
                    incorrect ? csv_real(incorrect->info[l]) : ""});
  }
  write_csv(out_path(cfg, "rq2.csv"),
            {"layer", "info_all", "info_correct", "info_incorrect"}, rows);

  std::vector<ChartSeries> series = {info_series("all", all.info)};
  if (correct) series.push_back(info_series("correct", correct->info));
  if (incorrect) series.push_back(info_series("incorrect", incorrect->info));
  emit_score_chart(cfg, "rq2", "information score by prediction outcome",
                   series, all.chance);
  return report;
}

Report cmd_rq3(const RunConfig& cfg) {
  require_out(cfg);
  require_data(cfg.runs.size() >= 3, "rq3 needs at least 3 model/corpus runs");

  Json entries = Json::array();
  std::vector<std::pair<std::optional<double>, double>> pairs;
  std::vector<ChartPoint> points;
  double chance = 0.0;
  for (const RunEntry& e : cfg.runs) {
    const LoadedPair pair = load_pair(e.model, e.corpus);
    const std::vector<Trace> traces = run_corpus(pair.model, pair.corpus);
    const ScoreTable table =
        build_score_table(pair.model, pair.corpus, traces, -1, cfg.alpha);
    if (chance == 0.0) chance = table.chance;
    pairs.emplace_back(table.critical, table.accuracy);
    Json entry;
    entry["name"] = e.name;
    entry["critical_layer"] =
        table.critical ? Json(*table.critical) : Json(nullptr);
    entry["accuracy"] = table.accuracy;
    entry["accuracy_pct"] = table.accuracy * 100.0;
    entry["cell"] = table.critical
                        ? table_cell(*table.critical, table.accuracy * 100.0)
                        : "unresolved / " + fmt_real(table.accuracy * 100.0);
    entries.push_back(entry);
    if (table.critical) {
      points.push_back({*table.critical, table.accuracy, std::nullopt});
    }
  }
  const CorrelationResult corr = correlation_study(pairs);

  Report report;
  report.command = "rq3";
  report.config = cfg.to_json("rq3");
  report.payload["entries"] = entries;
  report.payload["pearson_r"] = corr.r;
  report.payload["p_value"] = corr.p_value;
  report.payload["n_used"] = corr.n_used;
  report.payload["n_skipped"] = corr.n_skipped;
  write_report(cfg.out_dir, "rq3", report);

  std::vector<std::vector<std::string>> rows;
  for (const Json& e : entries) {
    rows.push_back({e.at("name").get<std::string>(),
                    csv_opt_real(e.at("critical_layer")),
                    csv_real(e.at("accuracy_pct").get<double>()),
                    e.at("cell").get<std::string>()});
  }
  write_csv(out_path(cfg, "rq3.csv"),
            {"name", "critical_layer", "accuracy_pct", "cell"}, rows);

  std::sort(points.begin(), points.end(),
            [](const ChartPoint& a, const ChartPoint& b) { return a.x < b.x; });
  ChartSpec chart;
  chart.title = "accuracy vs critical layer";
  chart.x_label = "critical layer";
  chart.y_label = "accuracy";
  chart.series = {{"runs", points, false}};
  chart.baseline = chance;
  write_line_chart(out_path(cfg, "rq3.svg"), chart);
  return report;
}

Report cmd_rq4(const RunConfig& cfg) {
  require_out(cfg);
  const LoadedPair pair = load_pair(cfg.model_path, cfg.corpus_path);
  const std::vector<Trace> plain = run_corpus(pair.model, pair.corpus);
  const std::vector<Trace> masked =
      run_corpus(pair.model, pair.corpus, {InterventionSpec::mask(-1)});

  const ScoreTable last =
      build_score_table(pair.model, pair.corpus, plain, -1, cfg.alpha);
  const ScoreTable penultimate =
      build_score_table(pair.model, pair.corpus, plain, -2, cfg.alpha);
  ScoreTable masked_last =
      build_score_table(pair.model, pair.corpus, masked, -1, cfg.alpha);
  masked_last.subset = "masked";

  Report report;
  report.command = "rq4";
  report.config = cfg.to_json("rq4");
  report.payload["layers"] = layers_json(pair.model.spec.n_layers);
  report.payload["chance"] = last.chance;
  report.payload["last"] = score_table_to_json(last);
  report.payload["penultimate"] = score_table_to_json(penultimate);
  report.payload["masked_last"] = score_table_to_json(masked_last);
  report.payload["accuracy_unmasked"] = last.accuracy;
  report.payload["accuracy_masked"] = masked_last.accuracy;
  report.payload["accuracy_drop"] = last.accuracy - masked_last.accuracy;
  write_report(cfg.out_dir, "rq4", report);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t l = 0; l < last.info.size(); ++l) {
    rows.push_back({std::to_string(l), csv_real(last.info[l]),
                    csv_real(penultimate.info[l]),
                    csv_real(masked_last.info[l])});
  }
  write_csv(out_path(cfg, "rq4.csv"),
            {"layer", "info_last", "info_penultimate", "info_masked_last"},
            rows);
  emit_score_chart(cfg, "rq4", "information score by token position",
                   {info_series("last", last.info),
                    info_series("penultimate", penultimate.info),
                    info_series("masked last", masked_last.info)},
                   last.chance);
  return report;
}

Report cmd_rq5(const RunConfig& cfg) {
  require_out(cfg);
  const LoadedPair pair = load_pair(cfg.model_path, cfg.corpus_path);
  const auto [probe, test] =
      split_probe_test(pair.corpus, cfg.probe_n, cfg.split_seed);
  const std::vector<Trace> probe_traces = run_corpus(pair.model, probe);

  const LayerSelection sel = select_enrichment_layer(
      pair.model, probe, probe_traces, SelectionRule::max_info_on_incorrect,
      cfg.gap);
  EnrichmentPlan plan;
  plan.selected_layer = sel.layer;
  plan.gap = cfg.gap;
  plan.lambdas = cfg.lambdas;
  const SweepResult informed = run_lambda_sweep(pair.model, test, plan);

  std::vector<std::size_t> random_layers;
  std::vector<std::vector<double>> random_accs;
  for (std::uint64_t seed : cfg.random_seeds) {
    const LayerSelection rsel = select_enrichment_layer(
        pair.model, probe, probe_traces, SelectionRule::random_layer, cfg.gap,
        seed);
    EnrichmentPlan rplan = plan;
    rplan.selected_layer = rsel.layer;
    random_layers.push_back(rsel.layer);
    random_accs.push_back(run_lambda_sweep(pair.model, test, rplan).accuracies);
  }
  std::vector<double> random_mean, random_std;
  for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
    Vector per_seed;
    for (const auto& accs : random_accs) per_seed.push_back(accs[i]);
    random_mean.push_back(mean_of(per_seed));
    random_std.push_back(per_seed.size() >= 2 ? sample_stddev(per_seed) : 0.0);
  }

  Report report;
  report.command = "rq5";
  report.config = cfg.to_json("rq5");
  Json& p = report.payload;
  p["chance"] = 1.0 / static_cast<double>(pair.corpus.label_ids.size());
  p["probe_n"] = probe.size();
  p["test_n"] = test.size();
  p["selected_layer"] = sel.layer;
  p["tied_at_chance"] = sel.tied_at_chance;
  p["gap"] = cfg.gap;
  p["lambdas"] = informed.lambdas;
  p["informed_accuracy"] = informed.accuracies;
  p["baseline"] = informed.baseline;
  p["best_lambda"] = informed.best_lambda;
  p["best_accuracy"] = informed.best_accuracy;
  p["relative_improvement"] = informed.relative_improvement
                                  ? Json(*informed.relative_improvement)
                                  : Json(nullptr);
  p["random_layers"] = random_layers;
  p["random_accuracy"] = random_accs;
  p["random_mean"] = random_mean;
  p["random_std"] = random_std;
  write_report(cfg.out_dir, "rq5", report);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < informed.lambdas.size(); ++i) {
    rows.push_back({csv_real(informed.lambdas[i]),
                    csv_real(informed.accuracies[i]),
                    csv_real(random_mean[i]), csv_real(random_std[i])});
  }
  write_csv(out_path(cfg, "rq5.csv"),
            {"lambda", "informed", "random_mean", "random_std"}, rows);

  ChartSeries inf_series{"informed", {}, false};
  ChartSeries rnd_series{"random mean", {}, true};
  for (std::size_t i = 0; i < informed.lambdas.size(); ++i) {
    inf_series.points.push_back(
        {informed.lambdas[i], informed.accuracies[i], std::nullopt});
    rnd_series.points.push_back(
        {informed.lambdas[i], random_mean[i], random_std[i]});
  }
  ChartSpec chart;
  chart.title = "enrichment accuracy by scale";
  chart.x_label = "lambda";
  chart.y_label = "accuracy";
  chart.series = {inf_series, rnd_series};
  chart.baseline = p["chance"].get<double>();
  write_line_chart(out_path(cfg, "rq5.svg"), chart);
  return report;
}

namespace {

struct MergeSeries {
  std::string x_label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::optional<double> chance;
};

MergeSeries primary_series(const Report& r) {
  MergeSeries m;
  const Json& p = r.payload;
  if (r.command == "rq5") {
    m.x_label = "lambda";
    m.xs = p.at("lambdas").get<std::vector<double>>();
    m.ys = p.at("informed_accuracy").get<std::vector<double>>();
    m.chance = p.at("chance").get<double>();
    return m;
  }
  if (r.command != "rq1" && r.command != "rq2" && r.command != "rq4") {
    throw DataError("report-merge: unsupported command " + r.command);
  }
  m.x_label = "layer";
  for (const Json& l : p.at("layers")) m.xs.push_back(l.get<double>());
  const char* key = r.command == "rq1"   ? "table"
                    : r.command == "rq2" ? "all"
                                         : "last";
  m.ys = p.at(key).at("info").get<std::vector<double>>();
  m.chance = p.at("chance").get<double>();
  return m;
}

std::string source_name(const std::string& path) {
  fs::path p(path);
  std::string stem = p.filename().string();
  const std::string suffix = ".report.json";
  if (stem.size() > suffix.size() &&
      stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem = stem.substr(0, stem.size() - suffix.size());
  }
  const std::string parent = p.parent_path().filename().string();
  return parent.empty() ? stem : parent + "/" + stem;
}

}  // namespace

Report cmd_report_merge(const RunConfig& cfg) {
  require_out(cfg);
  require_data(cfg.inputs.size() >= 2, "report-merge needs at least 2 inputs");

  std::vector<Report> sources;
  for (const std::string& path : cfg.inputs) sources.push_back(load_report(path));
  const std::string command = sources[0].command;
  for (const Report& r : sources) {
    require_data(r.command == command,
                 "report-merge: mixed commands " + command + " and " +
                     r.command);
  }

  std::vector<MergeSeries> series;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    series.push_back(primary_series(sources[i]));
    std::string name = source_name(cfg.inputs[i]);
    while (std::count(names.begin(), names.end(), name) > 0) name += "'";
    names.push_back(name);
    require_data(series[i].xs == series[0].xs,
                 "report-merge: incompatible axes between inputs");
  }

  Report report;
  report.command = "report-merge";
  report.config = cfg.to_json("report-merge");
  report.payload["merged_command"] = command;
  report.payload["x_label"] = series[0].x_label;
  report.payload["x"] = series[0].xs;
  Json cols = Json::array();
  for (std::size_t i = 0; i < series.size(); ++i) {
    cols.push_back(Json{{"name", names[i]}, {"y", series[i].ys}});
  }
  report.payload["columns"] = cols;
  write_report(cfg.out_dir, "merged", report);

  std::vector<std::string> header = {series[0].x_label};
  header.insert(header.end(), names.begin(), names.end());
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < series[0].xs.size(); ++k) {
    std::vector<std::string> row = {csv_real(series[0].xs[k])};
    for (const MergeSeries& s : series) row.push_back(csv_real(s.ys[k]));
    rows.push_back(row);
  }
  write_csv(out_path(cfg, "merged.csv"), header, rows);

  ChartSpec chart;
  chart.title = "merged " + command + " runs";
  chart.x_label = series[0].x_label;
  chart.y_label = command == "rq5" ? "accuracy" : "information score";
  for (std::size_t i = 0; i < series.size(); ++i) {
    ChartSeries cs{names[i], {}, false};
    for (std::size_t k = 0; k < series[i].xs.size(); ++k) {
      cs.points.push_back({series[i].xs[k], series[i].ys[k], std::nullopt});
    }
    chart.series.push_back(cs);
  }
  chart.baseline = series[0].chance;
  write_line_chart(out_path(cfg, "merged.svg"), chart);
  return report;
}

RerunResult cmd_rerun(const std::string& report_path,
                      const std::string& out_dir) {
  const Report original = load_report(report_path);
  RunConfig cfg = RunConfig::from_json(original.config);
  cfg.out_dir = out_dir;

  Report fresh;
  if (original.command == "rq1") fresh = cmd_rq1(cfg);
  else if (original.command == "rq2") fresh = cmd_rq2(cfg);
  else if (original.command == "rq3") fresh = cmd_rq3(cfg);
  else if (original.command == "rq4") fresh = cmd_rq4(cfg);
  else if (original.command == "rq5") fresh = cmd_rq5(cfg);
  else if (original.command == "report-merge") fresh = cmd_report_merge(cfg);
  else throw DataError("rerun: unsupported command " + original.command);

  RerunResult res;
  res.payload_matches =
      dump_json(fresh.payload) == dump_json(original.payload);
  res.report = std::move(fresh);
  return res;
}

namespace {

RunConfig base_config(const std::string& config_path) {
  if (config_path.empty()) return RunConfig{};
  return RunConfig::from_json(parse_json_file(config_path));
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string piece = text.substr(start, end - start);
    if (!piece.empty()) {
      try {
        out.push_back(std::stod(piece));
      } catch (const std::exception&) {
        throw ConfigError("bad number in list: " + piece);
      }
    }
    start = end + 1;
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (double v : parse_real_list(text)) {
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"layer-wise lens analysis over a self-contained transformer"};
  app.name("lenslab");
  app.require_subcommand(1);

  // gen-model
  auto* gen_model = app.add_subcommand(
      "gen-model", "build planted weights from a plant spec file");
  struct {
    std::string plant, out, cert;
  } gm;
  gen_model->add_option("--plant", gm.plant, "plant spec JSON")->required();
  gen_model->add_option("--out", gm.out, "output weights file")->required();
  gen_model->add_option("--cert", gm.cert, "also dump the certificate JSON");
  gen_model->callback([&gm]() {
    cmd_gen_model(gm.plant, gm.out, gm.cert);
    std::cout << "wrote " << gm.out << "\n";
  });

  // gen-corpus
  auto* gen_corpus =
      app.add_subcommand("gen-corpus", "generate a labeled synthetic corpus");
  struct {
    std::string plant, scheme, format = "P3", out;
    std::size_t n = 500, audio_len = kDefaultAudioLen;
    std::uint64_t seed = 7;
  } gc;
  gen_corpus->add_option("--plant", gc.plant, "plant spec JSON")->required();
  gen_corpus->add_option("--scheme", gc.scheme, "attribute scheme name");
  gen_corpus->add_option("--format", gc.format, "prompt format: P1|P2|P3");
  gen_corpus->add_option("--n", gc.n, "sample count");
  gen_corpus->add_option("--seed", gc.seed, "corpus seed");
  gen_corpus->add_option("--audio-len", gc.audio_len, "audio prefix length");
  gen_corpus->add_option("--out", gc.out, "output corpus file")->required();
  gen_corpus->callback([&gc]() {
    cmd_gen_corpus(gc.plant, gc.scheme, gc.format, gc.n, gc.seed, gc.audio_len,
                   gc.out);
    std::cout << "wrote " << gc.out << "\n";
  });

  // Shared flag block for the rq commands.
  struct RqOpts {
    std::string config, model, corpus, out, lambdas, seeds;
    double alpha = kDefaultAlpha;
    int position = -1;
    bool full_vocab = false;
    std::size_t gap = kDefaultGap;
    std::size_t probe_n = 100;
    std::uint64_t split_seed = 42;
  };
  auto add_common = [](CLI::App* sub, RqOpts& o) {
    sub->add_option("--config", o.config, "JSON config file; flags override");
    sub->add_option("--model", o.model, "weights file");
    sub->add_option("--corpus", o.corpus, "corpus file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--alpha", o.alpha, "contribution threshold margin");
  };
  auto merge_common = [](CLI::App* sub, const RqOpts& o) {
    RunConfig cfg = base_config(o.config);
    if (sub->count("--model")) cfg.model_path = o.model;
    if (sub->count("--corpus")) cfg.corpus_path = o.corpus;
    if (sub->count("--out")) cfg.out_dir = o.out;
    if (sub->count("--alpha")) cfg.alpha = o.alpha;
    return cfg;
  };

  auto rq_opts = std::make_shared<std::array<RqOpts, 5>>();

  auto* rq1 = app.add_subcommand("rq1", "layer-wise information scores");
  {
    RqOpts& o = (*rq_opts)[0];
    add_common(rq1, o);
    rq1->add_option("--position", o.position, "relative token position");
    rq1->add_flag("--full-vocab", o.full_vocab,
                  "argmax over the whole vocabulary instead of the labels");
    rq1->callback([rq1, &o = (*rq_opts)[0], &merge_common]() {
      RunConfig cfg = merge_common(rq1, o);
      if (rq1->count("--position")) cfg.position = o.position;
      if (rq1->count("--full-vocab")) cfg.full_vocab = o.full_vocab;
      const Report r = cmd_rq1(cfg);
      std::cout << "accuracy " << fmt_real(r.payload["table"]["accuracy"].get<double>())
                << ", reports in " << cfg.out_dir << "\n";
    });
  }

  auto* rq2 = app.add_subcommand("rq2", "correctness-split information scores");
  {
    RqOpts& o = (*rq_opts)[1];
    add_common(rq2, o);
    rq2->add_option("--position", o.position, "relative token position");
    rq2->add_flag("--full-vocab", o.full_vocab,
                  "argmax over the whole vocabulary instead of the labels");
    rq2->callback([rq2, &o = (*rq_opts)[1], &merge_common]() {
      RunConfig cfg = merge_common(rq2, o);
      if (rq2->count("--position")) cfg.position = o.position;
      if (rq2->count("--full-vocab")) cfg.full_vocab = o.full_vocab;
      const Report r = cmd_rq2(cfg);
      std::cout << "accuracy " << fmt_real(r.payload["accuracy"].get<double>())
                << " (" << r.payload["n_correct"] << " correct / "
                << r.payload["n_incorrect"] << " incorrect)\n";
    });
  }

  auto* rq3 = app.add_subcommand(
      "rq3", "critical-layer vs accuracy correlation over many runs");
  {
    RqOpts& o = (*rq_opts)[2];
    add_common(rq3, o);
    rq3->callback([rq3, &o = (*rq_opts)[2], &merge_common]() {
      RunConfig cfg = merge_common(rq3, o);
      const Report r = cmd_rq3(cfg);
      std::cout << "pearson r " << fmt_real(r.payload["pearson_r"].get<double>())
                << ", p " << fmt_real(r.payload["p_value"].get<double>())
                << "\n";
    });
  }

  auto* rq4 = app.add_subcommand(
      "rq4", "token-position comparison with audio-attention masking");
  {
    RqOpts& o = (*rq_opts)[3];
    add_common(rq4, o);
    rq4->callback([rq4, &o = (*rq_opts)[3], &merge_common]() {
      RunConfig cfg = merge_common(rq4, o);
      const Report r = cmd_rq4(cfg);
      std::cout << "unmasked "
                << fmt_real(r.payload["accuracy_unmasked"].get<double>())
                << ", masked "
                << fmt_real(r.payload["accuracy_masked"].get<double>()) << "\n";
    });
  }

  auto* rq5 = app.add_subcommand(
      "rq5", "representation enrichment with a lambda sweep");
  {
    RqOpts& o = (*rq_opts)[4];
    add_common(rq5, o);
    rq5->add_option("--lambdas", o.lambdas, "comma-separated lambda grid");
    rq5->add_option("--gap", o.gap, "layers between source and patch");
    rq5->add_option("--probe-n", o.probe_n, "probe split size");
    rq5->add_option("--split-seed", o.split_seed, "probe/test split seed");
    rq5->add_option("--seeds", o.seeds,
                    "comma-separated random-baseline seeds");
    rq5->callback([rq5, &o = (*rq_opts)[4], &merge_common]() {
      RunConfig cfg = merge_common(rq5, o);
      if (rq5->count("--lambdas")) cfg.lambdas = parse_real_list(o.lambdas);
      if (rq5->count("--gap")) cfg.gap = o.gap;
      if (rq5->count("--probe-n")) cfg.probe_n = o.probe_n;
      if (rq5->count("--split-seed")) cfg.split_seed = o.split_seed;
      if (rq5->count("--seeds")) cfg.random_seeds = parse_seed_list(o.seeds);
      const Report r = cmd_rq5(cfg);
      std::cout << "selected layer " << r.payload["selected_layer"]
                << ", best accuracy "
                << fmt_real(r.payload["best_accuracy"].get<double>())
                << " at lambda "
                << fmt_real(r.payload["best_lambda"].get<double>()) << "\n";
    });
  }

  // report-merge
  auto* merge = app.add_subcommand("report-merge",
                                   "combine compatible reports into one CSV");
  struct {
    std::string out;
    std::vector<std::string> inputs;
  } mg;
  merge->add_option("--out", mg.out, "output directory")->required();
  merge->add_option("inputs", mg.inputs, "report files")->required();
  merge->callback([&mg]() {
    RunConfig cfg;
    cfg.out_dir = mg.out;
    cfg.inputs = mg.inputs;
    cmd_report_merge(cfg);
    std::cout << "merged " << mg.inputs.size() << " reports into " << mg.out
              << "\n";
  });

  // rerun
  auto* rerun = app.add_subcommand(
      "rerun", "re-execute a report's embedded config and verify the payload");
  struct {
    std::string report, out;
  } rr;
  rerun->add_option("report", rr.report, "report file")->required();
  rerun->add_option("--out", rr.out, "output directory")->required();
  bool rerun_matched = true;
  rerun->callback([&rr, &rerun_matched]() {
    const RerunResult res = cmd_rerun(rr.report, rr.out);
    rerun_matched = res.payload_matches;
    std::cout << "payload match: " << (res.payload_matches ? "yes" : "NO")
              << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  }
  if (!rerun_matched) return 4;
  return 0;
}

}  // namespace lenslab
