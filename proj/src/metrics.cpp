// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lenslab/errors.hpp"

namespace lenslab {

LensTable logit_lens(const Model& model, const Trace& trace, int position) {
  const std::size_t pos = resolve_position(position, trace.n_positions());
  const std::size_t L = trace.n_layers();
  LensTable table;
  table.position = position;
  table.rows = Matrix(L + 1, model.spec.vocab_size);
  for (std::size_t l = 0; l <= L; ++l) {
    Vector dist = vocab_projection(model, trace.hidden[l].row(pos));
    std::copy(dist.begin(), dist.end(), table.rows.row(l).begin());
  }
  return table;
}

TokenId predict_label(std::span<const double> dist,
                      std::span<const TokenId> label_ids) {
  require_data(!label_ids.empty(), "predict_label: empty label alphabet");
  std::vector<TokenId> sorted(label_ids.begin(), label_ids.end());
  std::sort(sorted.begin(), sorted.end());
  TokenId best = sorted[0];
  require_data(best < dist.size(), "predict_label: label id outside vocabulary");
  double best_p = dist[best];
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const TokenId id = sorted[i];
    require_data(id < dist.size(), "predict_label: label id outside vocabulary");
    if (dist[id] > best_p) {
      best = id;
      best_p = dist[id];
    }
  }
  return best;
}

TokenId predict_token_full(std::span<const double> dist) {
  return static_cast<TokenId>(argmax_det(dist));
}

std::vector<Trace> run_corpus(const Model& model, const Corpus& corpus,
                              const std::vector<InterventionSpec>& interventions) {
  std::vector<Trace> traces;
  traces.reserve(corpus.size());
  for (const Sample& s : corpus.samples) {
    traces.push_back(forward_with_trace(model, to_input(s), interventions));
  }
  return traces;
}

namespace {

void check_pairing(const Corpus& corpus, const std::vector<Trace>& traces) {
  require_data(corpus.size() == traces.size(),
               "corpus and traces do not correspond 1:1");
  require_data(!corpus.samples.empty(), "empty corpus");
}

// Correct-prediction counts per layer for the given sample subset.
std::vector<std::size_t> layer_hit_counts(const Model& model,
                                          const Corpus& corpus,
                                          const std::vector<Trace>& traces,
                                          std::span<const std::size_t> subset,
                                          int position,
                                          bool restrict_to_labels) {
  const std::size_t L = model.spec.n_layers;
  std::vector<std::size_t> hits(L + 1, 0);
  for (std::size_t idx : subset) {
    require_data(idx < traces.size(), "subset index out of range");
    const LensTable table = logit_lens(model, traces[idx], position);
    const TokenId truth = corpus.samples[idx].label;
    for (std::size_t l = 0; l <= L; ++l) {
      const TokenId pred =
          restrict_to_labels
              ? predict_label(table.rows.row(l), corpus.label_ids)
              : predict_token_full(table.rows.row(l));
      if (pred == truth) ++hits[l];
    }
  }
  return hits;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

double information_score_subset(const Model& model, const Corpus& corpus,
                                const std::vector<Trace>& traces,
                                std::span<const std::size_t> subset,
                                std::size_t layer, int position) {
  check_pairing(corpus, traces);
  require_data(layer <= model.spec.n_layers, "information_score: bad layer");
  require_data(!subset.empty(), "information_score: empty subset");
  std::size_t hits = 0;
  for (std::size_t idx : subset) {
    const std::size_t pos =
        resolve_position(position, traces[idx].n_positions());
    Vector dist =
        vocab_projection(model, traces[idx].hidden[layer].row(pos));
    if (predict_label(dist, corpus.label_ids) == corpus.samples[idx].label) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(subset.size());
}

double information_score(const Model& model, const Corpus& corpus,
                         const std::vector<Trace>& traces, std::size_t layer,
                         int position) {
  const auto idx = all_indices(corpus.size());
  return information_score_subset(model, corpus, traces, idx, layer, position);
}

std::vector<double> layer_contributions(const std::vector<double>& info,
                                        std::size_t label_count, double alpha) {
  require_data(alpha > 0.0, "layer_contributions: alpha must be > 0");
  require_data(label_count >= 1, "layer_contributions: empty label alphabet");
  require_data(info.size() >= 2, "layer_contributions: need layers 0..L");
  const double threshold =
      (1.0 + alpha) / static_cast<double>(label_count);
  std::vector<double> s(info.size(), 0.0);
  for (std::size_t l = 1; l < info.size(); ++l) {
    s[l] = std::max(0.0, info[l] - threshold);
  }
  return s;
}

std::optional<double> critical_layer(const std::vector<double>& contributions) {
  double weight = 0.0;
  double weighted = 0.0;
  for (std::size_t l = 1; l < contributions.size(); ++l) {
    weight += contributions[l];
    weighted += contributions[l] * static_cast<double>(l);
  }
  if (weight == 0.0) return std::nullopt;
  return weighted / weight;
}

ScoreTable build_score_table_subset(const Model& model, const Corpus& corpus,
                                    const std::vector<Trace>& traces,
                                    std::span<const std::size_t> subset,
                                    const std::string& subset_tag,
                                    int position, double alpha,
                                    bool restrict_to_labels) {
  check_pairing(corpus, traces);
  require_data(!subset.empty(), "score table: empty subset");

  ScoreTable table;
  table.position = position;
  table.subset = subset_tag;
  table.alpha = alpha;
  table.chance = 1.0 / static_cast<double>(corpus.label_ids.size());
  table.n_samples = subset.size();

  const auto hits = layer_hit_counts(model, corpus, traces, subset, position,
                                     restrict_to_labels);
  table.info.resize(hits.size());
  for (std::size_t l = 0; l < hits.size(); ++l) {
    table.info[l] =
        static_cast<double>(hits[l]) / static_cast<double>(subset.size());
  }
  table.contributions =
      layer_contributions(table.info, corpus.label_ids.size(), alpha);
  table.critical = critical_layer(table.contributions);

  // Output accuracy of this subset: layer-L score at the last position.
  const auto out_hits =
      position == -1 ? hits
                     : layer_hit_counts(model, corpus, traces, subset, -1,
                                        restrict_to_labels);
  table.accuracy = static_cast<double>(out_hits[model.spec.n_layers]) /
                   static_cast<double>(subset.size());
  return table;
}

ScoreTable build_score_table(const Model& model, const Corpus& corpus,
                             const std::vector<Trace>& traces, int position,
                             double alpha, bool restrict_to_labels) {
  const auto idx = all_indices(corpus.size());
  return build_score_table_subset(model, corpus, traces, idx, "all", position,
                                  alpha, restrict_to_labels);
}

CorrectnessSplit split_by_correctness(const Model& model, const Corpus& corpus,
                                      const std::vector<Trace>& traces) {
  check_pairing(corpus, traces);
  require_data(!traces.empty() &&
                   traces[0].next_token_dist.cols == model.spec.vocab_size,
               "traces do not belong to this model");
  CorrectnessSplit split;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::size_t last = traces[i].n_positions() - 1;
    const TokenId pred =
        predict_label(traces[i].next_token_dist.row(last), corpus.label_ids);
    if (pred == corpus.samples[i].label) {
      split.correct.push_back(i);
    } else {
      split.incorrect.push_back(i);
    }
  }
  return split;
}

CorrelationResult correlation_study(
    const std::vector<std::pair<std::optional<double>, double>>& pairs) {
  CorrelationResult res;
  Vector xs, ys;
  for (const auto& [critical, accuracy] : pairs) {
    if (!critical) {
      ++res.n_skipped;
      continue;
    }
    xs.push_back(*critical);
    ys.push_back(accuracy);
  }
  require_data(xs.size() >= 3, "correlation_study: need at least 3 resolved pairs");
  res.n_used = xs.size();
  res.r = pearson(xs, ys);
  const double n = static_cast<double>(res.n_used);
  if (std::abs(res.r) >= 1.0) {
    res.p_value = 0.0;
  } else {
    const double t = res.r * std::sqrt((n - 2.0) / (1.0 - res.r * res.r));
    res.p_value = student_t_two_sided_p(t, n - 2.0);
  }
  return res;
}

}  // namespace lenslab
