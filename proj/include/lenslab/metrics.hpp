// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "lenslab/corpus.hpp"
#include "lenslab/model.hpp"

namespace lenslab {

inline constexpr double kDefaultAlpha = 0.2;

// Per-layer vocabulary projections of one trace at one token position.
// Row l is softmax(W_U * finalnorm(h[l])); row L is bit-identical to the
// model's next-token distribution at that position.
struct LensTable {
  int position = -1;  // relative index as requested
  Matrix rows;        // (L+1) x |V|
};

LensTable logit_lens(const Model& model, const Trace& trace, int position);

// Argmax restricted to the label alphabet; ties resolve to the lowest token
// id. Multi-token labels are represented by their first token upstream, so
// ids here are single tokens.
TokenId predict_label(std::span<const double> dist,
                      std::span<const TokenId> label_ids);

// Unrestricted variant (exploration only; not used by the shipped analyses).
TokenId predict_token_full(std::span<const double> dist);

std::vector<Trace> run_corpus(const Model& model, const Corpus& corpus,
                              const std::vector<InterventionSpec>& interventions = {});

// Mean over samples of [predicted label == true label] on the layer's lens
// row. Count-based, so identities with split accuracies are exact.
double information_score(const Model& model, const Corpus& corpus,
                         const std::vector<Trace>& traces, std::size_t layer,
                         int position);
double information_score_subset(const Model& model, const Corpus& corpus,
                                const std::vector<Trace>& traces,
                                std::span<const std::size_t> subset,
                                std::size_t layer, int position);

// s^l = max(0, I^l - (1+alpha)/|Y|) for l = 1..L; index 0 of the result is
// a placeholder (layer 0 is traced but excluded from the contribution sums).
std::vector<double> layer_contributions(const std::vector<double>& info,
                                        std::size_t label_count, double alpha);

// Contribution-weighted mean layer index over l = 1..L, or nullopt when all
// contributions vanish ("unresolved").
std::optional<double> critical_layer(const std::vector<double>& contributions);

struct ScoreTable {
  int position = -1;
  std::string subset = "all";
  double alpha = kDefaultAlpha;
  double chance = 0.0;
  std::size_t n_samples = 0;
  std::vector<double> info;           // layers 0..L
  std::vector<double> contributions;  // layers 0..L, [0] unused
  std::optional<double> critical;
  double accuracy = 0.0;  // output-layer accuracy of the same subset
};

ScoreTable build_score_table(const Model& model, const Corpus& corpus,
                             const std::vector<Trace>& traces, int position,
                             double alpha = kDefaultAlpha,
                             bool restrict_to_labels = true);
ScoreTable build_score_table_subset(const Model& model, const Corpus& corpus,
                                    const std::vector<Trace>& traces,
                                    std::span<const std::size_t> subset,
                                    const std::string& subset_tag,
                                    int position,
                                    double alpha = kDefaultAlpha,
                                    bool restrict_to_labels = true);

struct CorrectnessSplit {
  std::vector<std::size_t> correct;
  std::vector<std::size_t> incorrect;
};

// Partition by whether the true label wins the output distribution at the
// last position. The correct fraction equals information_score(L, -1)
// exactly.
CorrectnessSplit split_by_correctness(const Model& model, const Corpus& corpus,
                                      const std::vector<Trace>& traces);

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n_used = 0;
  std::size_t n_skipped = 0;  // entries with an unresolved critical layer
};

// Pearson r over (critical layer, accuracy) pairs plus the exact two-sided
// t-test p-value with n-2 degrees of freedom. Unresolved entries are
// skipped and counted.
CorrelationResult correlation_study(
    const std::vector<std::pair<std::optional<double>, double>>& pairs);

}  // namespace lenslab
