// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lenslab/errors.hpp"
#include "lenslab/metrics.hpp"

namespace lenslab {

inline const std::vector<double>& default_lambda_grid() {
  static const std::vector<double> kGrid = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
  return kGrid;
}

inline constexpr std::size_t kDefaultGap = 5;

enum class SelectionRule { max_info_on_incorrect, random_layer };

// Raised when the probe set has no incorrectly predicted samples, in which
// case enrichment has nothing to fix.
class SelectionUndefinedError : public DataError {
 public:
  using DataError::DataError;
};

struct LayerSelection {
  std::size_t layer = 0;
  // Set when every candidate layer scored the same on the incorrect subset,
  // so the pick is just the shallowest layer.
  bool tied_at_chance = false;
};

// Informed rule: the layer of highest information score over the
// incorrectly predicted probe samples at the last position, searched over
// 1..L-gap so the patched layer stays in range; ties break toward the
// shallowest layer. Random rule: uniform over the same range.
LayerSelection select_enrichment_layer(const Model& model, const Corpus& probe,
                                       const std::vector<Trace>& probe_traces,
                                       SelectionRule rule,
                                       std::size_t gap = kDefaultGap,
                                       std::uint64_t seed = 0);

struct EnrichmentPlan {
  std::size_t selected_layer = 0;
  std::size_t gap = kDefaultGap;
  std::vector<double> lambdas = default_lambda_grid();  // must include 0
};

void validate_plan(const Model& model, const EnrichmentPlan& plan);

struct SweepResult {
  std::vector<double> lambdas;
  std::vector<double> accuracies;  // test accuracy per lambda
  double baseline = 0.0;           // accuracy at lambda = 0
  double best_lambda = 0.0;
  double best_accuracy = 0.0;
  std::optional<double> relative_improvement;  // unset when baseline is 0
};

// Re-runs the test corpus once per lambda with the enrich patch at the last
// position. The lambda = 0 run is bit-identical to an unintervened pass.
SweepResult run_lambda_sweep(const Model& model, const Corpus& test,
                             const EnrichmentPlan& plan);

struct MaskingResult {
  ScoreTable unmasked;  // last position, no intervention
  ScoreTable masked;    // last position, audio attention masked
  double accuracy_drop = 0.0;
};

// Pairwise traces with and without masking audio positions out of the last
// token's attention, at every layer and head.
MaskingResult run_masking_experiment(const Model& model, const Corpus& corpus,
                                     double alpha = kDefaultAlpha);

}  // namespace lenslab
