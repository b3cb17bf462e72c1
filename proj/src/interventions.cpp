// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/interventions.hpp"

#include <algorithm>
#include <cmath>

#include "lenslab/errors.hpp"
#include "lenslab/rng.hpp"

namespace lenslab {

LayerSelection select_enrichment_layer(const Model& model, const Corpus& probe,
                                       const std::vector<Trace>& probe_traces,
                                       SelectionRule rule, std::size_t gap,
                                       std::uint64_t seed) {
  const std::size_t L = model.spec.n_layers;
  require_data(gap >= 1, "selection: gap must be >= 1");
  require_data(L > gap, "selection: no candidate layers, gap >= n_layers");
  const std::size_t max_layer = L - gap;

  if (rule == SelectionRule::random_layer) {
    Rng rng(mix_seed(seed, 0x5E1EC7ULL));
    return {1 + rng.below(max_layer), false};
  }

  const CorrectnessSplit split =
      split_by_correctness(model, probe, probe_traces);
  if (split.incorrect.empty()) {
    throw SelectionUndefinedError(
        "selection: every probe sample is predicted correctly; "
        "enrichment is unnecessary");
  }

  LayerSelection sel;
  double best = -1.0;
  double worst = 2.0;
  for (std::size_t l = 1; l <= max_layer; ++l) {
    const double score = information_score_subset(model, probe, probe_traces,
                                                  split.incorrect, l, -1);
    if (score > best) {
      best = score;
      sel.layer = l;
    }
    worst = std::min(worst, score);
  }
  sel.tied_at_chance = best == worst;
  return sel;
}

void validate_plan(const Model& model, const EnrichmentPlan& plan) {
  require_data(plan.selected_layer >= 1, "plan: layer must be >= 1");
  require_data(plan.gap >= 1, "plan: gap must be >= 1");
  require_data(plan.selected_layer + plan.gap <= model.spec.n_layers,
               "plan: selected layer + gap exceeds layer count");
  require_data(!plan.lambdas.empty(), "plan: empty lambda grid");
  bool has_zero = false;
  for (double l : plan.lambdas) {
    require_data(std::isfinite(l) && l >= 0.0,
                 "plan: lambdas must be finite and >= 0");
    if (l == 0.0) has_zero = true;
  }
  require_data(has_zero, "plan: lambda grid must include 0 as the baseline");
}

SweepResult run_lambda_sweep(const Model& model, const Corpus& test,
                             const EnrichmentPlan& plan) {
  validate_plan(model, plan);
  require_data(!test.samples.empty(), "sweep: empty test corpus");

  SweepResult res;
  res.lambdas = plan.lambdas;
  res.accuracies.reserve(plan.lambdas.size());
  for (double lambda : plan.lambdas) {
    const std::vector<InterventionSpec> ivs = {
        InterventionSpec::enrich(plan.selected_layer, plan.gap, lambda, -1)};
    const std::vector<Trace> traces = run_corpus(model, test, ivs);
    const CorrectnessSplit split = split_by_correctness(model, test, traces);
    res.accuracies.push_back(static_cast<double>(split.correct.size()) /
                             static_cast<double>(test.size()));
  }

  res.best_accuracy = -1.0;
  for (std::size_t i = 0; i < res.lambdas.size(); ++i) {
    if (res.lambdas[i] == 0.0) res.baseline = res.accuracies[i];
    if (res.accuracies[i] > res.best_accuracy) {
      res.best_accuracy = res.accuracies[i];
      res.best_lambda = res.lambdas[i];
    }
  }
  if (res.baseline > 0.0) {
    res.relative_improvement =
        (res.best_accuracy - res.baseline) / res.baseline;
  }
  return res;
}

MaskingResult run_masking_experiment(const Model& model, const Corpus& corpus,
                                     double alpha) {
  require_data(!corpus.samples.empty(), "masking: empty corpus");
  const std::vector<Trace> plain = run_corpus(model, corpus);
  const std::vector<InterventionSpec> ivs = {InterventionSpec::mask(-1)};
  const std::vector<Trace> masked = run_corpus(model, corpus, ivs);

  MaskingResult res;
  res.unmasked = build_score_table(model, corpus, plain, -1, alpha);
  res.masked = build_score_table(model, corpus, masked, -1, alpha);
  res.masked.subset = "masked";
  res.accuracy_drop = res.unmasked.accuracy - res.masked.accuracy;
  return res;
}

}  // namespace lenslab
