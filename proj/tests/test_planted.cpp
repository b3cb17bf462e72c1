// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <doctest.h>

#include "lenslab/errors.hpp"
#include "lenslab/metrics.hpp"
#include "test_util.hpp"

using namespace lenslab;
using lenslab::test::fresh_dir;
using lenslab::test::make_plant;
using lenslab::test::planted_scenario;

namespace {

// Lens argmax over the label alphabet at one layer, straight from the trace.
TokenId lens_pick(const Model& model, const Trace& tr, std::size_t layer,
                  const std::vector<TokenId>& labels) {
  const std::size_t last = tr.n_positions() - 1;
  const Vector dist = vocab_projection(model, tr.hidden[layer].row(last));
  return predict_label(dist, labels);
}

}  // namespace

TEST_SUITE("planted") {

TEST_CASE("label unembedding rows are orthonormal basis directions") {
  const auto sc = planted_scenario(6, 2, std::nullopt, 0.0, "mood", 1);
  const Model& m = sc.planted.model;
  const auto& labels = sc.planted.certificate.labels;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = 0; b < labels.size(); ++b) {
      const double d =
          dot(m.weights.unembedding.row(labels[a]),
              m.weights.unembedding.row(labels[b]));
      CHECK(d == (a == b ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("copy gain zero leaves every layer at chance") {
  const AttributeScheme& scheme = scheme_by_name("tone");
  PlantSpec plant = make_plant(6, 2, std::nullopt, 0.0, scheme, 5);
  plant.copy_gain = 0.0;
  const PlantedModel pm = build_planted(plant);
  const Corpus corpus = generate_corpus(scheme, PromptFormat::P3, 200, plant, 9);
  const auto traces = run_corpus(pm.model, corpus);
  for (std::size_t l = 0; l <= 6; ++l) {
    const auto band = predict_lens_band(pm.certificate, l, Subset::all);
    CHECK(band.outcome == BandOutcome::chance);
    const double info = information_score(pm.model, corpus, traces, l, -1);
    CHECK(info <= band.expected_info + 0.15);
  }
}

TEST_CASE("clean construction flips to the label exactly at the inject layer") {
  const auto sc = planted_scenario(8, 3, std::nullopt, 0.0, "mood", 120);
  const auto traces = run_corpus(sc.planted.model, sc.corpus);
  const auto& labels = sc.corpus.label_ids;

  for (std::size_t l = 0; l <= 8; ++l) {
    const auto band = predict_lens_band(sc.planted.certificate, l, Subset::clean);
    const double info =
        information_score(sc.planted.model, sc.corpus, traces, l, -1);
    if (l >= 3) {
      CHECK(band.outcome == BandOutcome::correct_label);
      CHECK(info == 1.0);
    } else {
      CHECK(band.outcome == BandOutcome::chance);
      CHECK(info <= band.expected_info + 0.12);
    }
  }
  // Every single sample obeys the flip, not just the average.
  for (std::size_t i = 0; i < sc.corpus.size(); ++i) {
    CHECK(lens_pick(sc.planted.model, traces[i], 3, labels) ==
          sc.corpus.samples[i].label);
    CHECK(lens_pick(sc.planted.model, traces[i], 8, labels) ==
          sc.corpus.samples[i].label);
  }
}

TEST_CASE("fully corrupted construction flips to the wrong label at the degrade layer") {
  const AttributeScheme& scheme = scheme_by_name("mood");
  PlantSpec plant = make_plant(8, 2, 5, 1.0, scheme, 5);
  // degrade_gain defaults to 2 * copy_gain, which flips the ordering.
  const PlantedModel pm = build_planted(plant);
  const Corpus corpus = generate_corpus(scheme, PromptFormat::P3, 80, plant, 17);
  const auto traces = run_corpus(pm.model, corpus);

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(corpus.samples[i].is_corrupted);
    const TokenId truth = corpus.samples[i].label;
    const TokenId wrong = wrong_label_for(pm.certificate, truth);
    for (std::size_t l = 2; l < 5; ++l) {
      CHECK(lens_pick(pm.model, traces[i], l, corpus.label_ids) == truth);
    }
    for (std::size_t l = 5; l <= 8; ++l) {
      CHECK(lens_pick(pm.model, traces[i], l, corpus.label_ids) == wrong);
    }
  }
  const auto band_mid = predict_lens_band(pm.certificate, 3, Subset::corrupted);
  CHECK(band_mid.outcome == BandOutcome::correct_label);
  const auto band_deep = predict_lens_band(pm.certificate, 7, Subset::corrupted);
  CHECK(band_deep.outcome == BandOutcome::wrong_label);
  CHECK(information_score(pm.model, corpus, traces, 7, -1) == 0.0);
}

TEST_CASE("critical layer sits at the midpoint of the plateau") {
  const auto sc = planted_scenario(12, 4, std::nullopt, 0.0, "tone", 200,
                                   PromptFormat::P3, 11);
  const auto traces = run_corpus(sc.planted.model, sc.corpus);
  const ScoreTable table =
      build_score_table(sc.planted.model, sc.corpus, traces, -1);
  REQUIRE(table.critical.has_value());
  CHECK(std::fabs(*table.critical - 8.0) <= 0.02);
}

TEST_CASE("raising the inject layer strictly raises the critical layer") {
  double previous = -1.0;
  for (std::size_t inject : {3, 5, 7}) {
    const auto sc = planted_scenario(10, inject, std::nullopt, 0.0, "tone",
                                     150, PromptFormat::P3, 23);
    const auto traces = run_corpus(sc.planted.model, sc.corpus);
    const ScoreTable table =
        build_score_table(sc.planted.model, sc.corpus, traces, -1);
    REQUIRE(table.critical.has_value());
    CHECK(*table.critical > previous);
    previous = *table.critical;
  }
}

TEST_CASE("certificate round-trips through the weights container") {
  const auto sc = planted_scenario(6, 2, 4, 0.5, "tongue", 1);
  const std::string dir = fresh_dir("planted");
  const std::string path = dir + "/planted.bin";
  save_planted(path, sc.planted);
  const LoadedPlanted loaded = load_planted(path);
  REQUIRE(loaded.certificate.has_value());
  const PlantCertificate& cert = *loaded.certificate;
  CHECK(cert.inject_layer == 2);
  CHECK(cert.degrade_layer == 4);
  CHECK(cert.degrade_fraction == 0.5);
  CHECK(cert.labels == sc.planted.certificate.labels);
  for (std::size_t l = 0; l <= 6; ++l) {
    for (Subset s : {Subset::all, Subset::clean, Subset::corrupted}) {
      CHECK(predict_lens_band(cert, l, s).outcome ==
            predict_lens_band(sc.planted.certificate, l, s).outcome);
    }
  }
  CHECK(serialize_model(loaded.model) == serialize_model(sc.planted.model));
}

TEST_CASE("plant validation rejects inconsistent specs") {
  const AttributeScheme& scheme = scheme_by_name("mood");
  CHECK_THROWS_AS(build_planted(make_plant(6, 7, std::nullopt, 0.0, scheme)),
                  DataError);
  CHECK_THROWS_AS(build_planted(make_plant(6, 3, 3, 0.5, scheme)), DataError);
  CHECK_THROWS_AS(build_planted(make_plant(6, 3, 2, 0.5, scheme)), DataError);

  PlantSpec rms = make_plant(6, 2, std::nullopt, 0.0, scheme);
  rms.base.norm_kind = NormKind::rms;
  CHECK_THROWS_AS(build_planted(rms), DataError);

  PlantSpec cramped = make_plant(6, 2, std::nullopt, 0.0, scheme);
  cramped.base.d_model = 8;
  cramped.base.n_heads = 2;
  cramped.base.d_head = 4;
  CHECK_THROWS_AS(build_planted(cramped), DataError);

  PlantSpec dup = make_plant(6, 2, std::nullopt, 0.0, scheme);
  dup.label_alphabet[1] = dup.label_alphabet[0];
  CHECK_THROWS_AS(build_planted(dup), DataError);
}

TEST_CASE("band oracle over a degrade construction") {
  const auto sc = planted_scenario(12, 3, 9, 0.25, "mood", 1);
  const PlantCertificate& cert = sc.planted.certificate;
  CHECK(predict_lens_band(cert, 2, Subset::all).outcome == BandOutcome::chance);
  CHECK(predict_lens_band(cert, 3, Subset::all).outcome ==
        BandOutcome::correct_label);
  CHECK(predict_lens_band(cert, 9, Subset::all).outcome == BandOutcome::mixed);
  CHECK(predict_lens_band(cert, 9, Subset::all).expected_info ==
        doctest::Approx(0.75));
  CHECK(predict_lens_band(cert, 9, Subset::clean).outcome ==
        BandOutcome::correct_label);
  CHECK(predict_lens_band(cert, 12, Subset::corrupted).outcome ==
        BandOutcome::wrong_label);
  CHECK_THROWS_AS(predict_lens_band(cert, 13, Subset::all), DataError);
}

}  // TEST_SUITE
