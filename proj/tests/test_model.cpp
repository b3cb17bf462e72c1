// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <limits>

#include <doctest.h>

#include "lenslab/errors.hpp"
#include "lenslab/model.hpp"
#include "test_util.hpp"

using namespace lenslab;
using lenslab::test::random_input;

namespace {

ModelSpec tiny_spec(std::size_t n_layers, NormKind norm) {
  ModelSpec spec;
  spec.n_layers = n_layers;
  spec.d_model = 8;
  spec.n_heads = 2;
  spec.d_head = 4;
  spec.vocab_size = 16;
  spec.max_positions = 32;
  spec.norm_kind = norm;
  return spec;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("spec validation") {
  ModelSpec bad = tiny_spec(2, NormKind::rms);
  bad.d_head = 3;
  CHECK_THROWS_AS(validate_spec(bad), DataError);
  bad = tiny_spec(2, NormKind::rms);
  bad.vocab_size = 1;
  CHECK_THROWS_AS(validate_spec(bad), DataError);
}

TEST_CASE("zero one-layer identity model is a residual pass-through") {
  const ModelSpec spec = tiny_spec(1, NormKind::identity);
  Model model{spec, zero_weights(spec)};
  Rng rng(3);
  const InputSequence in = random_input(spec, rng);
  const Trace tr = forward_with_trace(model, in);
  REQUIRE(tr.hidden.size() == 2);
  CHECK(std::memcmp(tr.hidden[0].data.data(), tr.hidden[1].data.data(),
                    tr.hidden[0].data.size() * sizeof(double)) == 0);
}

TEST_CASE("enrich with scale zero is a bit-identical no-op") {
  const Model model = random_model(tiny_spec(4, NormKind::rms), 11);
  Rng rng(5);
  const InputSequence in = random_input(model.spec, rng);
  const Trace plain = forward_with_trace(model, in);
  const Trace patched = forward_with_trace(
      model, in, {InterventionSpec::enrich(1, 2, 0.0)});
  CHECK(traces_bit_identical(plain, patched));
  CHECK(patched.applied_interventions.size() == 1);
}

TEST_CASE("mask with an explicitly empty span set is a no-op") {
  const Model model = random_model(tiny_spec(3, NormKind::rms), 12);
  Rng rng(6);
  const InputSequence in = random_input(model.spec, rng);
  const Trace plain = forward_with_trace(model, in);
  const Trace masked = forward_with_trace(
      model, in, {InterventionSpec::mask(-1, std::vector<SpanRange>{})});
  CHECK(traces_bit_identical(plain, masked));
  const Trace zero_width = forward_with_trace(
      model, in, {InterventionSpec::mask(-1, std::vector<SpanRange>{{2, 2}})});
  CHECK(traces_bit_identical(plain, zero_width));
}

TEST_CASE("last-position interventions leave earlier positions bit-identical") {
  const Model model = random_model(tiny_spec(4, NormKind::rms), 21);
  Rng rng(8);
  const InputSequence in = random_input(model.spec, rng);
  const Trace plain = forward_with_trace(model, in);
  const std::size_t last = plain.n_positions() - 1;

  for (const auto& ivs :
       {std::vector<InterventionSpec>{InterventionSpec::mask(-1)},
        std::vector<InterventionSpec>{InterventionSpec::enrich(1, 2, 1.5)}}) {
    const Trace moved = forward_with_trace(model, in, ivs);
    for (std::size_t l = 0; l < plain.hidden.size(); ++l) {
      for (std::size_t i = 0; i < last; ++i) {
        CHECK(std::memcmp(plain.hidden[l].row(i).data(),
                          moved.hidden[l].row(i).data(),
                          model.spec.d_model * sizeof(double)) == 0);
      }
    }
  }
}

TEST_CASE("final-layer identity is bit-exact") {
  const Model model = random_model(tiny_spec(5, NormKind::rms), 31);
  Rng rng(9);
  const InputSequence in = random_input(model.spec, rng);
  const Trace tr = forward_with_trace(model, in);
  for (std::size_t i = 0; i < tr.n_positions(); ++i) {
    const Vector proj =
        vocab_projection(model, tr.hidden[model.spec.n_layers].row(i));
    CHECK(std::memcmp(proj.data(), tr.next_token_dist.row(i).data(),
                      proj.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("forward passes are deterministic") {
  const Model model = random_model(tiny_spec(3, NormKind::rms), 41);
  Rng rng(10);
  const InputSequence in = random_input(model.spec, rng);
  const Trace a = forward_with_trace(model, in);
  const Trace b = forward_with_trace(model, in);
  CHECK(traces_bit_identical(a, b));
}

TEST_CASE("attention softmax rows sum to one over unmasked slots") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    Vector scores(n);
    for (double& s : scores) s = 3.0 * rng.normal();
    if (n > 1) scores[rng.below(n)] = -std::numeric_limits<double>::infinity();
    const Vector w = attn_softmax(scores);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (scores[i] == -std::numeric_limits<double>::infinity()) {
        CHECK(w[i] == 0.0);
      }
      sum += w[i];
    }
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(
      attn_softmax(Vector{-std::numeric_limits<double>::infinity()}),
      NumericError);
}

TEST_CASE("next-token distribution access") {
  const Model model = random_model(tiny_spec(2, NormKind::rms), 51);
  Rng rng(12);
  const InputSequence in = random_input(model.spec, rng);
  const Trace tr = forward_with_trace(model, in);
  const Vector d = next_token_distribution(tr, -1);
  double sum = 0.0;
  for (double p : d) sum += p;
  CHECK(std::fabs(sum - 1.0) <= 1e-12);
  CHECK_THROWS_AS(next_token_distribution(tr, 99), DataError);
  CHECK_THROWS_AS(next_token_distribution(tr, -99), DataError);
}

TEST_CASE("intervention validation") {
  const Model model = random_model(tiny_spec(3, NormKind::rms), 61);
  Rng rng(13);
  const InputSequence in = random_input(model.spec, rng);
  CHECK_THROWS_AS(
      forward_with_trace(model, in, {InterventionSpec::enrich(2, 5, 1.0)}),
      DataError);
  CHECK_THROWS_AS(
      forward_with_trace(model, in, {InterventionSpec::enrich(0, 1, 1.0)}),
      DataError);
  CHECK_THROWS_AS(
      forward_with_trace(model, in, {InterventionSpec::enrich(1, 0, 1.0)}),
      DataError);
  CHECK_THROWS_AS(
      forward_with_trace(
          model, in,
          {InterventionSpec::mask(-1, std::vector<SpanRange>{{0, 99}})}),
      DataError);
}

TEST_CASE("fully masked attention row is a numeric failure") {
  const Model model = random_model(tiny_spec(2, NormKind::rms), 62);
  Rng rng(19);
  InputSequence in = random_input(model.spec, rng, 3, 0);
  // Mask everything the first position can attend to (itself only).
  CHECK_THROWS_AS(
      forward_with_trace(
          model, in,
          {InterventionSpec::mask(0, std::vector<SpanRange>{{0, 3}})}),
      NumericError);
}

TEST_CASE("non-finite activations are reported with layer context") {
  const ModelSpec spec = tiny_spec(2, NormKind::identity);
  Model model{spec, zero_weights(spec)};
  for (double& x : model.weights.layers[0].w_in.data) x = 1e200;
  for (double& x : model.weights.layers[0].w_out.data) x = 1e200;
  Rng rng(14);
  const InputSequence in = random_input(spec, rng);
  try {
    forward_with_trace(model, in);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("weights container round-trips bit-exactly") {
  const Model model = random_model(tiny_spec(3, NormKind::rms), 71);
  const std::string bytes = serialize_model(model, {{"XTRA", "opaque"}});
  const LoadedModel loaded = deserialize_model(bytes);
  CHECK(loaded.sections.at("XTRA") == "opaque");
  const std::string again = serialize_model(loaded.model, loaded.sections);
  CHECK(bytes == again);
}

TEST_CASE("weights container rejects malformed input") {
  const Model model = random_model(tiny_spec(2, NormKind::rms), 81);
  std::string bytes = serialize_model(model);

  std::string corrupt = bytes;
  corrupt[0] = 'X';
  CHECK_THROWS_AS(deserialize_model(corrupt), DataError);

  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 9)),
                  DataError);

  // Declared L=3 but the payload only holds two layers of blocks.
  Model bigger = model;
  bigger.spec.n_layers = 3;
  const std::string spec_text = dump_json(model_spec_to_json(bigger.spec));
  std::string doctored(kWeightsMagic, 8);
  doctored += "SPEC";
  for (int i = 0; i < 8; ++i) {
    doctored.push_back(
        static_cast<char>((spec_text.size() >> (8 * i)) & 0xff));
  }
  doctored += spec_text;
  const std::size_t mats_at = bytes.find("MATS");
  doctored += bytes.substr(mats_at);
  CHECK_THROWS_WITH_AS(deserialize_model(doctored),
                       "weight payload size does not match the embedded spec",
                       DataError);
}

TEST_CASE("model file save and load") {
  const std::string dir = lenslab::test::fresh_dir("model_io");
  const Model model = random_model(tiny_spec(2, NormKind::rms), 91);
  const std::string path = dir + "/weights.bin";
  save_model(path, model);
  const LoadedModel loaded = load_model(path);
  CHECK(serialize_model(loaded.model) == serialize_model(model));
  CHECK_THROWS_AS(load_model(dir + "/missing.bin"), DataError);
}

}  // TEST_SUITE
