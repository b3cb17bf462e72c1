// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <set>

#include <doctest.h>

#include "lenslab/corpus.hpp"
#include "lenslab/errors.hpp"
#include "test_util.hpp"

using namespace lenslab;
using lenslab::test::fresh_dir;
using lenslab::test::make_plant;

TEST_SUITE("corpus") {

TEST_CASE("tokenizer is a bijection with reserved ids") {
  const Tokenizer& tok = default_tokenizer();
  CHECK(tok.encode("<user>") == kUserTokenId);
  CHECK(tok.encode("<asst>") == kAsstTokenId);
  CHECK(tok.encode("is") == kCueTokenId);
  for (TokenId id = 0; id < tok.size(); ++id) {
    CHECK(tok.encode(tok.decode(id)) == id);
  }
  CHECK_THROWS_AS(tok.encode("zebra"), DataError);
  CHECK_THROWS_AS(Tokenizer::build({"a", "b", "a"}), DataError);
}

TEST_CASE("nine-label scheme tokenizes to nine distinct single ids") {
  const AttributeScheme& beast = scheme_by_name("beast");
  const auto ids = default_tokenizer().encode_all(beast.labels);
  CHECK(ids.size() == 9);
  CHECK(std::set<TokenId>(ids.begin(), ids.end()).size() == 9);
}

TEST_CASE("default schemes mirror the four alphabet sizes") {
  const auto& schemes = default_schemes();
  REQUIRE(schemes.size() == 4);
  std::multiset<std::size_t> sizes;
  for (const auto& s : schemes) sizes.insert(s.labels.size());
  CHECK(sizes == std::multiset<std::size_t>{2, 5, 8, 9});
}

TEST_CASE("prompt structure: attribute word then cue, in every format") {
  const Tokenizer& tok = default_tokenizer();
  for (const AttributeScheme& scheme : default_schemes()) {
    for (PromptFormat f :
         {PromptFormat::P1, PromptFormat::P2, PromptFormat::P3}) {
      const auto prompt = render_prompt(tok, scheme, f);
      REQUIRE(prompt.size() >= 2);
      CHECK(prompt.back() == kCueTokenId);
      CHECK(prompt[prompt.size() - 2] == tok.encode(scheme.attribute_word));
      CHECK(std::count(prompt.begin(), prompt.end(), kCueTokenId) == 1);
    }
  }
}

TEST_CASE("P3 lists every option before the assistant turn") {
  const Tokenizer& tok = default_tokenizer();
  const AttributeScheme& mood = scheme_by_name("mood");
  const auto prompt = render_prompt(tok, mood, PromptFormat::P3);
  const auto asst_at =
      std::find(prompt.begin(), prompt.end(), kAsstTokenId);
  REQUIRE(asst_at != prompt.end());
  for (const std::string& label : mood.labels) {
    const auto hit = std::find(prompt.begin(), asst_at, tok.encode(label));
    CHECK(hit != asst_at);
  }
}

TEST_CASE("generation is deterministic and counts corrupted samples exactly") {
  const AttributeScheme& mood = scheme_by_name("mood");
  const PlantSpec plant = make_plant(6, 2, 4, 0.25, mood);
  const Corpus a = generate_corpus(mood, PromptFormat::P3, 400, plant, 7);
  const Corpus b = generate_corpus(mood, PromptFormat::P3, 400, plant, 7);
  CHECK(serialize_corpus(a) == serialize_corpus(b));

  std::size_t corrupted = 0;
  for (const Sample& s : a.samples) corrupted += s.is_corrupted ? 1 : 0;
  CHECK(corrupted == 100);

  const Corpus c = generate_corpus(mood, PromptFormat::P3, 400, plant, 8);
  CHECK(serialize_corpus(a) != serialize_corpus(c));
}

TEST_CASE("labels are drawn roughly uniformly") {
  const AttributeScheme& tone = scheme_by_name("tone");
  const PlantSpec plant = make_plant(6, 2, std::nullopt, 0.0, tone);
  const Corpus corpus = generate_corpus(tone, PromptFormat::P1, 500, plant, 3);
  std::size_t first = 0;
  for (const Sample& s : corpus.samples) {
    if (s.label == corpus.label_ids[0]) ++first;
  }
  CHECK(first >= 200);
  CHECK(first <= 300);
}

TEST_CASE("every sample passes input validation for the paired spec") {
  const AttributeScheme& beast = scheme_by_name("beast");
  const PlantSpec plant = make_plant(6, 2, 5, 0.5, beast);
  const Corpus corpus = generate_corpus(beast, PromptFormat::P3, 50, plant, 5);
  for (const Sample& s : corpus.samples) {
    CHECK_NOTHROW(validate_input(plant.base, to_input(s)));
    CHECK(to_input(s).audio_span == SpanRange{0, corpus.audio_len});
  }
}

TEST_CASE("generation rejects bad arguments") {
  const AttributeScheme& mood = scheme_by_name("mood");
  const AttributeScheme& tone = scheme_by_name("tone");
  const PlantSpec plant = make_plant(6, 2, std::nullopt, 0.0, mood);
  CHECK_THROWS_AS(generate_corpus(mood, PromptFormat::P3, 0, plant, 1),
                  DataError);
  CHECK_THROWS_AS(generate_corpus(tone, PromptFormat::P3, 10, plant, 1),
                  DataError);
  CHECK_THROWS_AS(generate_corpus(mood, PromptFormat::P3, 10, plant, 1, 2),
                  DataError);
}

TEST_CASE("probe/test split is seeded, disjoint and order-stable") {
  const AttributeScheme& mood = scheme_by_name("mood");
  const PlantSpec plant = make_plant(6, 2, std::nullopt, 0.0, mood);
  const Corpus corpus = generate_corpus(mood, PromptFormat::P3, 500, plant, 9);

  const auto [probe, test] = split_probe_test(corpus, 100, 42);
  CHECK(probe.size() == 100);
  CHECK(test.size() == 400);

  // Noise makes each sample's serialization unique, so set algebra over the
  // serialized records proves disjointness and coverage.
  auto lines = [](const Corpus& c) {
    std::set<std::string> out;
    for (const Sample& s : c.samples) {
      Json j;
      j["audio"] = s.audio_prefix;
      out.insert(dump_json(j));
    }
    return out;
  };
  const auto probe_lines = lines(probe);
  const auto test_lines = lines(test);
  const auto all_lines = lines(corpus);
  CHECK(probe_lines.size() == 100);
  CHECK(test_lines.size() == 400);
  std::set<std::string> unioned = probe_lines;
  unioned.insert(test_lines.begin(), test_lines.end());
  CHECK(unioned == all_lines);

  const auto [probe2, test2] = split_probe_test(corpus, 100, 42);
  CHECK(serialize_corpus(probe) == serialize_corpus(probe2));
  CHECK(serialize_corpus(test) == serialize_corpus(test2));

  const auto [probe3, test3] = split_probe_test(corpus, 499, 1);
  CHECK(probe3.size() == 499);
  CHECK(test3.size() == 1);

  CHECK_THROWS_AS(split_probe_test(corpus, 500, 1), DataError);
  CHECK_THROWS_AS(split_probe_test(corpus, 0, 1), DataError);
}

TEST_CASE("corpus file round-trips bit-exactly") {
  const AttributeScheme& tongue = scheme_by_name("tongue");
  const PlantSpec plant = make_plant(6, 3, 5, 0.3, tongue);
  const Corpus corpus = generate_corpus(tongue, PromptFormat::P2, 40, plant, 21);
  const std::string dir = fresh_dir("corpus");
  const std::string path = dir + "/corpus.jsonl";
  save_corpus(path, corpus);
  const Corpus loaded = load_corpus(path);
  CHECK(serialize_corpus(loaded) == serialize_corpus(corpus));
  CHECK(loaded.samples[7].audio_prefix == corpus.samples[7].audio_prefix);
  CHECK(loaded.format == PromptFormat::P2);
  CHECK(loaded.scheme.name == "tongue");
}

}  // TEST_SUITE
