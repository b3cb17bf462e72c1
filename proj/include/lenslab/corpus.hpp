// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lenslab/planted.hpp"

namespace lenslab {

// Toy word-level tokenizer: a bijective word<->id map. Ids 0, 1, 2 are
// reserved for the user turn marker, the assistant turn marker, and the
// prediction-cue word, in that order.
class Tokenizer {
 public:
  static Tokenizer build(const std::vector<std::string>& words);

  TokenId encode(const std::string& word) const;
  const std::string& decode(TokenId id) const;
  std::vector<TokenId> encode_all(const std::vector<std::string>& words) const;
  bool contains(const std::string& word) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Canonical word list: turn markers, cue word, filler words, attribute
// words, then the label words of all default schemes.
const std::vector<std::string>& default_vocabulary();
const Tokenizer& default_tokenizer();

struct AttributeScheme {
  std::string name;
  std::string attribute_word;
  std::vector<std::string> labels;
};

// Four schemes with 2, 5, 8 and 9 labels.
const std::vector<AttributeScheme>& default_schemes();
const AttributeScheme& scheme_by_name(const std::string& name);

enum class PromptFormat { P1, P2, P3 };

std::string format_name(PromptFormat f);
PromptFormat format_from_name(const std::string& name);

// Prompt structure contract: the penultimate token is the attribute word
// and the last token is the cue word. P2 prepends a user question; P3 also
// lists every label as an option before the assistant turn.
std::vector<TokenId> render_prompt(const Tokenizer& tok,
                                   const AttributeScheme& scheme,
                                   PromptFormat format);

struct Sample {
  std::vector<Vector> audio_prefix;
  std::vector<TokenId> prompt_tokens;
  TokenId label = 0;
  bool is_corrupted = false;
};

struct Corpus {
  AttributeScheme scheme;
  std::vector<TokenId> label_ids;  // tokenized scheme labels, in scheme order
  PromptFormat format = PromptFormat::P3;
  std::uint64_t seed = 0;
  std::size_t audio_len = 0;
  std::size_t d_model = 0;
  Tokenizer tokenizer;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

inline constexpr std::size_t kDefaultAudioLen = 8;

// Labels are drawn uniformly (seeded); exactly floor(f*n) samples carry the
// corruptor beacon, chosen by a seeded shuffle; every audio coordinate gets
// isotropic noise at the plant's noise scale.
Corpus generate_corpus(const AttributeScheme& scheme, PromptFormat format,
                       std::size_t n, const PlantSpec& plant,
                       std::uint64_t seed,
                       std::size_t audio_len = kDefaultAudioLen,
                       const Tokenizer& tok = default_tokenizer());

// Disjoint, seeded, order-stable partition into (probe, test).
std::pair<Corpus, Corpus> split_probe_test(const Corpus& corpus,
                                           std::size_t probe_n,
                                           std::uint64_t seed);

InputSequence to_input(const Sample& sample);

// JSON-lines container: a header object followed by one record per sample.
// Round-trips bit-exactly.
std::string serialize_corpus(const Corpus& corpus);
Corpus deserialize_corpus(const std::string& text);
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

}  // namespace lenslab
