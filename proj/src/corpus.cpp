// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/corpus.hpp"

#include <algorithm>
#include <sstream>

#include "lenslab/errors.hpp"
#include "lenslab/rng.hpp"

namespace lenslab {

Tokenizer Tokenizer::build(const std::vector<std::string>& words) {
  require_data(words.size() >= 3,
               "tokenizer: need at least the three reserved words");
  Tokenizer tok;
  tok.words_ = words;
  for (std::size_t i = 0; i < words.size(); ++i) {
    require_data(!words[i].empty(), "tokenizer: empty word");
    const bool inserted =
        tok.ids_.emplace(words[i], static_cast<TokenId>(i)).second;
    require_data(inserted, "tokenizer: duplicate word '" + words[i] + "'");
  }
  return tok;
}

TokenId Tokenizer::encode(const std::string& word) const {
  auto it = ids_.find(word);
  require_data(it != ids_.end(), "tokenizer: unknown word '" + word + "'");
  return it->second;
}

const std::string& Tokenizer::decode(TokenId id) const {
  require_data(id < words_.size(), "tokenizer: id outside vocabulary");
  return words_[id];
}

std::vector<TokenId> Tokenizer::encode_all(
    const std::vector<std::string>& words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const std::string& w : words) ids.push_back(encode(w));
  return ids;
}

bool Tokenizer::contains(const std::string& word) const {
  return ids_.count(word) > 0;
}

const std::vector<std::string>& default_vocabulary() {
  static const std::vector<std::string> kWords = {
      // reserved: turn markers and the prediction cue
      "<user>", "<asst>", "is",
      // filler
      "the", "clip", "what", "of", "?", ":", ",", ".", "options", "sound",
      // attribute words
      "tone", "mood", "tongue", "beast",
      // labels, grouped by scheme
      "red", "blue",
      "sun", "rain", "wind", "snow", "fog",
      "do", "re", "mi", "fa", "sol", "la", "ti", "ut",
      "ant", "bee", "cat", "dog", "elk", "fox", "gnu", "owl", "yak"};
  return kWords;
}

const Tokenizer& default_tokenizer() {
  static const Tokenizer kTok = Tokenizer::build(default_vocabulary());
  return kTok;
}

const std::vector<AttributeScheme>& default_schemes() {
  static const std::vector<AttributeScheme> kSchemes = {
      {"tone", "tone", {"red", "blue"}},
      {"mood", "mood", {"sun", "rain", "wind", "snow", "fog"}},
      {"tongue", "tongue", {"do", "re", "mi", "fa", "sol", "la", "ti", "ut"}},
      {"beast",
       "beast",
       {"ant", "bee", "cat", "dog", "elk", "fox", "gnu", "owl", "yak"}}};
  return kSchemes;
}

const AttributeScheme& scheme_by_name(const std::string& name) {
  for (const AttributeScheme& s : default_schemes()) {
    if (s.name == name) return s;
  }
  throw DataError("unknown attribute scheme: " + name);
}

std::string format_name(PromptFormat f) {
  switch (f) {
    case PromptFormat::P1:
      return "P1";
    case PromptFormat::P2:
      return "P2";
    default:
      return "P3";
  }
}

PromptFormat format_from_name(const std::string& name) {
  if (name == "P1") return PromptFormat::P1;
  if (name == "P2") return PromptFormat::P2;
  if (name == "P3") return PromptFormat::P3;
  throw DataError("unknown prompt format: " + name);
}

std::vector<TokenId> render_prompt(const Tokenizer& tok,
                                   const AttributeScheme& scheme,
                                   PromptFormat format) {
  std::vector<std::string> words;
  if (format != PromptFormat::P1) {
    words.insert(words.end(),
                 {"<user>", "what", scheme.attribute_word, "of", "the", "clip",
                  "?"});
    if (format == PromptFormat::P3) {
      words.insert(words.end(), {"options", ":"});
      for (std::size_t i = 0; i < scheme.labels.size(); ++i) {
        if (i > 0) words.push_back(",");
        words.push_back(scheme.labels[i]);
      }
      words.push_back(".");
    }
  }
  words.insert(words.end(),
               {"<asst>", "the", "clip", scheme.attribute_word, "is"});
  return tok.encode_all(words);
}

Corpus generate_corpus(const AttributeScheme& scheme, PromptFormat format,
                       std::size_t n, const PlantSpec& plant,
                       std::uint64_t seed, std::size_t audio_len,
                       const Tokenizer& tok) {
  require_data(n >= 1, "corpus: n must be >= 1");
  require_data(audio_len >= 3,
               "corpus: audio prefix needs sink, beacon and corruptor slots");
  validate_plant(plant);
  require_data(tok.size() == plant.base.vocab_size,
               "corpus: tokenizer size != model vocab size");

  std::vector<TokenId> label_ids;
  for (const std::string& w : scheme.labels) label_ids.push_back(tok.encode(w));
  require_data(label_ids == plant.label_alphabet,
               "corpus: plant label alphabet does not match the scheme");

  const std::size_t d = plant.base.d_model;
  const DirectionLayout dl = DirectionLayout::make(label_ids.size(), d);

  Corpus corpus;
  corpus.scheme = scheme;
  corpus.label_ids = label_ids;
  corpus.format = format;
  corpus.seed = seed;
  corpus.audio_len = audio_len;
  corpus.d_model = d;
  corpus.tokenizer = tok;

  const std::vector<TokenId> prompt = render_prompt(tok, scheme, format);
  require_data(audio_len + prompt.size() <= plant.base.max_positions,
               "corpus: sample longer than the model's max_positions");

  // Corrupted set: exactly floor(f*n) samples, chosen by seeded shuffle.
  const std::size_t n_corrupted =
      static_cast<std::size_t>(plant.degrade_fraction * static_cast<double>(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng corrupt_rng(mix_seed(seed, 0xC0DEULL));
  corrupt_rng.shuffle(order);
  std::vector<bool> corrupted(n, false);
  for (std::size_t i = 0; i < n_corrupted; ++i) corrupted[order[i]] = true;

  Rng label_rng(mix_seed(seed, 0x1ABE1ULL));
  corpus.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.prompt_tokens = prompt;
    const std::size_t label_idx = label_rng.below(label_ids.size());
    s.label = label_ids[label_idx];
    s.is_corrupted = corrupted[i];

    Rng rng(mix_seed(seed, 0xA0D10ULL + i));
    // One beacon position per sample; the corruptor slot is distinct from it.
    // Position 0 is always the sink.
    const std::size_t beacon_pos = 1 + rng.below(audio_len - 1);
    std::size_t corruptor_pos = 1 + rng.below(audio_len - 1);
    while (corruptor_pos == beacon_pos) {
      corruptor_pos = 1 + rng.below(audio_len - 1);
    }

    s.audio_prefix.assign(audio_len, Vector(d, 0.0));
    for (std::size_t p = 0; p < audio_len; ++p) {
      Vector& v = s.audio_prefix[p];
      for (std::size_t k = 0; k < d; ++k) v[k] = plant.noise_scale * rng.normal();
      v[dl.ground] += 1.0;
    }
    s.audio_prefix[0][dl.sink] += 1.0;
    s.audio_prefix[beacon_pos][dl.beacon] += 1.0;
    s.audio_prefix[beacon_pos][label_idx] += 1.0;
    if (s.is_corrupted) {
      s.audio_prefix[corruptor_pos][dl.corruptor] += 1.0;
      s.audio_prefix[corruptor_pos][label_idx] += 1.0;
    }
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

std::pair<Corpus, Corpus> split_probe_test(const Corpus& corpus,
                                           std::size_t probe_n,
                                           std::uint64_t seed) {
  require_data(probe_n >= 1, "split: probe size must be >= 1");
  require_data(probe_n < corpus.size(),
               "split: probe size must be smaller than the corpus");
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x5411ULL));
  rng.shuffle(order);

  std::vector<std::size_t> probe_idx(order.begin(), order.begin() + probe_n);
  std::vector<std::size_t> test_idx(order.begin() + probe_n, order.end());
  std::sort(probe_idx.begin(), probe_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto take = [&corpus](const std::vector<std::size_t>& idx) {
    Corpus part;
    part.scheme = corpus.scheme;
    part.label_ids = corpus.label_ids;
    part.format = corpus.format;
    part.seed = corpus.seed;
    part.audio_len = corpus.audio_len;
    part.d_model = corpus.d_model;
    part.tokenizer = corpus.tokenizer;
    part.samples.reserve(idx.size());
    for (std::size_t i : idx) part.samples.push_back(corpus.samples[i]);
    return part;
  };
  return {take(probe_idx), take(test_idx)};
}

InputSequence to_input(const Sample& sample) {
  InputSequence in;
  in.audio_prefix = sample.audio_prefix;
  in.text_tokens = sample.prompt_tokens;
  in.audio_span = SpanRange{0, sample.audio_prefix.size()};
  return in;
}

std::string serialize_corpus(const Corpus& corpus) {
  Json header;
  header["kind"] = "lenslab-corpus";
  header["version"] = 1;
  header["scheme"] = Json{{"name", corpus.scheme.name},
                          {"attribute_word", corpus.scheme.attribute_word},
                          {"labels", corpus.scheme.labels}};
  header["label_ids"] = corpus.label_ids;
  header["format"] = format_name(corpus.format);
  header["seed"] = corpus.seed;
  header["n"] = corpus.samples.size();
  header["audio_len"] = corpus.audio_len;
  header["d_model"] = corpus.d_model;
  header["vocab"] = corpus.tokenizer.words();

  std::string out = dump_json(header);
  out.push_back('\n');
  for (const Sample& s : corpus.samples) {
    Json rec;
    rec["audio"] = s.audio_prefix;
    rec["prompt"] = s.prompt_tokens;
    rec["label"] = s.label;
    rec["corrupted"] = s.is_corrupted;
    out += dump_json(rec);
    out.push_back('\n');
  }
  return out;
}

Corpus deserialize_corpus(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require_data(static_cast<bool>(std::getline(in, line)),
               "corpus file: missing header line");
  Json header = parse_json(line);
  Corpus corpus;
  try {
    require_data(header.at("kind").get<std::string>() == "lenslab-corpus",
                 "corpus file: wrong kind marker");
    require_data(header.at("version").get<int>() == 1,
                 "corpus file: unsupported version");
    corpus.scheme.name = header.at("scheme").at("name").get<std::string>();
    corpus.scheme.attribute_word =
        header.at("scheme").at("attribute_word").get<std::string>();
    corpus.scheme.labels =
        header.at("scheme").at("labels").get<std::vector<std::string>>();
    corpus.label_ids = header.at("label_ids").get<std::vector<TokenId>>();
    corpus.format = format_from_name(header.at("format").get<std::string>());
    corpus.seed = header.at("seed").get<std::uint64_t>();
    corpus.audio_len = header.at("audio_len").get<std::size_t>();
    corpus.d_model = header.at("d_model").get<std::size_t>();
    corpus.tokenizer =
        Tokenizer::build(header.at("vocab").get<std::vector<std::string>>());

    const std::size_t n = header.at("n").get<std::size_t>();
    corpus.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      require_data(static_cast<bool>(std::getline(in, line)),
                   "corpus file: fewer records than the header declares");
      Json rec = parse_json(line);
      Sample s;
      s.audio_prefix = rec.at("audio").get<std::vector<Vector>>();
      s.prompt_tokens = rec.at("prompt").get<std::vector<TokenId>>();
      s.label = rec.at("label").get<TokenId>();
      s.is_corrupted = rec.at("corrupted").get<bool>();
      for (const Vector& v : s.audio_prefix) {
        require_data(v.size() == corpus.d_model,
                     "corpus file: audio dim mismatch");
      }
      corpus.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad corpus file: ") + e.what());
  }
  return corpus;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  write_text_file(path, serialize_corpus(corpus));
}

Corpus load_corpus(const std::string& path) {
  return deserialize_corpus(read_text_file(path));
}

}  // namespace lenslab
