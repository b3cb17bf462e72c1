// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lenslab/jsonio.hpp"
#include "lenslab/numkernel.hpp"

namespace lenslab {

using TokenId = std::uint32_t;

inline constexpr double kNormEps = 1e-6;

enum class NormKind { identity, rms };

struct ModelSpec {
  std::size_t n_layers = 0;
  std::size_t d_model = 0;
  std::size_t n_heads = 0;
  std::size_t d_head = 0;
  std::size_t vocab_size = 0;
  std::size_t max_positions = 0;
  NormKind norm_kind = NormKind::rms;
};

void validate_spec(const ModelSpec& spec);

struct LayerWeights {
  Matrix w_q, w_k, w_v, w_o;  // each d_model x d_model, heads stacked in rows
  Matrix w_in;                // 4*d_model x d_model
  Matrix w_out;               // d_model x 4*d_model
  Vector attn_norm_gain;      // d_model
  Vector mlp_norm_gain;       // d_model
};

struct ModelWeights {
  Matrix token_embedding;       // |V| x d
  Matrix positional_embedding;  // max_positions x d
  std::vector<LayerWeights> layers;
  Vector final_norm_gain;  // d
  Matrix unembedding;      // |V| x d
};

struct Model {
  ModelSpec spec;
  ModelWeights weights;
};

ModelWeights zero_weights(const ModelSpec& spec);

// Checks every matrix dimension against the spec and that all entries are
// finite.
void validate_model(const Model& model);

// Random rms-norm model for harness checks; deterministic in the seed.
Model random_model(const ModelSpec& spec, std::uint64_t seed);

// Half-open position range [begin, end).
struct SpanRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const SpanRange&) const = default;
};

// One analysis unit as the model sees it: continuous prefix embeddings
// standing in for encoded audio, followed by text token ids.
struct InputSequence {
  std::vector<Vector> audio_prefix;
  std::vector<TokenId> text_tokens;
  SpanRange audio_span;  // must cover exactly [0, audio_prefix.size())

  std::size_t length() const {
    return audio_prefix.size() + text_tokens.size();
  }
};

void validate_input(const ModelSpec& spec, const InputSequence& input);

enum class InterventionKind { mask_audio_attention, enrich };

// Declarative forward-pass modification; traces record what was applied.
struct InterventionSpec {
  InterventionKind kind = InterventionKind::mask_audio_attention;

  // mask_audio_attention: -inf on pre-softmax attention logits from
  // query_position to every position in the masked spans, at every layer and
  // every head. Only that query position is affected.
  int query_position = -1;  // relative; negative counts from the end
  std::optional<std::vector<SpanRange>> masked_spans;  // nullopt: audio span

  // enrich: after block source_layer+gap completes, the residual stream at
  // target_position becomes h[source_layer+gap] + scale * h[source_layer].
  std::size_t source_layer = 0;
  std::size_t gap = 5;
  double scale = 0.0;
  int target_position = -1;

  static InterventionSpec mask(
      int query = -1,
      std::optional<std::vector<SpanRange>> spans = std::nullopt);
  static InterventionSpec enrich(std::size_t source_layer, std::size_t gap,
                                 double scale, int target = -1);
};

// Full residual-stream record of one forward pass. hidden[0] is the
// post-embedding stream; hidden[l] is the stream after block l.
struct Trace {
  std::vector<Matrix> hidden;  // (L+1) entries, each positions x d
  Matrix next_token_dist;      // positions x |V|
  std::vector<InterventionSpec> applied_interventions;

  std::size_t n_layers() const { return hidden.size() - 1; }
  std::size_t n_positions() const {
    return hidden.empty() ? 0 : hidden[0].rows;
  }
};

std::size_t resolve_position(int relative, std::size_t n_positions);

// Softmax over attention scores; tolerates -inf entries (masked slots).
// Throws NumericError if every slot is masked.
Vector attn_softmax(std::span<const double> scores);

// Final norm -> unembedding -> softmax. The single code path shared by the
// forward pass and every lens projection, so layer-L projections are
// bit-identical to the model's next-token distribution.
Vector vocab_projection(const Model& model, std::span<const double> h);

Trace forward_with_trace(const Model& model, const InputSequence& input,
                         const std::vector<InterventionSpec>& interventions = {});

Vector next_token_distribution(const Trace& trace, int position);

bool traces_bit_identical(const Trace& a, const Trace& b);

// --- weights container -------------------------------------------------
//
// Binary layout: magic "LENSW001", then tagged sections, each a 4-byte tag,
// a little-endian u64 payload length, and the payload. "SPEC" holds the
// canonical-text spec block, "MATS" the row-major f64 matrices in
// declaration order. Extra sections (e.g. "PLNT") pass through opaquely.
// Round-trips are bit-exact.

inline constexpr char kWeightsMagic[9] = "LENSW001";

void save_model(const std::string& path, const Model& model,
                const std::map<std::string, std::string>& extra_sections = {});

struct LoadedModel {
  Model model;
  std::map<std::string, std::string> sections;  // extra sections by tag
};

LoadedModel load_model(const std::string& path);

std::string serialize_model(const Model& model,
                            const std::map<std::string, std::string>& extra_sections = {});
LoadedModel deserialize_model(const std::string& bytes);

Json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const Json& j);

}  // namespace lenslab
