// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "lenslab/errors.hpp"
#include "lenslab/rng.hpp"

namespace lenslab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

void check_matrix(const Matrix& m, std::size_t rows, std::size_t cols,
                  const char* name) {
  require_data(m.rows == rows && m.cols == cols,
               std::string("weight shape mismatch for ") + name);
  require_data(m.data.size() == rows * cols,
               std::string("weight storage mismatch for ") + name);
  require_data(all_finite(m.data), std::string("non-finite entries in ") + name);
}

void check_vector(const Vector& v, std::size_t dim, const char* name) {
  require_data(v.size() == dim, std::string("gain dim mismatch for ") + name);
  require_data(all_finite(v), std::string("non-finite entries in ") + name);
}

}  // namespace

void validate_spec(const ModelSpec& spec) {
  require_data(spec.n_layers >= 1, "spec: n_layers must be >= 1");
  require_data(spec.vocab_size >= 2, "spec: vocab_size must be >= 2");
  require_data(spec.d_model >= 1, "spec: d_model must be >= 1");
  require_data(spec.n_heads >= 1, "spec: n_heads must be >= 1");
  require_data(spec.n_heads * spec.d_head == spec.d_model,
               "spec: n_heads * d_head != d_model");
  require_data(spec.max_positions >= 1, "spec: max_positions must be >= 1");
}

ModelWeights zero_weights(const ModelSpec& spec) {
  const std::size_t d = spec.d_model;
  ModelWeights w;
  w.token_embedding = Matrix(spec.vocab_size, d);
  w.positional_embedding = Matrix(spec.max_positions, d);
  w.layers.resize(spec.n_layers);
  for (auto& lw : w.layers) {
    lw.w_q = Matrix(d, d);
    lw.w_k = Matrix(d, d);
    lw.w_v = Matrix(d, d);
    lw.w_o = Matrix(d, d);
    lw.w_in = Matrix(4 * d, d);
    lw.w_out = Matrix(d, 4 * d);
    lw.attn_norm_gain = Vector(d, 1.0);
    lw.mlp_norm_gain = Vector(d, 1.0);
  }
  w.final_norm_gain = Vector(d, 1.0);
  w.unembedding = Matrix(spec.vocab_size, d);
  return w;
}

void validate_model(const Model& model) {
  validate_spec(model.spec);
  const ModelSpec& s = model.spec;
  const ModelWeights& w = model.weights;
  const std::size_t d = s.d_model;
  check_matrix(w.token_embedding, s.vocab_size, d, "token_embedding");
  check_matrix(w.positional_embedding, s.max_positions, d,
               "positional_embedding");
  require_data(w.layers.size() == s.n_layers,
               "weights: layer count != spec n_layers");
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const LayerWeights& lw = w.layers[l];
    check_matrix(lw.w_q, d, d, "w_q");
    check_matrix(lw.w_k, d, d, "w_k");
    check_matrix(lw.w_v, d, d, "w_v");
    check_matrix(lw.w_o, d, d, "w_o");
    check_matrix(lw.w_in, 4 * d, d, "w_in");
    check_matrix(lw.w_out, d, 4 * d, "w_out");
    check_vector(lw.attn_norm_gain, d, "attn_norm_gain");
    check_vector(lw.mlp_norm_gain, d, "mlp_norm_gain");
  }
  check_vector(w.final_norm_gain, d, "final_norm_gain");
  check_matrix(w.unembedding, s.vocab_size, d, "unembedding");
}

Model random_model(const ModelSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  Model m;
  m.spec = spec;
  m.weights = zero_weights(spec);
  Rng rng(mix_seed(seed, 0x52414E44ULL));
  const double wscale = 0.5 / std::sqrt(static_cast<double>(spec.d_model));
  auto fill = [&rng](Matrix& mat, double scale) {
    for (double& x : mat.data) x = scale * rng.normal();
  };
  fill(m.weights.token_embedding, 0.1);
  fill(m.weights.positional_embedding, 0.1);
  for (LayerWeights& lw : m.weights.layers) {
    fill(lw.w_q, wscale);
    fill(lw.w_k, wscale);
    fill(lw.w_v, wscale);
    fill(lw.w_o, wscale);
    fill(lw.w_in, wscale);
    fill(lw.w_out, wscale);
    for (double& g : lw.attn_norm_gain) g = 1.0 + 0.05 * rng.normal();
    for (double& g : lw.mlp_norm_gain) g = 1.0 + 0.05 * rng.normal();
  }
  for (double& g : m.weights.final_norm_gain) g = 1.0 + 0.05 * rng.normal();
  fill(m.weights.unembedding, 0.1);
  validate_model(m);
  return m;
}

void validate_input(const ModelSpec& spec, const InputSequence& input) {
  require_data(input.length() >= 1, "input: empty sequence");
  require_data(input.length() <= spec.max_positions,
               "input: sequence longer than max_positions");
  require_data(input.audio_span.begin == 0 &&
                   input.audio_span.end == input.audio_prefix.size(),
               "input: audio_span must cover exactly the audio prefix");
  for (const Vector& a : input.audio_prefix) {
    require_data(a.size() == spec.d_model,
                 "input: audio embedding dim != d_model");
    require_data(all_finite(a), "input: non-finite audio embedding");
  }
  for (TokenId t : input.text_tokens) {
    require_data(t < spec.vocab_size, "input: token id outside vocabulary");
  }
}

InterventionSpec InterventionSpec::mask(
    int query, std::optional<std::vector<SpanRange>> spans) {
  InterventionSpec s;
  s.kind = InterventionKind::mask_audio_attention;
  s.query_position = query;
  s.masked_spans = std::move(spans);
  return s;
}

InterventionSpec InterventionSpec::enrich(std::size_t source_layer,
                                          std::size_t gap, double scale,
                                          int target) {
  InterventionSpec s;
  s.kind = InterventionKind::enrich;
  s.source_layer = source_layer;
  s.gap = gap;
  s.scale = scale;
  s.target_position = target;
  return s;
}

std::size_t resolve_position(int relative, std::size_t n_positions) {
  long long pos = relative;
  if (pos < 0) pos += static_cast<long long>(n_positions);
  require_data(pos >= 0 && pos < static_cast<long long>(n_positions),
               "position out of range");
  return static_cast<std::size_t>(pos);
}

Vector attn_softmax(std::span<const double> scores) {
  Vector out(scores.begin(), scores.end());
  double max = kNegInf;
  for (double s : out) max = std::max(max, s);
  if (max == kNegInf) {
    throw NumericError("attention row fully masked");
  }
  double sum = 0.0;
  for (double& s : out) {
    s = std::exp(s - max);
    sum += s;
  }
  for (double& s : out) s /= sum;
  return out;
}

Vector vocab_projection(const Model& model, std::span<const double> h) {
  const ModelSpec& spec = model.spec;
  require_data(h.size() == spec.d_model, "projection: hidden dim != d_model");
  Vector normed(spec.d_model);
  if (spec.norm_kind == NormKind::rms) {
    rmsnorm_into(h, model.weights.final_norm_gain, kNormEps, normed);
  } else {
    std::copy(h.begin(), h.end(), normed.begin());
  }
  Vector logits(spec.vocab_size);
  matvec_into(model.weights.unembedding, normed, logits);
  softmax_inplace(logits);
  return logits;
}

namespace {

struct MaskPlan {
  std::size_t query = 0;
  std::vector<SpanRange> spans;
};

struct EnrichPlan {
  std::size_t source = 0;
  std::size_t patch_layer = 0;
  std::size_t target = 0;
  double scale = 0.0;
};

void norm_into(NormKind kind, std::span<const double> v,
               std::span<const double> gain, std::span<double> out) {
  if (kind == NormKind::rms) {
    rmsnorm_into(v, gain, kNormEps, out);
  } else {
    std::copy(v.begin(), v.end(), out.begin());
  }
}

}  // namespace

Trace forward_with_trace(const Model& model, const InputSequence& input,
                         const std::vector<InterventionSpec>& interventions) {
  const ModelSpec& spec = model.spec;
  const ModelWeights& w = model.weights;
  validate_input(spec, input);

  const std::size_t n = input.length();
  const std::size_t d = spec.d_model;
  const std::size_t L = spec.n_layers;
  const std::size_t n_heads = spec.n_heads;
  const std::size_t dh = spec.d_head;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  std::vector<MaskPlan> masks;
  std::vector<EnrichPlan> patches;
  for (const InterventionSpec& iv : interventions) {
    if (iv.kind == InterventionKind::mask_audio_attention) {
      MaskPlan mp;
      mp.query = resolve_position(iv.query_position, n);
      mp.spans = iv.masked_spans.value_or(
          std::vector<SpanRange>{input.audio_span});
      for (const SpanRange& sp : mp.spans) {
        require_data(sp.begin <= sp.end, "mask: span begin > end");
        require_data(sp.end <= n, "mask: span outside sequence bounds");
      }
      masks.push_back(std::move(mp));
    } else {
      require_data(iv.source_layer >= 1, "enrich: source layer must be >= 1");
      require_data(iv.gap >= 1, "enrich: gap must be >= 1");
      require_data(iv.source_layer + iv.gap <= L,
                   "enrich: source layer + gap exceeds layer count");
      require_data(std::isfinite(iv.scale), "enrich: non-finite scale");
      EnrichPlan ep;
      ep.source = iv.source_layer;
      ep.patch_layer = iv.source_layer + iv.gap;
      ep.target = resolve_position(iv.target_position, n);
      ep.scale = iv.scale;
      patches.push_back(ep);
    }
  }

  Trace tr;
  tr.applied_interventions = interventions;
  tr.hidden.assign(L + 1, Matrix(n, d));

  // Layer 0: embeddings plus learned positions. The audio prefix enters as
  // raw continuous vectors.
  Matrix& h0 = tr.hidden[0];
  for (std::size_t p = 0; p < input.audio_prefix.size(); ++p) {
    auto row = h0.row(p);
    auto pos = w.positional_embedding.row(p);
    for (std::size_t k = 0; k < d; ++k) row[k] = input.audio_prefix[p][k] + pos[k];
  }
  for (std::size_t t = 0; t < input.text_tokens.size(); ++t) {
    const std::size_t p = input.audio_prefix.size() + t;
    auto row = h0.row(p);
    auto emb = w.token_embedding.row(input.text_tokens[t]);
    auto pos = w.positional_embedding.row(p);
    for (std::size_t k = 0; k < d; ++k) row[k] = emb[k] + pos[k];
  }

  Matrix normed(n, d), qs(n, d), ks(n, d), vs(n, d);
  Vector scores, weights_row, ctx(d), attn_out(d), tmp(d);
  Vector mlp_hidden(4 * d), mlp_out(d);

  for (std::size_t l = 1; l <= L; ++l) {
    const LayerWeights& lw = w.layers[l - 1];
    const Matrix& prev = tr.hidden[l - 1];
    Matrix& cur = tr.hidden[l];
    cur = prev;

    // Attention sublayer (pre-norm, causal).
    for (std::size_t i = 0; i < n; ++i) {
      norm_into(spec.norm_kind, prev.row(i), lw.attn_norm_gain, normed.row(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
      matvec_into(lw.w_q, normed.row(i), qs.row(i));
      matvec_into(lw.w_k, normed.row(i), ks.row(i));
      matvec_into(lw.w_v, normed.row(i), vs.row(i));
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(ctx.begin(), ctx.end(), 0.0);
      for (std::size_t h = 0; h < n_heads; ++h) {
        auto qh = qs.row(i).subspan(h * dh, dh);
        scores.assign(i + 1, 0.0);
        for (std::size_t j = 0; j <= i; ++j) {
          scores[j] = dot(qh, ks.row(j).subspan(h * dh, dh)) * inv_sqrt_dh;
        }
        for (const MaskPlan& mp : masks) {
          if (mp.query != i) continue;
          for (const SpanRange& sp : mp.spans) {
            const std::size_t hi = std::min(sp.end, i + 1);
            for (std::size_t j = sp.begin; j < hi; ++j) scores[j] = kNegInf;
          }
        }
        try {
          weights_row = attn_softmax(scores);
        } catch (const NumericError&) {
          throw NumericError("attention row fully masked at layer " +
                             std::to_string(l) + " position " +
                             std::to_string(i));
        }
        auto ch = std::span<double>(ctx).subspan(h * dh, dh);
        for (std::size_t j = 0; j <= i; ++j) {
          const double a = weights_row[j];
          auto vh = vs.row(j).subspan(h * dh, dh);
          for (std::size_t k = 0; k < dh; ++k) ch[k] += a * vh[k];
        }
      }
      matvec_into(lw.w_o, ctx, attn_out);
      auto row = cur.row(i);
      for (std::size_t k = 0; k < d; ++k) row[k] += attn_out[k];
    }

    // MLP sublayer.
    for (std::size_t i = 0; i < n; ++i) {
      norm_into(spec.norm_kind, cur.row(i), lw.mlp_norm_gain, tmp);
      matvec_into(lw.w_in, tmp, mlp_hidden);
      for (double& x : mlp_hidden) x = gelu(x);
      matvec_into(lw.w_out, mlp_hidden, mlp_out);
      auto row = cur.row(i);
      for (std::size_t k = 0; k < d; ++k) row[k] += mlp_out[k];
    }

    // Enrichment patches that land on this post-block stream. scale == 0 is
    // skipped outright so it stays bit-identical to the plain pass.
    for (const EnrichPlan& ep : patches) {
      if (ep.patch_layer != l || ep.scale == 0.0) continue;
      auto row = cur.row(ep.target);
      auto src = tr.hidden[ep.source].row(ep.target);
      for (std::size_t k = 0; k < d; ++k) row[k] += ep.scale * src[k];
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (!all_finite(cur.row(i))) {
        throw NumericError("non-finite activation at layer " +
                           std::to_string(l) + " position " +
                           std::to_string(i));
      }
    }
  }

  tr.next_token_dist = Matrix(n, spec.vocab_size);
  for (std::size_t i = 0; i < n; ++i) {
    Vector dist = vocab_projection(model, tr.hidden[L].row(i));
    std::copy(dist.begin(), dist.end(), tr.next_token_dist.row(i).begin());
  }
  return tr;
}

Vector next_token_distribution(const Trace& trace, int position) {
  const std::size_t p = resolve_position(position, trace.n_positions());
  auto row = trace.next_token_dist.row(p);
  return Vector(row.begin(), row.end());
}

bool traces_bit_identical(const Trace& a, const Trace& b) {
  if (a.hidden.size() != b.hidden.size()) return false;
  auto same = [](const Matrix& x, const Matrix& y) {
    return x.same_shape(y) &&
           std::memcmp(x.data.data(), y.data.data(),
                       x.data.size() * sizeof(double)) == 0;
  };
  for (std::size_t l = 0; l < a.hidden.size(); ++l) {
    if (!same(a.hidden[l], b.hidden[l])) return false;
  }
  return same(a.next_token_dist, b.next_token_dist);
}

}  // namespace lenslab
