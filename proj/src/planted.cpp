// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include "lenslab/planted.hpp"

#include <algorithm>
#include <cmath>

#include "lenslab/errors.hpp"
#include "lenslab/rng.hpp"

namespace lenslab {

DirectionLayout DirectionLayout::make(std::size_t label_count,
                                      std::size_t d_model) {
  require_data(label_count >= 2, "planted: need at least 2 labels");
  require_data(label_count + 6 <= d_model,
               "planted: d_model too small, need |Y| + 6 dims");
  DirectionLayout dl;
  dl.label_count = label_count;
  dl.ground = label_count;
  dl.beacon = label_count + 1;
  dl.sink = label_count + 2;
  dl.corruptor = label_count + 3;
  dl.cue = label_count + 4;
  dl.text_begin = label_count + 5;
  dl.d_model = d_model;
  return dl;
}

void validate_plant(const PlantSpec& plant) {
  validate_spec(plant.base);
  require_data(plant.base.norm_kind == NormKind::identity,
               "planted: base model must use identity norm");
  const std::size_t L = plant.base.n_layers;
  require_data(plant.inject_layer >= 1 && plant.inject_layer <= L,
               "planted: inject_layer out of range");
  if (plant.degrade_layer) {
    require_data(*plant.degrade_layer > plant.inject_layer &&
                     *plant.degrade_layer <= L,
                 "planted: degrade_layer must lie in (inject_layer, L]");
  }
  require_data(plant.copy_gain >= 0.0, "planted: copy_gain must be >= 0");
  require_data(plant.degrade_gain >= 0.0, "planted: degrade_gain must be >= 0");
  require_data(plant.degrade_fraction >= 0.0 && plant.degrade_fraction <= 1.0,
               "planted: degrade_fraction must be in [0, 1]");
  require_data(plant.beacon_scale > 0.0, "planted: beacon_scale must be > 0");
  require_data(plant.noise_scale >= 0.0, "planted: noise_scale must be >= 0");

  const auto& labels = plant.label_alphabet;
  require_data(labels.size() >= 2, "planted: need at least 2 labels");
  for (TokenId t : labels) {
    require_data(t < plant.base.vocab_size,
                 "planted: label token id outside vocabulary");
  }
  std::vector<TokenId> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  require_data(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
               "planted: label token ids must be distinct");

  DirectionLayout::make(labels.size(), plant.base.d_model);
  require_data(plant.base.d_head >= labels.size(),
               "planted: d_head must be >= |Y| for the value channels");
  require_data(plant.base.d_head >= 2,
               "planted: d_head must be >= 2 for the query channels");
}

namespace {

// Installs one routing head: query channels read the cue and ground
// directions, key channels mark the target feature (score 2*kappa) and the
// sink (score kappa), and the value/output path copies the label channels
// through the map encoded in out_columns.
void install_head(LayerWeights& lw, const DirectionLayout& dl,
                  std::size_t head, std::size_t d_head, double kappa,
                  std::size_t key_feature_dim,
                  const std::vector<Vector>& out_columns) {
  const double scale = std::sqrt(static_cast<double>(d_head));
  const std::size_t off = head * d_head;
  lw.w_q.at(off + 0, dl.cue) = 1.0;
  lw.w_q.at(off + 1, dl.ground) = 1.0;
  lw.w_k.at(off + 0, key_feature_dim) = 2.0 * kappa * scale;
  lw.w_k.at(off + 1, dl.sink) = kappa * scale;
  // Query/key channels live in separate projections, so the value channels
  // can reuse head dims 0..|Y|-1.
  for (std::size_t y = 0; y < dl.label_count; ++y) {
    lw.w_v.at(off + y, y) = 1.0;
    for (std::size_t k = 0; k < dl.d_model; ++k) {
      lw.w_o.at(k, off + y) = out_columns[y][k];
    }
  }
}

}  // namespace

PlantedModel build_planted(const PlantSpec& plant) {
  validate_plant(plant);
  const ModelSpec& spec = plant.base;
  const std::size_t d = spec.d_model;
  const std::size_t n_labels = plant.label_alphabet.size();
  const DirectionLayout dl = DirectionLayout::make(n_labels, d);

  PlantedModel pm;
  pm.model.spec = spec;
  pm.model.weights = zero_weights(spec);
  ModelWeights& w = pm.model.weights;

  // Token embeddings: a random identity vector in the text subspace plus the
  // ground direction. The cue token additionally carries the cue direction
  // the planted queries key on. No token embedding touches a label direction.
  const std::size_t text_dims = d - dl.text_begin;
  const double text_scale = 1.0 / std::sqrt(static_cast<double>(text_dims));
  for (std::size_t id = 0; id < spec.vocab_size; ++id) {
    Rng rng(mix_seed(plant.seed, 0xE0B0000ULL + id));
    auto row = w.token_embedding.row(id);
    for (std::size_t k = dl.text_begin; k < d; ++k) {
      row[k] = text_scale * rng.normal();
    }
    row[dl.ground] = 1.0;
  }
  w.token_embedding.at(kCueTokenId, dl.cue) = 1.0;

  // Positional jitter: fixed seeded noise at the noise scale. It breaks lens
  // ties at text positions in a label-independent way and perturbs the
  // attention reads by at most ~kappa*epsilon.
  {
    Rng rng(mix_seed(plant.seed, 0x90500ULL));
    for (double& x : w.positional_embedding.data) {
      x = plant.noise_scale * rng.normal();
    }
  }

  // Unembedding: label tokens get mutually orthonormal rows (the standard
  // basis directions); every other row stays zero.
  for (std::size_t y = 0; y < n_labels; ++y) {
    w.unembedding.at(plant.label_alphabet[y], y) = 1.0;
  }

  // Inject head: copies gamma times the label direction from the beacon
  // position into the querying position.
  {
    LayerWeights& lw = w.layers[plant.inject_layer - 1];
    std::vector<Vector> cols(n_labels, Vector(d, 0.0));
    for (std::size_t y = 0; y < n_labels; ++y) cols[y][y] = plant.copy_gain;
    install_head(lw, dl, 0, spec.d_head, plant.beacon_scale, dl.beacon, cols);
  }

  // Degrade head: for samples carrying the corruptor beacon, subtracts beta
  // times the true label direction and adds beta times the cyclically next
  // one.
  if (plant.degrade_layer) {
    LayerWeights& lw = w.layers[*plant.degrade_layer - 1];
    const std::size_t head = spec.n_heads > 1 ? 1 : 0;
    std::vector<Vector> cols(n_labels, Vector(d, 0.0));
    for (std::size_t y = 0; y < n_labels; ++y) {
      cols[y][y] -= plant.degrade_gain;
      cols[y][(y + 1) % n_labels] += plant.degrade_gain;
    }
    install_head(lw, dl, head, spec.d_head, plant.beacon_scale, dl.corruptor,
                 cols);
  }

  validate_model(pm.model);

  PlantCertificate& cert = pm.certificate;
  cert.n_layers = spec.n_layers;
  cert.inject_layer = plant.inject_layer;
  cert.degrade_layer = plant.degrade_layer;
  cert.copy_gain = plant.copy_gain;
  cert.degrade_gain = plant.degrade_gain;
  cert.degrade_fraction = plant.degrade_fraction;
  cert.beacon_scale = plant.beacon_scale;
  cert.noise_scale = plant.noise_scale;
  cert.labels = plant.label_alphabet;
  cert.seed = plant.seed;
  return pm;
}

BandPrediction predict_lens_band(const PlantCertificate& cert,
                                 std::size_t layer, Subset subset) {
  require_data(layer <= cert.n_layers, "predict_lens_band: layer out of range");
  const double chance = 1.0 / static_cast<double>(cert.labels.size());
  if (cert.copy_gain == 0.0 || layer < cert.inject_layer) {
    return {BandOutcome::chance, chance};
  }
  // The degrade write flips the argmax when beta beats the surviving label
  // mass gamma - beta.
  const bool flips = cert.degrade_layer &&
                     2.0 * cert.degrade_gain > cert.copy_gain;
  const bool past_degrade = cert.degrade_layer && layer >= *cert.degrade_layer;
  switch (subset) {
    case Subset::clean:
      return {BandOutcome::correct_label, 1.0};
    case Subset::corrupted:
      if (past_degrade && flips) return {BandOutcome::wrong_label, 0.0};
      return {BandOutcome::correct_label, 1.0};
    case Subset::all:
    default:
      if (past_degrade && flips && cert.degrade_fraction > 0.0) {
        return {BandOutcome::mixed, 1.0 - cert.degrade_fraction};
      }
      return {BandOutcome::correct_label, 1.0};
  }
}

TokenId wrong_label_for(const PlantCertificate& cert, TokenId label) {
  for (std::size_t y = 0; y < cert.labels.size(); ++y) {
    if (cert.labels[y] == label) {
      return cert.labels[(y + 1) % cert.labels.size()];
    }
  }
  throw DataError("wrong_label_for: token is not in the label alphabet");
}

Json certificate_to_json(const PlantCertificate& cert) {
  Json j;
  j["n_layers"] = cert.n_layers;
  j["inject_layer"] = cert.inject_layer;
  if (cert.degrade_layer) {
    j["degrade_layer"] = *cert.degrade_layer;
  } else {
    j["degrade_layer"] = nullptr;
  }
  j["copy_gain"] = cert.copy_gain;
  j["degrade_gain"] = cert.degrade_gain;
  j["degrade_fraction"] = cert.degrade_fraction;
  j["beacon_scale"] = cert.beacon_scale;
  j["noise_scale"] = cert.noise_scale;
  j["labels"] = cert.labels;
  j["seed"] = cert.seed;
  return j;
}

PlantCertificate certificate_from_json(const Json& j) {
  PlantCertificate cert;
  try {
    cert.n_layers = j.at("n_layers").get<std::size_t>();
    cert.inject_layer = j.at("inject_layer").get<std::size_t>();
    if (!j.at("degrade_layer").is_null()) {
      cert.degrade_layer = j.at("degrade_layer").get<std::size_t>();
    }
    cert.copy_gain = j.at("copy_gain").get<double>();
    cert.degrade_gain = j.at("degrade_gain").get<double>();
    cert.degrade_fraction = j.at("degrade_fraction").get<double>();
    cert.beacon_scale = j.at("beacon_scale").get<double>();
    cert.noise_scale = j.at("noise_scale").get<double>();
    cert.labels = j.at("labels").get<std::vector<TokenId>>();
    cert.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad plant certificate: ") + e.what());
  }
  return cert;
}

void save_planted(const std::string& path, const PlantedModel& pm) {
  std::map<std::string, std::string> sections;
  sections[kPlantSectionTag] = dump_json(certificate_to_json(pm.certificate));
  save_model(path, pm.model, sections);
}

LoadedPlanted load_planted(const std::string& path) {
  LoadedModel lm = load_model(path);
  LoadedPlanted lp;
  lp.model = std::move(lm.model);
  auto it = lm.sections.find(kPlantSectionTag);
  if (it != lm.sections.end()) {
    lp.certificate = certificate_from_json(parse_json(it->second));
  }
  return lp;
}

}  // namespace lenslab
