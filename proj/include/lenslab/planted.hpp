// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "lenslab/model.hpp"

namespace lenslab {

// Tokenizers built by the corpus module reserve these ids, so planted
// weights can address the prediction-cue token without a tokenizer in hand.
inline constexpr TokenId kUserTokenId = 0;
inline constexpr TokenId kAsstTokenId = 1;
inline constexpr TokenId kCueTokenId = 2;

// Where each engineered feature lives in the d_model axis. Label directions
// occupy dims [0, label_count); the named channels follow; everything from
// text_begin up is free for token-identity content.
struct DirectionLayout {
  std::size_t label_count = 0;
  std::size_t ground = 0;     // present in every position; routes idle
                              // queries toward the sink
  std::size_t beacon = 0;     // marks the audio position carrying the label
  std::size_t sink = 0;       // zero-value audio position 0
  std::size_t corruptor = 0;  // marks corrupted samples
  std::size_t cue = 0;        // the prediction-cue token's identity
  std::size_t text_begin = 0;
  std::size_t d_model = 0;

  static DirectionLayout make(std::size_t label_count, std::size_t d_model);
};

// Recipe for weights with an analytically known information pathway: one
// attention head copies the label direction from the audio beacon into the
// last position's residual stream at inject_layer; an optional second head
// at degrade_layer overwrites it with a wrong label for samples carrying a
// corruptor beacon.
struct PlantSpec {
  ModelSpec base;  // norm_kind must be identity
  std::size_t inject_layer = 1;
  double copy_gain = 1.0;                    // gamma
  std::optional<std::size_t> degrade_layer;  // > inject_layer when set
  double degrade_gain = 2.0;                 // beta
  double degrade_fraction = 0.0;             // f in [0, 1]
  std::vector<TokenId> label_alphabet;
  double beacon_scale = 20.0;  // kappa; beacon attention weight >= 1 - 1e-6
  double noise_scale = 1e-3;   // epsilon; also the positional jitter scale
  std::uint64_t seed = 1;
};

void validate_plant(const PlantSpec& plant);

enum class Subset { all, clean, corrupted };

enum class BandOutcome { chance, correct_label, wrong_label, mixed };

struct BandPrediction {
  BandOutcome outcome = BandOutcome::chance;
  double expected_info = 0.0;  // expected information score in the band
};

// Construction record carried alongside the weights; enough to answer
// predict_lens_band queries without rerunning anything.
struct PlantCertificate {
  std::size_t n_layers = 0;
  std::size_t inject_layer = 0;
  std::optional<std::size_t> degrade_layer;
  double copy_gain = 0.0;
  double degrade_gain = 0.0;
  double degrade_fraction = 0.0;
  double beacon_scale = 0.0;
  double noise_scale = 0.0;
  std::vector<TokenId> labels;
  std::uint64_t seed = 0;
};

struct PlantedModel {
  Model model;
  PlantCertificate certificate;
};

PlantedModel build_planted(const PlantSpec& plant);

// Closed-form expected lens outcome for a layer and sample subset, derived
// from the construction arithmetic. Serves as the independent oracle the
// measurement pipeline is checked against.
BandPrediction predict_lens_band(const PlantCertificate& cert,
                                 std::size_t layer, Subset subset);

// The wrong label a corrupted sample is steered to: the next label,
// cyclically in alphabet order.
TokenId wrong_label_for(const PlantCertificate& cert, TokenId label);

Json certificate_to_json(const PlantCertificate& cert);
PlantCertificate certificate_from_json(const Json& j);

inline constexpr char kPlantSectionTag[] = "PLNT";

void save_planted(const std::string& path, const PlantedModel& pm);

struct LoadedPlanted {
  Model model;
  std::optional<PlantCertificate> certificate;
};

LoadedPlanted load_planted(const std::string& path);

}  // namespace lenslab
