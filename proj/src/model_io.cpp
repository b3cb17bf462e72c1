// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#include <bit>
#include <cstring>
#include <fstream>

#include "lenslab/errors.hpp"
#include "lenslab/model.hpp"

namespace lenslab {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& bytes, std::size_t& off) {
  require_data(off + 8 <= bytes.size(), "weights container truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + i]))
         << (8 * i);
  }
  off += 8;
  return v;
}

void put_doubles(std::string& out, std::span<const double> xs) {
  for (double x : xs) put_u64(out, std::bit_cast<std::uint64_t>(x));
}

void get_doubles(const std::string& payload, std::size_t& off,
                 std::span<double> xs) {
  for (double& x : xs) x = std::bit_cast<double>(get_u64(payload, off));
}

// Declaration order of the dense blocks inside the MATS section. Writer and
// reader must walk matrices identically.
template <typename Fn>
void for_each_block(ModelWeights& w, Fn&& fn) {
  fn(w.token_embedding.data);
  fn(w.positional_embedding.data);
  for (LayerWeights& lw : w.layers) {
    fn(lw.w_q.data);
    fn(lw.w_k.data);
    fn(lw.w_v.data);
    fn(lw.w_o.data);
    fn(lw.w_in.data);
    fn(lw.w_out.data);
    fn(lw.attn_norm_gain);
    fn(lw.mlp_norm_gain);
  }
  fn(w.final_norm_gain);
  fn(w.unembedding.data);
}

}  // namespace

Json model_spec_to_json(const ModelSpec& spec) {
  Json j;
  j["n_layers"] = spec.n_layers;
  j["d_model"] = spec.d_model;
  j["n_heads"] = spec.n_heads;
  j["d_head"] = spec.d_head;
  j["vocab_size"] = spec.vocab_size;
  j["max_positions"] = spec.max_positions;
  j["norm_kind"] = spec.norm_kind == NormKind::rms ? "rms" : "identity";
  return j;
}

ModelSpec model_spec_from_json(const Json& j) {
  ModelSpec spec;
  try {
    spec.n_layers = j.at("n_layers").get<std::size_t>();
    spec.d_model = j.at("d_model").get<std::size_t>();
    spec.n_heads = j.at("n_heads").get<std::size_t>();
    spec.d_head = j.at("d_head").get<std::size_t>();
    spec.vocab_size = j.at("vocab_size").get<std::size_t>();
    spec.max_positions = j.at("max_positions").get<std::size_t>();
    const std::string norm = j.at("norm_kind").get<std::string>();
    if (norm == "rms") {
      spec.norm_kind = NormKind::rms;
    } else if (norm == "identity") {
      spec.norm_kind = NormKind::identity;
    } else {
      throw DataError("unknown norm_kind: " + norm);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad model spec block: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

std::string serialize_model(
    const Model& model, const std::map<std::string, std::string>& extra_sections) {
  validate_model(model);
  std::string out(kWeightsMagic, 8);

  const std::string spec_text = dump_json(model_spec_to_json(model.spec));
  out += "SPEC";
  put_u64(out, spec_text.size());
  out += spec_text;

  std::string mats;
  // for_each_block takes a mutable reference; serialization only reads.
  auto& w = const_cast<ModelWeights&>(model.weights);
  for_each_block(w, [&mats](const std::vector<double>& block) {
    put_doubles(mats, block);
  });
  out += "MATS";
  put_u64(out, mats.size());
  out += mats;

  for (const auto& [tag, payload] : extra_sections) {
    require_data(tag.size() == 4, "section tag must be 4 bytes: " + tag);
    require_data(tag != "SPEC" && tag != "MATS",
                 "section tag reserved: " + tag);
    out += tag;
    put_u64(out, payload.size());
    out += payload;
  }
  return out;
}

LoadedModel deserialize_model(const std::string& bytes) {
  require_data(bytes.size() >= 8, "weights container truncated");
  require_data(std::memcmp(bytes.data(), kWeightsMagic, 8) == 0,
               "bad magic header in weights container");

  std::map<std::string, std::string> sections;
  std::size_t off = 8;
  while (off < bytes.size()) {
    require_data(off + 4 <= bytes.size(), "weights container truncated");
    const std::string tag = bytes.substr(off, 4);
    off += 4;
    const std::uint64_t len = get_u64(bytes, off);
    require_data(off + len <= bytes.size(),
                 "weights container truncated in section " + tag);
    require_data(!sections.count(tag), "duplicate section " + tag);
    sections[tag] = bytes.substr(off, len);
    off += len;
  }
  require_data(sections.count("SPEC"), "missing SPEC section");
  require_data(sections.count("MATS"), "missing MATS section");

  LoadedModel lm;
  lm.model.spec = model_spec_from_json(parse_json(sections["SPEC"]));
  lm.model.weights = zero_weights(lm.model.spec);

  std::size_t expected = 0;
  for_each_block(lm.model.weights, [&expected](std::vector<double>& block) {
    expected += block.size();
  });
  const std::string& mats = sections["MATS"];
  if (mats.size() != expected * sizeof(double)) {
    throw DataError("weight payload size does not match the embedded spec");
  }
  std::size_t moff = 0;
  for_each_block(lm.model.weights, [&mats, &moff](std::vector<double>& block) {
    get_doubles(mats, moff, block);
  });
  sections.erase("SPEC");
  sections.erase("MATS");
  lm.sections = std::move(sections);
  validate_model(lm.model);
  return lm;
}

void save_model(const std::string& path, const Model& model,
                const std::map<std::string, std::string>& extra_sections) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write weights file: " + path);
  const std::string bytes = serialize_model(model, extra_sections);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open weights file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace lenslab
