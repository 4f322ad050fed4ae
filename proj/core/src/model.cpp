#include "symplan/model.hpp"

#include "json.hpp"

namespace symplan {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::encoder_only: return "encoder_only";
    case Variant::encoder_decoder: return "encoder_decoder";
    case Variant::decoder_only: return "decoder_only";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  for (Variant v : {Variant::encoder_only, Variant::encoder_decoder, Variant::decoder_only}) {
    if (name == variant_name(v)) return v;
  }
  throw Error("unknown variant '" + name + "'");
}

void ModelConfig::validate() const {
  if (d <= 0 || heads <= 0 || d % heads != 0) throw Error("model config: d must divide by heads");
  if (k <= 0 || k > d) throw Error("model config: need 0 < k <= d");
  if (vocab_size <= 0) throw Error("model config: vocab_size unset");
  if (n_layers < 0) throw Error("model config: n_layers < 0");
  if (variant != Variant::decoder_only && atom_width <= 0) {
    throw Error("model config: atom_width unset");
  }
  if (variant == Variant::decoder_only) {
    if (positional != Positional::learned_absolute) {
      throw Error("model config: decoder_only requires learned_absolute positions");
    }
    if (max_positions <= 0) throw Error("model config: max_positions unset");
  } else if (positional != Positional::none) {
    throw Error("model config: encoder variants use no positional encoding");
  }
}

ModelConfig ModelConfig::desk(Variant v, int vocab_size, int atom_width) {
  ModelConfig c;
  c.d = 64;
  c.heads = 4;
  c.n_layers = 3;
  c.k = 16;
  c.vocab_size = vocab_size;
  c.atom_width = atom_width;
  c.variant = v;
  if (v == Variant::decoder_only) {
    c.positional = Positional::learned_absolute;
    c.max_positions = 512;
  }
  return c;
}

ModelConfig ModelConfig::paper(Variant v, int vocab_size, int atom_width) {
  ModelConfig c = desk(v, vocab_size, atom_width);
  c.d = 768;
  c.heads = 12;
  c.n_layers = 12;
  c.k = 32;
  return c;
}

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["d"] = d;
  j["heads"] = heads;
  j["n_layers"] = n_layers;
  j["k"] = k;
  j["vocab_size"] = vocab_size;
  j["atom_width"] = atom_width;
  j["variant"] = variant_name(variant);
  j["use_layernorm"] = use_layernorm;
  j["qkv_bias"] = qkv_bias;
  j["positional"] = positional == Positional::none ? "none" : "learned_absolute";
  j["max_positions"] = max_positions;
  j["mlp_hidden"] = mlp_hidden;
  j["dropout"] = dropout;
  j["tied_output"] = tied_output;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ModelConfig c;
  c.d = j.at("d").get<int>();
  c.heads = j.at("heads").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.k = j.at("k").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.atom_width = j.at("atom_width").get<int>();
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  c.use_layernorm = j.at("use_layernorm").get<bool>();
  c.qkv_bias = j.at("qkv_bias").get<bool>();
  c.positional = j.at("positional").get<std::string>() == "none" ? Positional::none
                                                                 : Positional::learned_absolute;
  c.max_positions = j.at("max_positions").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.tied_output = j.value("tied_output", true);
  return c;
}

}  // namespace symplan
