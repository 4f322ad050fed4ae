#include "symplan/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace symplan {

namespace {
constexpr char kMagic[8] = {'S', 'P', 'L', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const std::string& path, const Model<float>& model, const Vocabulary& vocab,
                     const std::map<std::string, std::string>& meta) {
  nlohmann::json header;
  header["config"] = nlohmann::json::parse(model.cfg.to_json());
  header["vocabulary"] = nlohmann::json::parse(vocab.to_json());
  header["meta"] = meta;
  nlohmann::json tensors = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : model.params.entries) {
    tensors.push_back({{"name", e.name},
                       {"rows", e.value.rows()},
                       {"cols", e.value.cols()},
                       {"offset", offset}});
    offset += static_cast<std::uint64_t>(e.value.size()) * sizeof(float);
  }
  header["tensors"] = tensors;
  const std::string htext = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write checkpoint " + path);
  f.write(kMagic, sizeof(kMagic));
  f.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  const std::uint64_t hlen = htext.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  f.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& e : model.params.entries) {
    f.write(reinterpret_cast<const char*>(e.value.data()),
            static_cast<std::streamsize>(e.value.size() * sizeof(float)));
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read checkpoint " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("bad checkpoint magic in " + path);
  }
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string htext(hlen, '\0');
  f.read(htext.data(), static_cast<std::streamsize>(hlen));
  const nlohmann::json header = nlohmann::json::parse(htext);

  LoadedCheckpoint out{ModelConfig::from_json(header.at("config").dump()),
                       Vocabulary::from_json(header.at("vocabulary").dump()),
                       {},
                       Model<float>(ModelConfig::from_json(header.at("config").dump()))};
  for (auto it = header.at("meta").begin(); it != header.at("meta").end(); ++it) {
    out.meta[it.key()] = it.value().get<std::string>();
  }
  const auto& tensors = header.at("tensors");
  if (tensors.size() != out.model.params.entries.size()) {
    throw Error("checkpoint tensor count mismatch");
  }
  for (std::size_t i = 0; i < out.model.params.entries.size(); ++i) {
    auto& e = out.model.params.entries[i];
    const auto& t = tensors[i];
    if (t.at("name").get<std::string>() != e.name ||
        t.at("rows").get<int>() != e.value.rows() || t.at("cols").get<int>() != e.value.cols()) {
      throw Error("checkpoint tensor layout mismatch at " + e.name);
    }
    f.read(reinterpret_cast<char*>(e.value.data()),
           static_cast<std::streamsize>(e.value.size() * sizeof(float)));
  }
  if (!f) throw Error("truncated checkpoint " + path);
  return out;
}

}  // namespace symplan
