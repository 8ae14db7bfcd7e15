#include "gcalstm/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "gcalstm/config_json.hpp"
#include "gcalstm/errors.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian");

namespace gcalstm {

namespace {

constexpr char kMagic[8] = {'G', 'C', 'A', 'L', 'S', 'T', 'M', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw ParseError("checkpoint " + path + ": truncated header");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model) {
  nlohmann::json manifest;
  manifest["model"] = model_config_to_json(model.config());
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& t : model.params().tensors()) {
    tensors.push_back({{"name", t.name}, {"rows", t.value.rows}, {"cols", t.value.cols}});
  }
  manifest["tensors"] = tensors;
  const std::string manifest_str = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, manifest_str.size());
  out.write(manifest_str.data(), static_cast<std::streamsize>(manifest_str.size()));
  for (const auto& t : model.params().tensors()) {
    out.write(reinterpret_cast<const char*>(t.value.data.data()),
              static_cast<std::streamsize>(t.value.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);

  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("checkpoint " + path + ": bad magic");
  }
  const std::uint64_t manifest_len = read_u64(in, path);
  std::string manifest_str(manifest_len, '\0');
  in.read(manifest_str.data(), static_cast<std::streamsize>(manifest_len));
  if (!in) throw ParseError("checkpoint " + path + ": truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(manifest_str);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path + ": manifest is not valid JSON: " + e.what());
  }

  Model model(model_config_from_json(manifest.at("model")));
  const auto& tensors = manifest.at("tensors");
  auto& registered = model.params().tensors();
  if (tensors.size() != registered.size()) {
    throw ContractError("checkpoint " + path + ": holds " + std::to_string(tensors.size()) +
                        " tensors but the configuration requires " + std::to_string(registered.size()));
  }
  for (std::size_t i = 0; i < registered.size(); ++i) {
    const std::string name = tensors[i].at("name").get<std::string>();
    const std::size_t rows = tensors[i].at("rows").get<std::size_t>();
    const std::size_t cols = tensors[i].at("cols").get<std::size_t>();
    if (name != registered[i].name) {
      throw ContractError("checkpoint " + path + ": tensor '" + name + "' does not match expected '" +
                          registered[i].name + "'");
    }
    if (rows != registered[i].value.rows || cols != registered[i].value.cols) {
      throw ContractError("checkpoint " + path + ": tensor '" + name + "' has shape " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " but the configuration requires " +
                          std::to_string(registered[i].value.rows) + "x" +
                          std::to_string(registered[i].value.cols));
    }
    in.read(reinterpret_cast<char*>(registered[i].value.data.data()),
            static_cast<std::streamsize>(registered[i].value.data.size() * sizeof(double)));
    if (!in) throw ParseError("checkpoint " + path + ": truncated payload at tensor '" + name + "'");
  }
  in.peek();
  if (!in.eof()) throw ParseError("checkpoint " + path + ": trailing bytes after payload");
  return model;
}

}  // namespace gcalstm
