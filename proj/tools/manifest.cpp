#include "manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "persona/errors.hpp"

namespace persona::cli {

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kArtifactVersion;
  j["seed"] = seed;
  j["parameters"] = parameters;
  auto digests = nlohmann::ordered_json::array();
  for (const auto& p : inputs) {
    digests.push_back({{"path", p.string()}, {"sha256", file_digest(p)}});
  }
  j["inputs"] = std::move(digests);
  return j;
}

void RunManifest::save(const std::filesystem::path& path) const {
  const auto text = to_json().dump(2);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text << '\n';
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  auto p = output;
  p.replace_extension();
  p += ".manifest.json";
  return p;
}

}  // namespace persona::cli
