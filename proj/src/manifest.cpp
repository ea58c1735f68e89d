#include "popmatch/manifest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <json.hpp>

#include "popmatch/error.hpp"

namespace popmatch {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("sha256: cannot open " + path);

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest init failed");
  }
  char buf[1 << 16];
  while (in.good()) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx, buf, static_cast<size_t>(got)) != 1) {
      EVP_MD_CTX_free(ctx);
      throw Error("sha256: digest update failed");
    }
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("sha256: digest final failed");
  }
  EVP_MD_CTX_free(ctx);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

void Manifest::add(const std::string& path) {
  ManifestEntry entry;
  entry.path = path;
  entry.sha256 = sha256_file(path);
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  entry.bytes = static_cast<std::size_t>(in.tellg());
  files.push_back(std::move(entry));
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  nlohmann::json j;
  j["config"] = manifest.config_echo.empty()
                    ? nlohmann::json()
                    : nlohmann::json::parse(manifest.config_echo);
  j["files"] = nlohmann::json::array();
  for (const auto& f : manifest.files)
    j["files"].push_back(
        {{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace popmatch
