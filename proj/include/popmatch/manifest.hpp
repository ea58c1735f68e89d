#pragma once

#include <string>
#include <vector>

namespace popmatch {

std::string sha256_file(const std::string& path);

struct ManifestEntry {
  std::string path;
  std::string sha256;
  std::size_t bytes = 0;
};

struct Manifest {
  std::vector<ManifestEntry> files;
  std::string config_echo;  // JSON text of the run configuration

  void add(const std::string& path);
};

void write_manifest(const Manifest& manifest, const std::string& path);

}  // namespace popmatch
