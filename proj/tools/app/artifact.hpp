#pragma once

#include <fstream>
#include <map>
#include <string>

#include "config.hpp"
#include "vortexlab/surface.hpp"

namespace vlcli {

std::string sha256_file(const std::string& path);
std::string sha256_bytes(const std::string& bytes);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// One run directory: field files, certificate, JSONL iteration log, metadata with content hashes.
class Artifact {
 public:
  Artifact(const std::string& dir, const std::string& command);

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const { return dir_ + "/" + name; }

  void write_field(const vl::Surface& s, const std::string& name, const vl::Field& f);
  void write_json(const std::string& name, const json& j);
  void log(json entry);
  // metadata.json lists every emitted file with its SHA-256; call once at the end
  void finalize(json extra);

 private:
  std::string dir_;
  std::string command_;
  std::map<std::string, std::string> files_;  // name -> role
  std::ofstream log_;
  long log_lines_ = 0;
};

}  // namespace vlcli
