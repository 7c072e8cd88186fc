#include "artifact.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <filesystem>
#include <sstream>

#include "vortexlab/errors.hpp"
#include "vortexlab/fieldio.hpp"

namespace vlcli {

namespace fs = std::filesystem;

std::string sha256_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    vl::fail(vl::ErrorKind::Io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) vl::fail(vl::ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_bytes(ss.str());
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) vl::fail(vl::ErrorKind::Io, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    vl::fail(vl::ErrorKind::Io, path + ": malformed JSON (" + e.what() + ")");
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) vl::fail(vl::ErrorKind::Io, "cannot write " + path);
  out << j.dump(2) << "\n";
}

Artifact::Artifact(const std::string& dir, const std::string& command) : dir_(dir), command_(command) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) vl::fail(vl::ErrorKind::Io, "cannot create output directory " + dir_ + ": " + ec.message());
  log_.open(path("log.jsonl"), std::ios::trunc);
  if (!log_) vl::fail(vl::ErrorKind::Io, "cannot open " + path("log.jsonl"));
  files_["log.jsonl"] = "log";
}

void Artifact::write_field(const vl::Surface& s, const std::string& name, const vl::Field& f) {
  std::string file = name + ".vlf";
  vl::write_field(path(file), vl::header_for(s, name), f);
  files_[file] = "field";
}

void Artifact::write_json(const std::string& name, const json& j) {
  write_json_file(path(name), j);
  files_[name] = name == "certificate.json" ? "certificate" : "json";
}

void Artifact::log(json entry) {
  log_ << entry.dump() << "\n";
  ++log_lines_;
}

void Artifact::finalize(json extra) {
  log_.close();
  json meta;
  meta["command"] = command_;
  meta["versions"] = {{"vortexlab", VORTEXLAB_VERSION},
                      {"compiler", __VERSION__},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                      {"openssl", OpenSSL_version(OPENSSL_VERSION)}};
  for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
  meta["log_lines"] = log_lines_;
  json files = json::object();
  for (const auto& [name, role] : files_) files[name] = {{"role", role}, {"sha256", sha256_file(path(name))}};
  meta["files"] = files;
  write_json_file(path("metadata.json"), meta);
}

}  // namespace vlcli
