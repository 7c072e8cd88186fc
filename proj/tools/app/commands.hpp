#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "vortexlab/errors.hpp"

namespace vlcli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitAssumption = 4;

int exit_code(vl::ErrorKind k);

const std::vector<std::string>& solve_commands();

// Runs a solve command and writes the artifact into out; returns the certificate.
json run_command(const std::string& command, const RunConfig& cfg, const std::string& out, bool quiet = true);

struct VerifyReport {
  bool match = false;
  std::vector<std::string> hash_mismatch;
  json stored;
  json recomputed;
};

// Re-certifies an artifact from its own files; expected_command empty accepts any.
VerifyReport recertify(const std::string& dir, const std::string& expected_command = {});

// P5 heatmap plus a JSON sidecar with the scaling; returns the image path.
std::string export_heatmap(const std::string& field_file, const std::string& out_dir);

int run_cli(int argc, char** argv);

}  // namespace vlcli
