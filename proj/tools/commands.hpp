#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace condreg::cli {

struct RunOptions {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Config and input errors surface as InvalidInput,
/// numerical breakdowns as NumericalFailure; the caller maps them to exit
/// statuses. Writes <command>.tsv, manifest.txt and plots into out_dir.
void run_command(const std::string& command, Config& config, const RunOptions& options);

}  // namespace condreg::cli
