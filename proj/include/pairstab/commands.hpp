#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pairstab/config.hpp"
#include "pairstab/error.hpp"

namespace pairstab {

// Process exit statuses shared by every subcommand.
enum ExitStatus : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_certification = 3,
  exit_acceptance_fail = 4,
  exit_io = 5,
};

int exit_status_for(ErrorCode code);

struct CommandOptions {
  Config config;
  unsigned jobs = 1;
  std::string out_dir = "out";
  std::optional<std::string> run_path;     // bound: use this run record
  std::optional<std::string> report_path;  // bound: re-derive this report
};

struct CommandResult {
  int status = exit_ok;
  std::vector<std::string> lines;  // printed to stdout
  std::vector<std::string> files;  // written, in order
};

CommandResult cmd_gen_data(const CommandOptions& opts);
CommandResult cmd_train(const CommandOptions& opts);
CommandResult cmd_stability(const CommandOptions& opts);
CommandResult cmd_bound(const CommandOptions& opts);
CommandResult cmd_sweep(const CommandOptions& opts);
CommandResult cmd_chernoff(const CommandOptions& opts);

}  // namespace pairstab
