#pragma once

#include <string>

#include "fpkdescent/config.hpp"

namespace fpkd {

/// Entry point of the fpkdescent binary. Exit codes: 0 success, 1 usage or
/// config error, 2 numerical failure or failed verification checks.
int run_cli(int argc, const char* const* argv);

int cmd_solve(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_verify(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, bool quiet);

} // namespace fpkd
