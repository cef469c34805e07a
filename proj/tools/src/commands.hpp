#pragma once

#include <string>
#include <vector>

#include "lyap/cli/run.hpp"
#include "params.hpp"

namespace lyap::cli {

struct CommandSpec {
  std::string name;
  std::string description;
  std::string columns;
  RunOutput (*fn)(const ExperimentConfig&, const Params&);
};

const std::vector<CommandSpec>& command_table();

}  // namespace lyap::cli
