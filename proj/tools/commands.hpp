#pragma once

#include <string>
#include <vector>

#include "methods.hpp"

namespace anoscope::cli {

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<OptionSpec> options;
    int (*run)(const RunConfig&);
};

const std::vector<CommandSpec>& commands();

}  // namespace anoscope::cli
