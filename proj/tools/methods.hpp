#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anoscope/detector.hpp"
#include "config.hpp"

namespace anoscope::cli {

struct OptionSpec {
    std::string name;
    std::string help;
};

std::vector<std::string> split_list(const std::string& s);
std::vector<double> number_list(const std::string& key, const std::string& s);
std::uint64_t seed_of(const RunConfig& cfg);

/// Settings understood by `dimensions_for`.
const std::vector<OptionSpec>& fit_options();

/// Maps a method tag and its settings onto a modeling tuple. Throws ConfigError.
ModelingDimensions dimensions_for(const RunConfig& cfg, const Dataset& train);

}  // namespace anoscope::cli
