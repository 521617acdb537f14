#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "anoscope/types.hpp"

namespace anoscope::fixtures {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = g(rng);
    }
    return m;
}

inline std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "anoscope_tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace anoscope::fixtures
