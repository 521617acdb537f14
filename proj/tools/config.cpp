#include "config.hpp"

#include <cstdlib>
#include <fstream>

#include "anoscope/types.hpp"

namespace anoscope::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig(std::string command, std::set<std::string> allowed)
    : command_(std::move(command)), allowed_(std::move(allowed)) {}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IOError, "cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::ConfigError, path + ":" + std::to_string(line_no) + ": expected key=value");
        }
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!allowed_.count(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' for " + command_);
    values_[key] = value;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) {
        throw Error(ErrorCode::ConfigError, command_ + " requires --" + key);
    }
    return it->second;
}

std::optional<double> RunConfig::number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (it->second.empty() || *end != '\0') {
        throw Error(ErrorCode::ConfigError, "--" + key + " expects a number, got '" + it->second + "'");
    }
    return v;
}

double RunConfig::number(const std::string& key, double fallback) const { return number(key).value_or(fallback); }

long long RunConfig::integer(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (it->second.empty() || *end != '\0') {
        throw Error(ErrorCode::ConfigError, "--" + key + " expects an integer, got '" + it->second + "'");
    }
    return v;
}

bool RunConfig::flag(const std::string& key) const {
    const std::string v = get(key, "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::ConfigError, "--" + key + " expects true or false, got '" + v + "'");
}

}  // namespace anoscope::cli
