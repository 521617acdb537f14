#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

namespace anoscope::cli {

/// Flat key=value settings for one command. File values are loaded first,
/// command-line flags override them, and keys outside `allowed` are rejected.
class RunConfig {
public:
    RunConfig(std::string command, std::set<std::string> allowed);

    const std::string& command() const { return command_; }

    /// `key=value` per line; blank lines and `#` comments are skipped.
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::optional<double> number(const std::string& key) const;
    long long integer(const std::string& key, long long fallback) const;
    bool flag(const std::string& key) const;

private:
    std::string command_;
    std::set<std::string> allowed_;
    std::map<std::string, std::string> values_;
};

}  // namespace anoscope::cli
