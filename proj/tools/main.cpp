#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anoscope/types.hpp"
#include "commands.hpp"

namespace {

int report(const std::string& command, const std::string& code, const std::string& message, int exit_code) {
    nlohmann::ordered_json j;
    j["error"] = code;
    j["message"] = message;
    if (!command.empty()) j["command"] = command;
    std::cerr << j.dump() << '\n';
    return exit_code;
}

int exit_code_for(anoscope::ErrorCode c) {
    switch (c) {
        case anoscope::ErrorCode::ConfigError:
        case anoscope::ErrorCode::InvalidConfig: return 2;
        case anoscope::ErrorCode::IOError:
        case anoscope::ErrorCode::MissingFile: return 3;
        default: return 1;
    }
}

bool is_flag(const std::string& name) { return name.rfind("no-", 0) == 0; }

}  // namespace

int main(int argc, char** argv) {
    using namespace anoscope::cli;
    CLI::App app{"anoscope: anomaly detection toolkit"};
    app.require_subcommand(1);

    struct Bound {
        const CommandSpec* spec;
        CLI::App* sub;
        std::string config_path;
        std::map<std::string, std::string> values;
        std::map<std::string, bool> flags;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<Bound> bound(commands().size());
    for (std::size_t i = 0; i < commands().size(); ++i) {
        auto& b = bound[i];
        b.spec = &commands()[i];
        b.sub = app.add_subcommand(b.spec->name, b.spec->help);
        b.sub->add_option("--config", b.config_path, "key=value file; flags override it");
        for (const auto& opt : b.spec->options) {
            if (is_flag(opt.name)) {
                b.options[opt.name] = b.sub->add_flag("--" + opt.name, b.flags[opt.name], opt.help);
            } else {
                b.options[opt.name] = b.sub->add_option("--" + opt.name, b.values[opt.name], opt.help);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report("", "ConfigError", e.what(), 2);
    }

    for (auto& b : bound) {
        if (!b.sub->parsed()) continue;
        const std::string& name = b.spec->name;
        try {
            std::set<std::string> allowed;
            for (const auto& opt : b.spec->options) allowed.insert(opt.name);
            RunConfig cfg(name, allowed);
            if (!b.config_path.empty()) cfg.load_file(b.config_path);
            for (const auto& [key, opt] : b.options) {
                if (opt->count() == 0) continue;
                cfg.set(key, is_flag(key) ? (b.flags[key] ? "true" : "false") : b.values[key]);
            }
            return b.spec->run(cfg);
        } catch (const anoscope::Error& e) {
            return report(name, anoscope::to_string(e.code()), e.what(), exit_code_for(e.code()));
        } catch (const std::exception& e) {
            return report(name, "InternalError", e.what(), 1);
        }
    }
    return report("", "ConfigError", "no command given", 2);
}
