#pragma once

// Command-line front end: `causalorder <subcommand> [--key value ...]`.
// Every flag is also a config-file key; precedence is defaults < --config file < flags.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace causal::cli {

// Flat key/value settings. Text form: one `key = value` per line, `#` starts a
// comment, blank lines ignored. serialize() writes sorted `key = value` lines
// and parse(serialize(c)) == c.
class RunConfig {
public:
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;

    double number(const std::string& key) const;
    std::uint64_t count(const std::string& key) const;
    bool flag(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

    std::string serialize() const;
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::string& path);

    bool operator==(const RunConfig&) const = default;

private:
    std::map<std::string, std::string> values_;
};

struct KeySpec {
    std::string name;
    std::string default_value;
    std::string help;
};

// Keys accepted by a subcommand (including the common ones), with defaults.
std::vector<KeySpec> subcommand_keys(const std::string& subcommand);
std::vector<std::string> subcommands();

// Exit codes: 0 success, 1 acceptance failure, 2 usage/config error, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Runs one subcommand on an already merged config.
int run_config(const std::string& subcommand, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace causal::cli
