#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace stark::cli {

/// Line-oriented `key = value` file with [section] headers and # comments.
class Config {
public:
    static Config parse(std::istream& is);
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const;
    double get_num(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    const std::string& text() const { return raw_; }

private:
    std::map<std::string, std::map<std::string, std::string>> kv_;
    std::string raw_;
};

/// Validated run parameters. Construction throws UsageError on bad input
/// before any computation starts.
struct RunConfig {
    std::string command;  // construct | verify | sweep | export
    std::string mode = "single";
    double alpha = 1.0;
    double xi_max = 1e6;
    double tol = 1e-9;
    std::string out = "bundle";
    std::uint64_t seed = 1;
    int jobs = 1;

    std::vector<double> energies{0.0};
    std::vector<double> angles{1.0};
    double d = 0.0;
    double a = 0.0;
    double M = 0.0;  // 0 keeps the schedule default
    int W = 4;
    std::string h_spec = "log";

    std::vector<double> sweep_d;
    std::vector<double> sweep_alpha{1.0};
    std::vector<double> sweep_energies{0.0};

    std::string bundle;
    std::string format = "csv";

    std::string config_echo;

    static RunConfig from(const Config& cfg);
};

}  // namespace stark::cli
