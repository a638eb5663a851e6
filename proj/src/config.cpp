#include "stark/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "stark/errors.hpp"
#include "stark/grid_function.hpp"

namespace stark::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string line, section;
    std::ostringstream raw;
    while (std::getline(is, line)) {
        raw << line << "\n";
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw UsageError("config: malformed section header: " + t);
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw UsageError("config: expected key = value: " + t);
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw UsageError("config: empty key in line: " + t);
        cfg.kv_[section][key] = val;
    }
    cfg.raw_ = raw.str();
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("config: cannot open " + path);
    return parse(is);
}

Config Config::parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = kv_.find(section);
    return s != kv_.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    auto s = kv_.find(section);
    if (s == kv_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double Config::get_num(const std::string& section, const std::string& key,
                       double fallback) const {
    if (!has(section, key)) return fallback;
    try {
        return parse_double(get(section, key));
    } catch (const std::exception&) {
        throw UsageError("config: [" + section + "] " + key + " is not a number");
    }
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) const {
    const double v = get_num(section, key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw UsageError("config: [" + section + "] " + key + " must be an integer");
    return static_cast<long>(v);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    std::istringstream is(get(section, key));
    std::string item;
    while (std::getline(is, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        try {
            out.push_back(parse_double(t));
        } catch (const std::exception&) {
            throw UsageError("config: [" + section + "] " + key + " has a non-numeric entry");
        }
    }
    return out;
}

RunConfig RunConfig::from(const Config& cfg) {
    RunConfig rc;
    rc.command = cfg.get("run", "command", "");
    rc.mode = cfg.get("run", "mode", "single");
    rc.alpha = cfg.get_num("run", "alpha", 1.0);
    rc.xi_max = cfg.get_num("run", "xi_max", 1e6);
    rc.tol = cfg.get_num("run", "tol", 1e-9);
    rc.out = cfg.get("run", "out", "bundle");
    rc.seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 1));
    rc.jobs = static_cast<int>(cfg.get_int("run", "jobs", 1));

    if (auto v = cfg.get_list("plan", "energies"); !v.empty()) rc.energies = v;
    if (auto v = cfg.get_list("plan", "angles"); !v.empty()) rc.angles = v;
    rc.d = cfg.get_num("plan", "d", 0.0);
    rc.a = cfg.get_num("plan", "a", 0.0);
    rc.M = cfg.get_num("plan", "M", 0.0);
    rc.W = static_cast<int>(cfg.get_int("plan", "W", 4));
    rc.h_spec = cfg.get("plan", "h", "log");

    rc.sweep_d = cfg.get_list("sweep", "d_values");
    if (auto v = cfg.get_list("sweep", "alpha_values"); !v.empty()) rc.sweep_alpha = v;
    if (auto v = cfg.get_list("sweep", "energies"); !v.empty()) rc.sweep_energies = v;

    rc.bundle = cfg.get("verify", "bundle", cfg.get("export", "bundle", ""));
    rc.format = cfg.get("export", "format", "csv");
    rc.config_echo = cfg.text();

    // parameter validation happens before any computation
    if (!(rc.alpha > 0.0) || !(rc.alpha < 2.0)) throw UsageError("alpha must lie in (0,2)");
    if (!(rc.tol > 0.0) || rc.tol > 1e-3) throw UsageError("tol must lie in (0, 1e-3]");
    if (!(rc.xi_max > 1.0)) throw UsageError("xi_max must exceed 1");
    if (rc.jobs < 1 || rc.jobs > 256) throw UsageError("jobs must lie in [1,256]");
    if (rc.energies.empty()) throw UsageError("at least one energy required");
    if (rc.energies.size() != rc.angles.size())
        throw UsageError("energies and angles must have the same length");
    for (std::size_t i = 0; i < rc.energies.size(); ++i)
        for (std::size_t j = i + 1; j < rc.energies.size(); ++j)
            if (rc.energies[i] == rc.energies[j]) throw UsageError("energies must be distinct");
    for (double th : rc.angles)
        if (!(th >= 0.0 && th <= M_PI)) throw UsageError("angles must lie in [0, pi]");
    if (rc.W < 1 || rc.W > 64) throw UsageError("W must lie in [1,64]");
    return rc;
}

}  // namespace stark::cli
