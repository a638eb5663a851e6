#include "stark/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace stark::cli {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("fnv1a64: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!is) break;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

void RunManifest::add_file(const std::string& dir, const std::string& name) {
    checksums[name] = hex64(fnv1a64_file(dir + "/" + name));
}

void RunManifest::save(const std::string& path) const {
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["wall_clock_sec"] = wall_clock_sec;
    j["config_echo"] = config_echo;
    j["outputs"] = checksums;
    j["verdicts"] = verdicts;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("manifest: cannot open " + path);
    os << j.dump(2) << "\n";
}

}  // namespace stark::cli
