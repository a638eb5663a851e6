#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace stark::cli {

inline constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t v);

/// Reproducibility record of one command: config echo, per-file checksums of
/// the outputs and the verdict summary. Re-running with identical config and
/// seed reproduces every checksum.
struct RunManifest {
    std::string command;
    std::string config_echo;
    std::uint64_t seed = 0;
    double wall_clock_sec = 0.0;
    std::map<std::string, std::string> checksums;  // file name -> fnv1a64 hex
    std::map<std::string, std::string> verdicts;

    void add_file(const std::string& dir, const std::string& name);
    void save(const std::string& path) const;
};

}  // namespace stark::cli
