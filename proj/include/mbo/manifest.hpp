#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mbo {

constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit digest of a file's bytes, hex-encoded. Reruns with equal
// inputs and arguments must reproduce equal output digests.
std::string file_digest(const std::string& path);

struct RunManifest {
    std::string subcommand;
    std::vector<std::string> args;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, std::string> outputs;  // path -> digest
    std::int64_t duration_ms = 0;

    void add_input(const std::string& path) { inputs[path] = file_digest(path); }
    void add_output(const std::string& path) { outputs[path] = file_digest(path); }
    void write(const std::string& path) const;
};

}  // namespace mbo
