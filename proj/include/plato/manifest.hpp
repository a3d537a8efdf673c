#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace plato {

// FNV-1a over raw bytes, hex-encoded.
std::string checksum_bytes(std::span<const char> bytes);
std::string checksum_file(const std::string& path);

// Provenance record written next to every command's outputs.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::vector<std::pair<std::string, std::string>> inputs;   // (path, checksum)
    std::vector<std::pair<std::string, std::string>> outputs;  // (path, checksum)
    std::uint64_t seed = 0;
    std::string precision = "f64";
    std::string timestamp;

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    std::string config_digest() const;
    void save(const std::string& path) const;
};

}  // namespace plato
