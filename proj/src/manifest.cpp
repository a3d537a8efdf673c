#include "plato/manifest.hpp"

#include <chrono>
#include <fstream>

#include "plato/errors.hpp"

namespace plato {

std::string checksum_bytes(std::span<const char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string checksum_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open for checksum: " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checksum_bytes(bytes);
}

void RunManifest::add_input(const std::string& path) {
    inputs.emplace_back(path, checksum_file(path));
}

void RunManifest::add_output(const std::string& path) {
    outputs.emplace_back(path, checksum_file(path));
}

std::string RunManifest::config_digest() const {
    const std::string dump = config.dump();
    return checksum_bytes(dump);
}

void RunManifest::save(const std::string& path) const {
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config;
    j["config_hash"] = config_digest();
    j["seed"] = seed;
    j["precision"] = precision;
    j["timestamp"] = timestamp;
    auto pairs = [](const std::vector<std::pair<std::string, std::string>>& v) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [p, c] : v) {
            out.push_back({{"path", p}, {"checksum", c}});
        }
        return out;
    };
    j["inputs"] = pairs(inputs);
    j["outputs"] = pairs(outputs);
    std::ofstream out(path);
    if (!out) {
        throw RuntimeFailure("cannot write manifest: " + path);
    }
    out << j.dump(2) << "\n";
}

}  // namespace plato
