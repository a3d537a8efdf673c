#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "plato/kg.hpp"

namespace plato::testing {

// Scratch directory removed when the fixture goes out of scope.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("plato_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// KG built directly from interned ids, bypassing the file loader.
inline KnowledgeGraph make_kg(int nodes, int relations, std::vector<Triple> edges) {
    return KnowledgeGraph(nodes, relations, std::move(edges));
}

}  // namespace plato::testing
