// Result tables and run manifests.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace lvr::report {

inline constexpr int kSchemaVersion = 1;

// CSV table with a header row; every row carries a trailing schema_version
// column so the leading columns stay readable by the input loaders.
class Table {
public:
    explicit Table(std::vector<std::string> columns);

    void add_row(std::vector<std::string> cells);
    std::size_t rows() const noexcept { return rows_.size(); }
    std::string to_csv() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

// Shortest representation that round-trips.
std::string num(double v);
std::string num(long long v);
std::string num(unsigned long long v);
inline std::string num(long v) { return num(static_cast<long long>(v)); }
inline std::string num(unsigned long v) { return num(static_cast<unsigned long long>(v)); }
inline std::string num(int v) { return num(static_cast<long long>(v)); }

// Writes through a temporary file in the same directory and renames it into
// place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

class Manifest {
public:
    explicit Manifest(std::string command);

    void add_input(const std::string& role, const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    nlohmann::json& parameters() { return doc_["parameters"]; }
    nlohmann::json& counters() { return doc_["counters"]; }
    nlohmann::json& results() { return doc_["results"]; }

    // Stamps the creation time and writes manifest.json into dir.
    void write(const std::filesystem::path& dir);

private:
    nlohmann::json doc_;
};

}  // namespace lvr::report
