// Minimal CSV line reading shared by the loaders. Files ending in ".gz" are
// decompressed transparently.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace lvr::csv {

class LineReader {
public:
    // Throws IoError if the file cannot be opened.
    explicit LineReader(const std::string& path);
    ~LineReader();
    LineReader(const LineReader&) = delete;
    LineReader& operator=(const LineReader&) = delete;

    // Next line without its terminator; false at end of file.
    bool next(std::string& line);
    std::size_t line_number() const noexcept { return line_no_; }
    const std::string& path() const noexcept { return path_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string path_;
    std::size_t line_no_ = 0;
};

std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Strict numeric parsing of a whole field (surrounding blanks allowed).
bool parse(std::string_view field, double& out);
bool parse(std::string_view field, std::int64_t& out);

// True when the line looks like a header: its first field is not numeric.
bool is_header(std::string_view line);

}  // namespace lvr::csv
