#include "lvr/csv.hpp"

#include <zlib.h>

#include <charconv>
#include <fstream>

#include "lvr/error.hpp"

namespace lvr::csv {

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() &&
           std::string_view(s).substr(s.size() - suffix.size()) == suffix;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

struct LineReader::Impl {
    std::ifstream plain;
    gzFile gz = nullptr;

    ~Impl() {
        if (gz != nullptr) gzclose(gz);
    }

    bool read_gz(std::string& line) {
        line.clear();
        char buf[4096];
        bool got = false;
        while (gzgets(gz, buf, sizeof buf) != nullptr) {
            got = true;
            line.append(buf);
            if (!line.empty() && line.back() == '\n') {
                line.pop_back();
                return true;
            }
        }
        int err = 0;
        gzerror(gz, &err);
        if (err != Z_OK && err != Z_STREAM_END) {
            throw IoError("corrupt gzip stream");
        }
        return got;
    }
};

LineReader::LineReader(const std::string& path) : impl_(std::make_unique<Impl>()), path_(path) {
    if (ends_with(path, ".gz")) {
        impl_->gz = gzopen(path.c_str(), "rb");
        if (impl_->gz == nullptr) throw IoError("cannot open " + path);
    } else {
        impl_->plain.open(path);
        if (!impl_->plain) throw IoError("cannot open " + path);
    }
}

LineReader::~LineReader() = default;

bool LineReader::next(std::string& line) {
    bool ok = false;
    if (impl_->gz != nullptr) {
        try {
            ok = impl_->read_gz(line);
        } catch (const IoError& e) {
            throw IoError(path_ + ": " + e.what());
        }
    } else {
        ok = static_cast<bool>(std::getline(impl_->plain, line));
    }
    if (ok) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }
    return ok;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool parse(std::string_view field, double& out) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    if (field.empty()) return false;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

bool parse(std::string_view field, std::int64_t& out) {
    field = trim(field);
    if (field.empty()) return false;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

bool is_header(std::string_view line) {
    const auto fields = split(line);
    double v = 0.0;
    return !parse(fields.front(), v);
}

}  // namespace lvr::csv
