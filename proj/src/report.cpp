#include "lvr/report.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "lvr/error.hpp"

namespace lvr::report {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    columns_.push_back("schema_version");
}

void Table::add_row(std::vector<std::string> cells) {
    cells.push_back(std::to_string(kSchemaVersion));
    if (cells.size() != columns_.size()) {
        throw InvalidInput("table row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(columns_.size()));
    }
    rows_.push_back(std::move(cells));
}

std::string Table::to_csv() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    emit(columns_);
    for (const auto& r : rows_) emit(r);
    return out;
}

std::string num(double v) { return fmt::format("{}", v); }
std::string num(long long v) { return fmt::format("{}", v); }
std::string num(unsigned long long v) { return fmt::format("{}", v); }

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += fmt::format(".tmp.{}", static_cast<long>(::getpid()));
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::string to_hex(const unsigned char* digest, unsigned int len) {
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

struct DigestCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    DigestCtx() {
        if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
            throw Error("sha256 initialisation failed");
        }
    }
    ~DigestCtx() { EVP_MD_CTX_free(ctx); }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }
    std::string finish() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx, digest, &len);
        return to_hex(digest, len);
    }
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    DigestCtx d;
    d.update(bytes.data(), bytes.size());
    return d.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    DigestCtx d;
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof buf);
        d.update(buf, static_cast<std::size_t>(f.gcount()));
    }
    return d.finish();
}

Manifest::Manifest(std::string command) {
    doc_["tool"] = "lvrsim";
    doc_["schema_version"] = kSchemaVersion;
    doc_["command"] = std::move(command);
    doc_["parameters"] = nlohmann::json::object();
    doc_["inputs"] = nlohmann::json::array();
    doc_["outputs"] = nlohmann::json::array();
    doc_["counters"] = nlohmann::json::object();
    doc_["results"] = nlohmann::json::object();
}

void Manifest::add_input(const std::string& role, const std::filesystem::path& path) {
    doc_["inputs"].push_back({{"role", role},
                              {"path", path.string()},
                              {"bytes", std::filesystem::file_size(path)},
                              {"sha256", sha256_file(path)}});
}

void Manifest::add_output(const std::filesystem::path& path) {
    doc_["outputs"].push_back(
        {{"file", path.filename().string()}, {"sha256", sha256_file(path)}});
}

void Manifest::write(const std::filesystem::path& dir) {
    doc_["created_at"] = utc_now();
    write_atomic(dir / "manifest.json", doc_.dump(2) + "\n");
}

}  // namespace lvr::report
