#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <json.hpp>

namespace tsc {

// Shortest round-tripping decimal form; keeps CSV/JSON output deterministic.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Write-to-temp-then-rename so an interrupted run never leaves a partial
// file under the final name.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << contents;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return nlohmann::json::parse(in);
}

// Buffered CSV with atomic finalize.
class CsvWriter {
public:
    explicit CsvWriter(std::filesystem::path path, const std::string& header)
        : path_(std::move(path)) {
        buffer_ = header + "\n";
    }

    void append_row(const std::string& row) { buffer_ += row + "\n"; }

    void finalize() {
        write_file_atomic(path_, buffer_);
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }

private:
    std::filesystem::path path_;
    std::string buffer_;
    bool finalized_ = false;
};

}  // namespace tsc
