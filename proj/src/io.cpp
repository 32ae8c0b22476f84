#include "gpss/io.hpp"

#include "gpss/constants.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace gpss {

void atomic_write(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp." + std::to_string(
        std::random_device{}() % 1000000);
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("atomic_write: cannot open " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("atomic_write: write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("atomic_write: rename to " + path.string() + " failed");
    }
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_file: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_g17(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns)
{
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != rows) throw IoError("csv_table: ragged columns");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out += ',';
            out += format_g17(columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

std::string fnv1a_hex(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

} // namespace gpss
