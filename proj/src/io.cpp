#include "reachcert/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "reachcert/version.hpp"

namespace reachcert::io {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string output_header(const std::string& config, std::uint64_t seed) {
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a64(config)));
    std::string out;
    out += "# reachcert ";
    out += kVersion;
    out += "\n# config_hash=";
    out += hash;
    out += "\n# seed=" + std::to_string(seed) + "\n";
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string join_csv_row(const std::vector<double>& row) {
    std::string out;
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += format_double(row[i]);
    }
    out += '\n';
    return out;
}

}  // namespace reachcert::io
