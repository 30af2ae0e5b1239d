#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace reachcert::io {

// FNV-1a over the canonical config string; recorded in every output header.
std::uint64_t fnv1a64(const std::string& text);

// Shortest round-trip decimal form, '.' decimal point, locale-independent.
std::string format_double(double v);

// "# reachcert <version>\n# config_hash=<hex>\n# seed=<seed>\n"
std::string output_header(const std::string& config, std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& content);

std::string join_csv_row(const std::vector<double>& row);

}  // namespace reachcert::io
