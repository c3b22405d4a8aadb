#pragma once

#include <string>
#include <vector>

namespace fcprune {

/// Shortest round-trip decimal form of a double (std::to_chars), so CSV
/// output is byte-stable across runs of the same build.
std::string format_double(double v);

/// Minimal CSV writer: header + rows of preformatted cells, '\n' endings.
std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Rows of comma-separated numbers. Blank lines are skipped; a non-numeric
/// first line is treated as a header and skipped.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

} // namespace fcprune
