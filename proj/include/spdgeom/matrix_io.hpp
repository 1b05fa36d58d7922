#pragma once

// Plain-text matrix I/O. Matrices are CSV, one row per line, no header;
// numbers are written with 17 significant digits so files round-trip exactly.

#include "spdgeom/spd_core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spdgeom::io {

std::string format_double(double v);

std::vector<std::string> split_csv_line(std::string_view line);
std::string trim(std::string_view s);
double parse_double(std::string_view field, const std::string& context);
long parse_long(std::string_view field, const std::string& context);

// Rectangular numeric CSV. `skip_header` drops the first line.
Matrix read_csv_matrix(const std::filesystem::path& path, bool skip_header = false);
Matrix parse_csv_matrix(std::string_view text, const std::string& context, bool skip_header = false);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
std::string to_csv(const Matrix& m);

SymMatrix read_sym(const std::filesystem::path& path);
SpdMatrix read_spd(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// Two-column `id,label` file.
struct LabelRow {
  std::string id;
  long label = 0;
};
std::vector<LabelRow> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<LabelRow>& rows);

}  // namespace spdgeom::io
