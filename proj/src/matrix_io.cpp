#include "spdgeom/matrix_io.hpp"

#include "spdgeom/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spdgeom::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, const std::string& context) {
  const std::string s(field);
  if (s.empty()) fail(ErrorKind::FormatError, context + ": empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    fail(ErrorKind::FormatError, context + ": cannot parse number '" + s + "'");
  }
  return v;
}

long parse_long(std::string_view field, const std::string& context) {
  const std::string s(field);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end == s.c_str() || *end != '\0' || errno == ERANGE) {
    fail(ErrorKind::FormatError, context + ": cannot parse integer '" + s + "'");
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::IoError, "write failed for " + path.string());
}

Matrix parse_csv_matrix(std::string_view text, const std::string& context, bool skip_header) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_pending = skip_header;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(parse_double(f, context + " line " + std::to_string(line_no)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorKind::FormatError, context + " line " + std::to_string(line_no) + ": ragged row (" +
                                       std::to_string(row.size()) + " fields, expected " +
                                       std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::FormatError, context + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix read_csv_matrix(const std::filesystem::path& path, bool skip_header) {
  return parse_csv_matrix(read_text(path), path.string(), skip_header);
}

std::string to_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) { write_text(path, to_csv(m)); }

SymMatrix read_sym(const std::filesystem::path& path) {
  const Matrix m = read_csv_matrix(path);
  if (m.rows() != m.cols()) {
    fail(ErrorKind::DimensionMismatch, path.string() + ": matrix is not square");
  }
  if (!m.allFinite()) fail(ErrorKind::NonFiniteValue, path.string() + ": non-finite entries");
  return SymMatrix::from_raw(m);
}

SpdMatrix read_spd(const std::filesystem::path& path) { return spd_validate(read_sym(path)); }

std::vector<LabelRow> read_labels(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  std::vector<LabelRow> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto f = split_csv_line(t);
    const std::string ctx = path.string() + " line " + std::to_string(line_no);
    if (f.size() == 1) {
      rows.push_back({std::to_string(rows.size()), parse_long(f[0], ctx)});
    } else if (f.size() == 2) {
      char* end = nullptr;
      std::strtol(f[1].c_str(), &end, 10);
      if (rows.empty() && (f[1].empty() || *end != '\0')) continue;  // header
      rows.push_back({f[0], parse_long(f[1], ctx)});
    } else {
      fail(ErrorKind::FormatError, ctx + ": expected 'label' or 'id,label'");
    }
  }
  return rows;
}

void write_labels(const std::filesystem::path& path, const std::vector<LabelRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.id + "," + std::to_string(r.label) + "\n";
  write_text(path, out);
}

}  // namespace spdgeom::io
