#include "brox/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "brox/errors.hpp"

namespace brox {

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

std::string format_list(const Vector& v, char sep) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += format_double(v[i]);
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view text) {
  const auto t = trim(text);
  // strtod handles inf/nan spellings and hex floats; from_chars for double is
  // not available on every toolchain we build with.
  std::string buf(t);
  if (buf.empty()) throw ArgumentError("expected a number, got an empty field");
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) throw ArgumentError("not a number: '" + buf + "'");
  return value;
}

long long parse_int(std::string_view text) {
  const auto t = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ArgumentError("not an integer: '" + std::string(t) + "'");
  }
  return value;
}

Vector parse_list(std::string_view text, char sep) {
  const auto t = trim(text);
  if (t.empty()) return Vector(0);
  const auto parts = split(t, sep);
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
  return v;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open matrix file: " + path);
  std::vector<Vector> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back(parse_list(t));
    if (rows.back().size() != rows.front().size()) {
      throw ArgumentError("ragged rows in matrix file: " + path);
    }
  }
  if (rows.empty()) throw ArgumentError("empty matrix file: " + path);
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write matrix file: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) out << format_list(m.row(i).transpose()) << '\n';
}

Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw ArgumentError("expected a single row or column in " + path);
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (base_dir.empty() || p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

}  // namespace brox
