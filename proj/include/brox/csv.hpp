#pragma once

// Small CSV helpers shared by the config loader and the report writers.

#include <string>
#include <string_view>
#include <vector>

#include "brox/geometry.hpp"

namespace brox {

/// 17 significant digits, enough for a lossless double round trip.
std::string format_double(double x);

/// "a,b,c" with format_double for each entry.
std::string format_list(const Vector& v, char sep = ',');

/// Parses a separator-delimited list of doubles; throws ArgumentError.
Vector parse_list(std::string_view text, char sep = ',');

double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Dense numeric CSV (no header; lines starting with '#' are skipped).
Matrix read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);

/// A vector stored either as one column or one row.
Vector read_vector_csv(const std::string& path);

/// Joins `path` onto `base_dir` unless it is absolute or base_dir is empty.
std::string resolve_path(const std::string& base_dir, const std::string& path);

}  // namespace brox
