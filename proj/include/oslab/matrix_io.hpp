#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "oslab/matrix.hpp"

namespace oslab {

/// Shortest fixed 17-significant-digit rendering ("%.17g"); parsing the text
/// back with strtod reproduces the double bit for bit.
std::string format_double(double value);

/// Dense row-major CSV, one matrix row per line, no header.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

/// {"dim": n, "rows": [[...], ...]}
void write_matrix_json(std::ostream& out, const Matrix& m);
Matrix read_matrix_json(std::istream& in);

/// Dispatches on the file extension (.csv or .json).
void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace oslab
