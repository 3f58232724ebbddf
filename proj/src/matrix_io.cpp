#include "oslab/matrix_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oslab/error.hpp"

namespace oslab {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0') || errno == ERANGE) {
        throw InvalidArgument("CSV row " + std::to_string(rows.size()) + ": cannot parse '" + cell + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

void write_matrix_json(std::ostream& out, const Matrix& m) {
  out << "{\"dim\": " << m.rows() << ", \"rows\": [";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ", ";
      out << format_double(m(i, j));
    }
    out << ']';
  }
  out << "]}\n";
}

Matrix read_matrix_json(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("matrix JSON: ") + e.what());
  }
  if (!doc.contains("rows") || !doc["rows"].is_array()) throw InvalidArgument("matrix JSON: missing 'rows'");
  std::vector<std::vector<double>> rows;
  for (const auto& r : doc["rows"]) rows.push_back(r.get<std::vector<double>>());
  Matrix m = Matrix::from_rows(rows);
  if (doc.contains("dim") && doc["dim"].get<std::size_t>() != m.rows()) {
    throw InvalidArgument("matrix JSON: 'dim' disagrees with the number of rows");
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path.string() + " for writing");
  if (path.extension() == ".csv") {
    write_matrix_csv(out, m);
  } else {
    write_matrix_json(out, m);
  }
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  if (path.extension() == ".csv") return read_matrix_csv(in);
  return read_matrix_json(in);
}

}  // namespace oslab
