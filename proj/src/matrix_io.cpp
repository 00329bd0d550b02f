#include "mrcdd/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace mrcdd {

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_matrix(std::ostream& out, const Matrix& matrix) {
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
      if (i > 0) out << ' ';
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

namespace {

// Strips '#' comments and returns the remaining tokens.
std::istringstream strip_comments(std::istream& in) {
  std::string content, line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    content += line;
    content += '\n';
  }
  return std::istringstream(content);
}

}  // namespace

Matrix read_matrix(std::istream& in) {
  std::istringstream body = strip_comments(in);
  long long rows = -1, cols = -1;
  if (!(body >> rows >> cols) || rows < 0 || cols < 0)
    throw ParseError("matrix header must be '<rows> <cols>'");
  Matrix out(rows, cols);
  for (long long j = 0; j < cols; ++j) {
    for (long long i = 0; i < rows; ++i) {
      std::string token;
      if (!(body >> token))
        throw ParseError("matrix has fewer than rows*cols = " +
                         std::to_string(rows * cols) + " values");
      try {
        std::size_t used = 0;
        out(i, j) = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError("invalid matrix value '" + token + "'");
      }
    }
  }
  std::string extra;
  if (body >> extra) throw ParseError("matrix has trailing values");
  return out;
}

void save_matrix(const std::filesystem::path& path, const Matrix& matrix) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_matrix(out, matrix);
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_matrix(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Matrix parse_matrix_literal(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::string row_text;
  std::string normalized = text;
  for (char& c : normalized)
    if (c == ';') c = ',';
  std::istringstream rows_in(normalized);
  while (std::getline(rows_in, row_text, ',')) {
    std::istringstream entries(row_text);
    std::vector<double> row;
    std::string token;
    while (entries >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError("invalid matrix entry '" + token + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix literal");
  Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ParseError("matrix literal rows have different lengths");
    for (std::size_t j = 0; j < rows[i].size(); ++j) out(i, j) = rows[i][j];
  }
  return out;
}

}  // namespace mrcdd
