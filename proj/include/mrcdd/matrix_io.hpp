#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mrcdd/types.hpp"

namespace mrcdd {

// Plain-text matrix format:
//
//   <rows> <cols>
//   <column 0 values>
//   <column 1 values>
//   ...
//
// Values are column-major, whitespace separated, printed with 17 significant
// digits so a write/read cycle is bit-exact. Lines starting with '#' are
// comments. The reader accepts any whitespace layout after the header.

void write_matrix(std::ostream& out, const Matrix& matrix);
Matrix read_matrix(std::istream& in);

void save_matrix(const std::filesystem::path& path, const Matrix& matrix);
Matrix load_matrix(const std::filesystem::path& path);

/// Parses an inline row-major literal: rows separated by ',' or ';', entries
/// by whitespace, e.g. "1 0, 0 1".
Matrix parse_matrix_literal(const std::string& text);

std::string format_double(double value);

}  // namespace mrcdd
