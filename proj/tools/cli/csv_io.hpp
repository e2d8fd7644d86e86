#pragma once

#include "mmdtest/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace mmdtest::cli {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvOptions {
  bool header = false;     // skip the first line
  bool transpose = false;  // file is features x samples
};

/// Comma-delimited decimal floats, one observation per line. Blank lines are
/// ignored; NaN/Inf, ragged rows and non-numeric cells raise CsvError with
/// 1-based row/column positions.
Matrix parse_csv(std::istream& in, const CsvOptions& options = {});
Matrix read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Shortest round-trip representation of every entry.
void write_csv(std::ostream& out, const Matrix& values);
void write_csv(const std::filesystem::path& path, const Matrix& values);

}  // namespace mmdtest::cli
