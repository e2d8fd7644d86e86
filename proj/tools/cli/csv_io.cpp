#include "cli/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

namespace mmdtest::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

Matrix parse_csv(std::istream& in, const CsvOptions& options) {
  std::vector<double> cells;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (line_no == 1 && options.header) continue;
    if (trim(view).empty()) continue;

    ++rows;
    std::size_t col = 0;
    std::size_t start = 0;
    for (;;) {
      const auto comma = view.find(',', start);
      const auto cell = trim(view.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start));
      ++col;
      double value = 0.0;
      const auto* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
      if (cell.empty() || ec != std::errc() || ptr != end) {
        throw CsvError(where(rows, col) + ": '" + std::string(cell) + "' is not a number");
      }
      if (!std::isfinite(value)) {
        throw CsvError(where(rows, col) + ": NaN/Inf entries are not allowed");
      }
      cells.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols == 0) {
      cols = col;
    } else if (col != cols) {
      throw CsvError("row " + std::to_string(rows) + " has " + std::to_string(col) +
                     " columns, expected " + std::to_string(cols));
    }
  }
  if (rows == 0) throw CsvError("no data rows");

  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * cols + j];
    }
  }
  if (options.transpose) out.transposeInPlace();
  return out;
}

Matrix read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path.string() + "'");
  return parse_csv(in, options);
}

void write_csv(std::ostream& out, const Matrix& values) {
  char buffer[32];
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j > 0) out << ',';
      const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, values(i, j));
      out.write(buffer, ptr - buffer);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write '" + path.string() + "'");
  write_csv(out, values);
}

}  // namespace mmdtest::cli
