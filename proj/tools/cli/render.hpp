#pragma once

#include "mmdtest/normality_test.hpp"
#include "mmdtest/null_approx.hpp"
#include "mmdtest/simulation.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mmdtest::cli {

/// Six significant digits, the text-mode convention.
std::string fmt6(double value);

/// Left-aligned first column, right-aligned numeric columns.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void print(std::ostream& out) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct MomentsReport {
  Eigen::Index n = 0;
  Eigen::Index d = 0;
  KernelConfig kernel{1.0};
  MomentPair moments{0.0, 0.0};
  std::optional<ChiSqFit> fit;  // empty when the null is degenerate
};

nlohmann::json to_json(const KernelConfig& kernel);
nlohmann::json to_json(const TestResult& result);
nlohmann::json to_json(const MomentsReport& report);
nlohmann::json to_json(const PowerReport& report);
nlohmann::json to_json(const AccuracyReport& report, bool with_timing);

void render_text(std::ostream& out, const TestResult& result);
void render_text(std::ostream& out, const MomentsReport& report);
/// Table-1 layout: one row per bandwidth rule, one column per n.
void render_text(std::ostream& out, const std::vector<PowerReport>& reports);
/// Table-4 layout: alpha rows, reference column, one column per engine.
void render_text(std::ostream& out, const std::vector<AccuracyReport>& reports);

void render_csv(std::ostream& out, const TestResult& result);
void render_csv(std::ostream& out, const MomentsReport& report);
void render_csv(std::ostream& out, const std::vector<PowerReport>& reports);
void render_csv(std::ostream& out, const std::vector<AccuracyReport>& reports, bool with_timing);

std::string_view to_string(BandwidthRule rule);
std::string_view to_string(MomentMode mode);

}  // namespace mmdtest::cli
