#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace mtt {

/// One row of the long-format results table.
struct ResultRow {
  std::string experiment;
  std::string curve;
  std::string x_name;
  double x_value = 0.0;
  std::string y_name;
  double y_value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Header plus one line per row; reals printed with %.17g so values round-trip.
std::string results_csv(std::span<const ResultRow> rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace mtt
