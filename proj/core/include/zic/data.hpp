#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zic {

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Categorical covariate. Levels keep their order of first appearance;
// short_label prefixes design-matrix column names ("photo8", "bap4.4").
struct Factor {
  std::string name;
  std::string short_label;
  std::vector<std::string> levels;
};

// Long-form count data: one response and the factor level codes per row.
struct ObservationTable {
  std::string response_name = "y";
  std::vector<long> response;
  std::vector<Factor> factors;
  std::vector<std::vector<int>> codes;  // codes[f][i] indexes factors[f].levels

  std::size_t n() const { return response.size(); }
  int factor_index(std::string_view name) const;  // -1 when absent
  std::uint64_t fingerprint() const;
};

// The embedded Trajan micropropagation table: 270 shoots, number of roots
// by photoperiod (8h/16h) and BAP concentration (2.2/4.4/8.8/17.6).
// Row order: cells as printed (8h block then 16h, BAP ascending), roots
// ascending within a cell.
ObservationTable trajan();

struct CellSummary {
  std::vector<std::string> levels;  // one level per factor, table order
  std::size_t count = 0;
  double mean = 0.0;
  std::optional<double> variance;  // n-1 divisor; absent when count < 2
};

// Per-cell n/mean/variance over the cross of all factors, first factor
// varying slowest.
std::vector<CellSummary> cell_summaries(const ObservationTable& data);

struct CsvSchema {
  std::string response;
  std::vector<std::string> factors;
};

ObservationTable read_csv(const std::string& path, const CsvSchema& schema);
void write_csv(const ObservationTable& data, const std::string& path);

}  // namespace zic
