#include "zic/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace zic {

int ObservationTable::factor_index(std::string_view name) const {
  for (std::size_t f = 0; f < factors.size(); ++f)
    if (factors[f].name == name) return static_cast<int>(f);
  return -1;
}

std::uint64_t ObservationTable::fingerprint() const {
  // FNV-1a over responses and factor codes; identifies the dataset for
  // cross-model comparisons.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(response.size());
  for (const long y : response) mix(static_cast<std::uint64_t>(y) + 1);
  for (const auto& code : codes)
    for (const int c : code) mix(static_cast<std::uint64_t>(c) + 0x9e3779b9u);
  for (const auto& f : factors) {
    mix(f.levels.size());
    for (const auto& l : f.levels)
      for (const char ch : l) mix(static_cast<unsigned char>(ch));
  }
  return h;
}

std::vector<CellSummary> cell_summaries(const ObservationTable& data) {
  std::vector<std::size_t> sizes;
  std::size_t n_cells = 1;
  for (const auto& f : data.factors) {
    sizes.push_back(f.levels.size());
    n_cells *= f.levels.size();
  }
  if (data.factors.empty()) n_cells = 1;

  // cell index with the first factor slowest
  auto cell_of = [&](std::size_t row) {
    std::size_t idx = 0;
    for (std::size_t f = 0; f < data.factors.size(); ++f)
      idx = idx * sizes[f] + static_cast<std::size_t>(data.codes[f][row]);
    return idx;
  };

  std::vector<std::size_t> count(n_cells, 0);
  std::vector<double> sum(n_cells, 0.0), sumsq(n_cells, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto c = cell_of(i);
    const double y = static_cast<double>(data.response[i]);
    ++count[c];
    sum[c] += y;
    sumsq[c] += y * y;
  }

  std::vector<CellSummary> out;
  out.reserve(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    CellSummary s;
    std::size_t rem = c;
    s.levels.resize(data.factors.size());
    for (std::size_t f = data.factors.size(); f-- > 0;) {
      s.levels[f] = data.factors[f].levels[rem % sizes[f]];
      rem /= sizes[f];
    }
    s.count = count[c];
    if (count[c] > 0) s.mean = sum[c] / static_cast<double>(count[c]);
    if (count[c] > 1) {
      const double nc = static_cast<double>(count[c]);
      s.variance = (sumsq[c] - sum[c] * sum[c] / nc) / (nc - 1.0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t b = 0;
    while (b < field.size() && field[b] == ' ') ++b;
    out.push_back(field.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

ObservationTable read_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw data_error("empty file: " + path);
  const auto header = split_csv_line(line);

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw data_error("missing column '" + name + "' in " + path);
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t ycol = column_of(schema.response);
  std::vector<std::size_t> fcols;
  for (const auto& f : schema.factors) fcols.push_back(column_of(f));

  ObservationTable t;
  t.response_name = schema.response;
  for (const auto& f : schema.factors) t.factors.push_back(Factor{f, f, {}});
  t.codes.resize(schema.factors.size());

  std::size_t rownum = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++rownum;
    const auto fields = split_csv_line(line);
    if (fields.size() <= ycol)
      throw data_error("row " + std::to_string(rownum) + ": too few fields");

    long y = 0;
    const auto& ystr = fields[ycol];
    const auto [p, ec] = std::from_chars(ystr.data(), ystr.data() + ystr.size(), y);
    if (ec != std::errc{} || p != ystr.data() + ystr.size() || y < 0)
      throw data_error("row " + std::to_string(rownum) + ": response '" + ystr +
                       "' is not a nonnegative integer");
    t.response.push_back(y);

    for (std::size_t f = 0; f < fcols.size(); ++f) {
      if (fields.size() <= fcols[f])
        throw data_error("row " + std::to_string(rownum) + ": too few fields");
      const auto& lvl = fields[fcols[f]];
      auto& levels = t.factors[f].levels;
      auto it = std::find(levels.begin(), levels.end(), lvl);
      if (it == levels.end()) {
        levels.push_back(lvl);
        it = levels.end() - 1;
      }
      t.codes[f].push_back(static_cast<int>(it - levels.begin()));
    }
  }
  if (t.response.empty()) throw data_error("no data rows in " + path);
  return t;
}

void write_csv(const ObservationTable& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << data.response_name;
  for (const auto& f : data.factors) out << "," << f.name;
  out << "\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.response[i];
    for (std::size_t f = 0; f < data.factors.size(); ++f)
      out << "," << data.factors[f].levels[static_cast<std::size_t>(data.codes[f][i])];
    out << "\n";
  }
}

}  // namespace zic
