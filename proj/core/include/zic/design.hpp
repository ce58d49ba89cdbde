#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "zic/data.hpp"
#include "zic/links.hpp"

namespace zic {

struct Term {
  enum class Kind { intercept, factor, interaction };
  Kind kind = Kind::intercept;
  std::string a;  // factor name
  std::string b;  // second factor for interactions

  std::string label() const;  // "1", "photoperiod", "photoperiod:bap"
  bool operator==(const Term&) const = default;

  static Term intercept() { return {}; }
  static Term factor(std::string name) { return {Kind::factor, std::move(name), {}}; }
  static Term interaction(std::string fa, std::string fb) {
    return {Kind::interaction, std::move(fa), std::move(fb)};
  }
};

enum class Coding { cell_means, treatment };

// Ordered model terms for one distribution parameter.
//
// Grammar accepted by parse():
//   "1"                    intercept only
//   "photoperiod"          intercept + factor (treatment coding)
//   "photoperiod+bap"      additive terms
//   "photoperiod*bap"      expands to photoperiod+bap+photoperiod:bap
//   "photoperiod:bap"      interaction term alone
//   "~0+photoperiod"       drops the intercept (cell-means coding)
// A leading "~" is optional; "~0+" or "0+" selects cell_means.
struct TermList {
  std::vector<Term> terms;  // excluding the implicit intercept
  Coding coding = Coding::treatment;

  bool has_intercept() const { return coding == Coding::treatment; }
  std::string str() const;
  bool operator==(const TermList&) const = default;

  static TermList parse(std::string_view spec);
  static TermList intercept_only() { return TermList{{}, Coding::treatment}; }
};

struct DesignMatrix {
  std::size_t rows = 0;
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major, rows x labels.size()

  std::size_t cols() const { return labels.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * labels.size() + j]; }
};

// Deterministic column layout: intercept first, then each term's columns
// with factor levels in data order. In treatment coding a factor
// contributes one indicator per non-reference level (reference = first
// level); in cell-means coding the leading factor term contributes one
// indicator per level and later terms fall back to treatment columns so
// the matrix stays full rank. Interaction columns require both main
// effects, except a lone interaction under cell-means which spans the
// cell means of the cross. Rank deficiency is rejected.
DesignMatrix build_design(const ObservationTable& data, const TermList& terms);

// Elementwise link.inverse(design * coefficients).
std::vector<double> apply_link(const Link& link, const DesignMatrix& design,
                               std::span<const double> coefficients);

}  // namespace zic
