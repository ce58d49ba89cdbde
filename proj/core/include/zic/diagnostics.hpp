#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zic/data.hpp"
#include "zic/fit.hpp"

namespace zic {

enum class ResidualMode { randomized, midpoint };

struct ResidualRow {
  std::size_t index = 0;
  long y = 0;
  double f_lo = 0.0;  // F(y-1) under the fitted parameters
  double f_hi = 0.0;  // F(y)
  double u = 0.0;     // randomization draw, f_lo <= u <= f_hi
  std::optional<double> z;  // absent when the interval is degenerate
  bool degenerate = false;
};

struct ResidualSet {
  std::vector<ResidualRow> rows;
  std::uint64_t seed = 0;
  ResidualMode mode = ResidualMode::randomized;
};

/// Quantile residuals of a fitted count model. In randomized mode u is
/// uniform on (F(y-1), F(y)) and a fixed seed reproduces the set exactly;
/// in midpoint mode u is the interval midpoint and the set is a
/// deterministic function of (fm, data). z = Phi^-1(u).
ResidualSet quantile_residuals(const FittedModel& fm,
                               const ObservationTable& data,
                               std::uint64_t seed = 1,
                               ResidualMode mode = ResidualMode::randomized);

struct WormPoint {
  double q = 0.0;     // theoretical normal quantile
  double d = 0.0;     // ordered residual minus q
  double band = 0.0;  // 95% band half-width at this point
};

struct WormSeries {
  std::string group;  // factor level, empty for the pooled series
  std::vector<WormPoint> points;
};

/// Detrended Q-Q series with pointwise 95% bands. With an empty factor
/// name one pooled series is returned; otherwise one series per level of
/// that factor. Groups with fewer than 8 usable residuals are rejected.
std::vector<WormSeries> worm_series(const ResidualSet& rs,
                                    const ObservationTable& data,
                                    std::string_view factor = {});

struct TermEffect {
  std::string parameter;
  std::string label;       // design column label
  double estimate = 0.0;   // on the link scale
  bool has_interval = false;
  double se = 0.0;
  double lo = 0.0;  // estimate - 1.96 se
  double hi = 0.0;  // estimate + 1.96 se
};

/// One effect per fitted coefficient, on the link scale. Without an
/// available covariance matrix the intervals are omitted and every effect
/// is flagged accordingly.
std::vector<TermEffect> term_effects(const FittedModel& fm);

}  // namespace zic
