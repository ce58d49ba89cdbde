#include "zic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "zic/families.hpp"
#include "zic/specfun.hpp"

namespace zic {
namespace {

double safe_quantile(double u) {
  // Guard the open-interval domain of Phi^-1 against fitted cdf values
  // that round to exactly 0 or 1.
  return std_normal_quantile(std::clamp(u, 1e-300, 1.0 - 1.1e-16));
}

WormSeries build_worm(std::string group, std::vector<double> z) {
  if (z.size() < 8)
    throw std::invalid_argument("worm group '" + group +
                                "' has fewer than 8 residuals");
  std::sort(z.begin(), z.end());
  WormSeries ws;
  ws.group = std::move(group);
  double m = static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    double p = (static_cast<double>(i) + 1.0 - 0.375) / (m + 0.25);
    double q = std_normal_quantile(p);
    double phi = std::exp(-0.5 * q * q) / std::sqrt(2.0 * M_PI);
    ws.points.push_back({q, z[i] - q,
                         1.96 * std::sqrt(p * (1.0 - p) / m) / phi});
  }
  return ws;
}

}  // namespace

ResidualSet quantile_residuals(const FittedModel& fm,
                               const ObservationTable& data,
                               std::uint64_t seed, ResidualMode mode) {
  auto params = fm.fitted_params(data);
  std::mt19937_64 rng(seed);
  ResidualSet rs;
  rs.seed = seed;
  rs.mode = mode;
  for (std::size_t i = 0; i < data.n(); ++i) {
    ResidualRow r;
    r.index = i;
    r.y = data.response[i];
    r.f_lo = cdf(fm.spec.family, params[i], r.y - 1);
    r.f_hi = cdf(fm.spec.family, params[i], r.y);
    if (mode == ResidualMode::midpoint) {
      r.u = 0.5 * (r.f_lo + r.f_hi);
    } else {
      // The half-step offset keeps the draw strictly inside the open
      // interval for every raw 64-bit value.
      double t = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      r.u = r.f_lo + t * (r.f_hi - r.f_lo);
    }
    if (r.f_hi - r.f_lo <= 0.0) {
      r.degenerate = true;
      r.u = r.f_lo;
    } else {
      r.z = safe_quantile(r.u);
    }
    rs.rows.push_back(std::move(r));
  }
  return rs;
}

std::vector<WormSeries> worm_series(const ResidualSet& rs,
                                    const ObservationTable& data,
                                    std::string_view factor) {
  std::vector<WormSeries> out;
  if (factor.empty()) {
    std::vector<double> z;
    for (const auto& r : rs.rows)
      if (r.z) z.push_back(*r.z);
    out.push_back(build_worm("", std::move(z)));
    return out;
  }
  int fi = data.factor_index(factor);
  if (fi < 0)
    throw std::invalid_argument("unknown factor: " + std::string(factor));
  const auto& levels = data.factors[fi].levels;
  std::vector<std::vector<double>> z(levels.size());
  for (const auto& r : rs.rows)
    if (r.z) z[data.codes[fi][r.index]].push_back(*r.z);
  for (std::size_t l = 0; l < levels.size(); ++l)
    out.push_back(build_worm(levels[l], std::move(z[l])));
  return out;
}

std::vector<TermEffect> term_effects(const FittedModel& fm) {
  std::vector<TermEffect> out;
  std::size_t p = fm.df, idx = 0;
  for (const auto& b : fm.coef) {
    for (std::size_t i = 0; i < b.labels.size(); ++i) {
      TermEffect e;
      e.parameter = b.param;
      e.label = b.labels[i];
      e.estimate = b.beta[i];
      if (fm.vcov_available) {
        e.se = std::sqrt(fm.vcov[idx * p + idx]);
        e.lo = e.estimate - 1.96 * e.se;
        e.hi = e.estimate + 1.96 * e.se;
        e.has_interval = true;
      }
      ++idx;
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace zic
