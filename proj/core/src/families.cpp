#include "zic/families.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "zic/specfun.hpp"

namespace zic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInflationCap = 1.0 - 1e-10;
constexpr long kTruncationCap = 1000000;

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

[[noreturn]] void bad_param(const char* what) { throw std::domain_error(what); }

double clamp_inflation(double p) {
  if (!(p >= 0.0) || p > 1.0) bad_param("inflation probability outside [0, 1]");
  return std::min(p, kInflationCap);
}

void check_nonneg(double v, const char* what) {
  if (!(v >= 0.0)) bad_param(what);
}

// ---- base (non-inflated) log pmfs ----

double po_lp(double mu, long y) {
  if (mu == 0.0) return y == 0 ? 0.0 : -kInf;
  return y * std::log(mu) - mu - log_gamma(y + 1.0);
}

double nb_lp(double mu, double sigma, long y) {
  if (sigma == 0.0) return po_lp(mu, y);
  if (mu == 0.0) return y == 0 ? 0.0 : -kInf;
  double a = 1.0 / sigma;
  return log_gamma(y + a) - log_gamma(a) - log_gamma(y + 1.0) +
         y * (std::log(sigma * mu) - std::log1p(sigma * mu)) -
         a * std::log1p(sigma * mu);
}

double pig_alpha(double mu, double sigma) {
  return std::sqrt(1.0 / (sigma * sigma) + 2.0 * mu / sigma);
}

double pig_lp(double mu, double sigma, long y) {
  if (sigma == 0.0) return po_lp(mu, y);
  if (mu == 0.0) return y == 0 ? 0.0 : -kInf;
  double alpha = pig_alpha(mu, sigma);
  return y * std::log(mu) + 1.0 / sigma +
         log_bessel_k_half(static_cast<int>(y), alpha) -
         y * std::log(alpha * sigma) - log_gamma(y + 1.0) +
         0.5 * std::log(2.0 * alpha / M_PI);
}

// The Gamma(1/nu) factor below is required for the pmf to sum to one;
// normalization over the support is asserted by the test suite.
double bnb_lp(double mu, double sigma, double nu, long y) {
  if (sigma == 0.0) return nb_lp(mu, nu, y);
  if (nu == 0.0 || mu == 0.0) return y == 0 ? 0.0 : -kInf;
  double b = mu * nu / sigma;
  double c = 1.0 / sigma + 1.0 / nu + 1.0;
  return log_gamma(y + 1.0 / nu) - log_gamma(1.0 / nu) - log_gamma(y + 1.0) +
         log_beta(y + b, c) - log_beta(b, 1.0 / sigma + 1.0);
}

// ---- zero-inflation mixture on top of a base lp ----

double mix_lp(double base_lp, double p, long y) {
  if (y == 0) return log_add(std::log(p), std::log1p(-p) + base_lp);
  return std::log1p(-p) + base_lp;
}

double checked_mu(std::span<const double> p) {
  check_nonneg(p[0], "mu must be >= 0");
  return p[0];
}

double base_lp_at(const FamilySpec& f, std::span<const double> p, long y,
                  double* inflation) {
  *inflation = 0.0;
  switch (f.id) {
    case Family::po:
      return po_lp(checked_mu(p), y);
    case Family::nb:
      check_nonneg(p[1], "sigma must be >= 0");
      return nb_lp(checked_mu(p), p[1], y);
    case Family::zip:
      *inflation = clamp_inflation(p[1]);
      return po_lp(checked_mu(p) / (1.0 - *inflation), y);
    case Family::zinb:
      check_nonneg(p[1], "sigma must be >= 0");
      *inflation = clamp_inflation(p[2]);
      return nb_lp(checked_mu(p), p[1], y);
    case Family::zipig:
      check_nonneg(p[1], "sigma must be >= 0");
      *inflation = clamp_inflation(p[2]);
      return pig_lp(checked_mu(p), p[1], y);
    case Family::zibnb:
      check_nonneg(p[1], "sigma must be >= 0");
      check_nonneg(p[2], "nu must be >= 0");
      *inflation = clamp_inflation(p[3]);
      return bnb_lp(checked_mu(p), p[1], p[2], y);
  }
  bad_param("unknown family");
}

// Sequential pmf evaluation for cdf / truncation / sampling.  Ratio
// recurrences keep the sweep O(1) per step; the PIG branch carries the
// Bessel recurrence ln K_{y-1/2}(alpha) along so results match the
// direct log_pmf formulas bit for bit.
struct Sweep {
  const FamilySpec& f;
  std::span<const double> p;
  long y = -1;
  double inflation = 0.0;
  double lp = -kInf;        // base log pmf at current y
  bool point_mass = false;  // base degenerates to delta at 0
  // family constants
  double mu = 0, sigma = 0, lr = 0, b = 0, c = 0, alpha = 0;
  double lnk_prev = 0, lnk_cur = 0;  // PIG: ln K_{y-3/2}, ln K_{y-1/2}
  Family base_id = Family::po;

  explicit Sweep(const FamilySpec& fam, std::span<const double> params)
      : f(fam), p(params) {
    (void)base_lp_at(f, p, 0, &inflation);  // domain checks
    mu = p[0];
    switch (f.id) {
      case Family::po: base_id = Family::po; break;
      case Family::zip:
        base_id = Family::po;
        mu = p[0] / (1.0 - inflation);
        break;
      case Family::nb: base_id = Family::nb; sigma = p[1]; break;
      case Family::zinb: base_id = Family::nb; sigma = p[1]; break;
      case Family::zipig: base_id = Family::zipig; sigma = p[1]; break;
      case Family::zibnb:
        base_id = Family::zibnb;
        sigma = p[1];
        if (sigma == 0.0) { base_id = Family::nb; sigma = p[2]; }
        break;
    }
    if (base_id == Family::nb && sigma == 0.0) base_id = Family::po;
    if (base_id == Family::zipig && sigma == 0.0) base_id = Family::po;
    if (mu == 0.0) point_mass = true;
    if (base_id == Family::zibnb && p[2] == 0.0) point_mass = true;
    if (point_mass) return;
    switch (base_id) {
      case Family::po: break;
      case Family::nb:
        lr = std::log(sigma * mu) - std::log1p(sigma * mu);
        break;
      case Family::zipig:
        alpha = pig_alpha(mu, sigma);
        break;
      case Family::zibnb: {
        double nu = p[2];
        b = mu * nu / sigma;
        c = 1.0 / sigma + 1.0 / nu + 1.0;
        break;
      }
      default: break;
    }
  }

  // advance to the next y and return the mixture log pmf there
  double next() {
    ++y;
    if (point_mass) {
      lp = y == 0 ? 0.0 : -kInf;
      return mix_lp(lp, inflation, y);
    }
    if (y == 0) {
      switch (base_id) {
        case Family::po: lp = -mu; break;
        case Family::nb: lp = -std::log1p(sigma * mu) / sigma; break;
        case Family::zipig:
          lp = 1.0 / sigma - alpha;
          lnk_cur = 0.5 * std::log(M_PI / (2.0 * alpha)) - alpha;  // ln K_{-1/2}
          break;
        case Family::zibnb:
          lp = log_beta(b, c) - log_beta(b, 1.0 / sigma + 1.0);
          break;
        default: break;
      }
    } else {
      switch (base_id) {
        case Family::po:
          lp += std::log(mu) - std::log(static_cast<double>(y));
          break;
        case Family::nb:
          lp += std::log(y - 1.0 + 1.0 / sigma) -
                std::log(static_cast<double>(y)) + lr;
          break;
        case Family::zipig: {
          // K_{y-1/2} from K_{y-5/2}, K_{y-3/2}
          double lnk_next;
          if (y == 1) {
            lnk_next = lnk_cur;  // K_{1/2} = K_{-1/2}
          } else {
            lnk_next = log_add(lnk_prev,
                               std::log((2.0 * y - 3.0) / alpha) + lnk_cur);
          }
          lp += std::log(mu) - std::log(alpha * sigma) -
                std::log(static_cast<double>(y)) + (lnk_next - lnk_cur);
          lnk_prev = lnk_cur;
          lnk_cur = lnk_next;
          break;
        }
        case Family::zibnb:
          lp += std::log(y - 1.0 + 1.0 / p[2]) -
                std::log(static_cast<double>(y)) +
                std::log(y - 1.0 + b) - std::log(y - 1.0 + b + c);
          break;
        default: break;
      }
    }
    return mix_lp(lp, inflation, y);
  }
};

}  // namespace

FamilySpec FamilySpec::from_name(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char ch) { return std::toupper(ch); });
  if (up == "PO") return {Family::po};
  if (up == "NB") return {Family::nb};
  if (up == "ZIP") return {Family::zip};
  if (up == "ZINB") return {Family::zinb};
  if (up == "ZIPIG") return {Family::zipig};
  if (up == "ZIBNB") return {Family::zibnb};
  throw std::invalid_argument("unknown family: " + std::string(name));
}

std::string_view FamilySpec::name() const {
  switch (id) {
    case Family::po: return "PO";
    case Family::nb: return "NB";
    case Family::zip: return "ZIP";
    case Family::zinb: return "ZINB";
    case Family::zipig: return "ZIPIG";
    case Family::zibnb: return "ZIBNB";
  }
  return "?";
}

int FamilySpec::n_params() const {
  switch (id) {
    case Family::po: return 1;
    case Family::nb: return 2;
    case Family::zip: return 2;
    case Family::zinb: return 3;
    case Family::zipig: return 3;
    case Family::zibnb: return 4;
  }
  return 0;
}

std::string_view FamilySpec::param_name(int k) const {
  static constexpr std::string_view names[4] = {"mu", "sigma", "nu", "tau"};
  if (k < 0 || k >= n_params()) throw std::out_of_range("parameter index");
  return names[k];
}

bool FamilySpec::is_inflation(int k) const {
  switch (id) {
    case Family::zip: return k == 1;
    case Family::zinb: return k == 2;
    case Family::zipig: return k == 2;
    case Family::zibnb: return k == 3;
    default: return false;
  }
}

Link FamilySpec::default_link(int k) const {
  if (k < 0 || k >= n_params()) throw std::out_of_range("parameter index");
  return is_inflation(k) ? Link{LinkId::logit} : Link{LinkId::log};
}

double log_pmf(const FamilySpec& f, std::span<const double> params, long y) {
  if (static_cast<int>(params.size()) != f.n_params())
    throw std::invalid_argument("parameter count mismatch");
  double inflation = 0.0;
  if (y < 0) {
    (void)base_lp_at(f, params, 0, &inflation);
    return -kInf;
  }
  double lp = base_lp_at(f, params, y, &inflation);
  return mix_lp(lp, inflation, y);
}

double cdf(const FamilySpec& f, std::span<const double> params, long y) {
  if (static_cast<int>(params.size()) != f.n_params())
    throw std::invalid_argument("parameter count mismatch");
  Sweep sw(f, params);
  if (y < 0) return 0.0;
  double sum = 0.0, comp = 0.0;
  for (long i = 0; i <= y; ++i) {
    double term = std::exp(sw.next());
    double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return std::min(sum + comp, 1.0);
}

double mean(const FamilySpec& f, std::span<const double> params) {
  if (static_cast<int>(params.size()) != f.n_params())
    throw std::invalid_argument("parameter count mismatch");
  double inflation = 0.0;
  (void)base_lp_at(f, params, 0, &inflation);
  double mu = params[0];
  switch (f.id) {
    case Family::po:
    case Family::nb:
    case Family::zip:
      return mu;
    case Family::zinb:
    case Family::zipig:
      return (1.0 - clamp_inflation(params[2])) * mu;
    case Family::zibnb: {
      double base_mean = (params[1] > 0.0 && params[2] == 0.0) ? 0.0 : mu;
      return (1.0 - clamp_inflation(params[3])) * base_mean;
    }
  }
  return mu;
}

long truncation_point(const FamilySpec& f, std::span<const double> params) {
  if (static_cast<int>(params.size()) != f.n_params())
    throw std::invalid_argument("parameter count mismatch");
  Sweep sw(f, params);
  double sum = 0.0, comp = 0.0;
  for (long y = 0; y < kTruncationCap; ++y) {
    double term = std::exp(sw.next());
    double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    if (sum + comp >= 1.0 - 1e-12) return y;
  }
  return kTruncationCap;
}

std::vector<long> sample(const FamilySpec& f, std::span<const double> params,
                         std::mt19937_64& rng, std::size_t n) {
  if (static_cast<int>(params.size()) != f.n_params())
    throw std::invalid_argument("parameter count mismatch");
  std::vector<double> cum;
  cum.reserve(64);
  Sweep sw(f, params);
  double sum = 0.0;
  auto extend = [&] {
    sum += std::exp(sw.next());
    cum.push_back(sum);
  };
  extend();
  std::vector<long> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    while (u >= cum.back() && static_cast<long>(cum.size()) <= kTruncationCap &&
           cum.back() < 1.0 - 1e-15)
      extend();
    auto it = std::lower_bound(cum.begin(), cum.end(), u,
                               [](double cv, double uv) { return cv <= uv; });
    if (it == cum.end()) --it;
    out.push_back(static_cast<long>(it - cum.begin()));
  }
  return out;
}

}  // namespace zic
