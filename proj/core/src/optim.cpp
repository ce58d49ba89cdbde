#include "optim.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

namespace zic::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

std::vector<double> fd_gradient(const Objective& f,
                                const std::vector<double>& x, double fx) {
  std::size_t n = x.size();
  std::vector<double> g(n, 0.0);
  std::vector<double> xt = x;
  for (std::size_t i = 0; i < n; ++i) {
    double h = 1e-6 * (1.0 + std::abs(x[i]));
    xt[i] = x[i] + h;
    double fp = f(xt);
    xt[i] = x[i] - h;
    double fm = f(xt);
    xt[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - fx) / h;
    } else if (std::isfinite(fm)) {
      g[i] = (fx - fm) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

OptimResult minimize(const Objective& f, std::vector<double> x0, int max_iter,
                     double tol) {
  const std::size_t n = x0.size();
  OptimResult res;
  res.x = std::move(x0);
  res.fx = f(res.x);
  if (!std::isfinite(res.fx)) return res;

  // inverse Hessian approximation, row-major, starts at identity
  std::vector<double> H(n * n, 0.0);
  auto reset_H = [&] {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  };
  reset_H();

  std::vector<double> g = fd_gradient(f, res.x, res.fx);
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax <= tol * (1.0 + std::abs(res.fx))) {
      res.converged = true;
      break;
    }

    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i] -= H[i * n + j] * g[j];
    double slope = dot(d, g);
    if (!(slope < 0.0)) {
      reset_H();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = dot(d, g);
      if (!(slope < 0.0)) {
        res.converged = true;  // zero gradient
        break;
      }
    }

    // Armijo backtracking
    double t = 1.0;
    std::vector<double> xn(n);
    double fn = kInf;
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = res.x[i] + t * d[i];
      fn = f(xn);
      if (std::isfinite(fn) && fn <= res.fx + 1e-4 * t * slope) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      reset_H();
      res.converged = true;  // no descent possible at line-search resolution
      break;
    }

    std::vector<double> gn = fd_gradient(f, xn, fn);
    std::vector<double> s(n), yv(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - res.x[i];
      yv[i] = gn[i] - g[i];
    }
    double sy = dot(s, yv);
    if (sy > 1e-10 * norm2(s) * norm2(yv)) {
      // H' = (I - r s y') H (I - r y s') + r s s'
      double r = 1.0 / sy;
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * yv[j];
      double yHy = dot(yv, Hy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += r * r * yHy * s[i] * s[j] -
                          r * (Hy[i] * s[j] + s[i] * Hy[j]) + r * s[i] * s[j];
        }
      }
    }

    double drop = res.fx - fn;
    res.x = xn;
    res.fx = fn;
    g = std::move(gn);
    if (drop <= 1e-13 * (1.0 + std::abs(res.fx))) {
      if (++stall >= 3) {
        res.converged = true;
        break;
      }
    } else {
      stall = 0;
    }
  }
  if (res.iterations >= max_iter && !res.converged) {
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    res.converged = gmax <= std::max(1e-4, tol) * (1.0 + std::abs(res.fx));
  }
  return res;
}

}  // namespace zic::detail
