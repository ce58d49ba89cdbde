#include "zic/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "optim.hpp"

namespace zic {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Link> resolved_links(const ModelSpec& spec) {
  int np = spec.family.n_params();
  if (static_cast<int>(spec.predictors.size()) != np)
    throw std::invalid_argument("one predictor per distribution parameter required");
  std::vector<Link> links = spec.links;
  if (links.empty()) {
    for (int k = 0; k < np; ++k) links.push_back(spec.family.default_link(k));
  }
  if (static_cast<int>(links.size()) != np)
    throw std::invalid_argument("one link per distribution parameter required");
  return links;
}

// Rows with identical design rows (across every parameter) and response
// collapse to weighted cells; likelihood evaluation cost then scales
// with the number of distinct (cell, y) pairs, not n.
struct Workspace {
  std::vector<DesignMatrix> X;
  std::vector<Link> links;
  std::vector<std::size_t> offset;  // theta offset per parameter block
  std::size_t n_theta = 0;
  struct Cell {
    std::vector<std::vector<double>> xrow;   // one row per parameter
    std::vector<std::pair<long, double>> y_w;
    std::vector<std::size_t> rows;           // original observation indices
  };
  std::vector<Cell> cells;
  std::size_t n = 0;

  Workspace(const ModelSpec& spec, const ObservationTable& t)
      : links(resolved_links(spec)) {
    int np = spec.family.n_params();
    n = t.n();
    for (int k = 0; k < np; ++k) {
      X.push_back(build_design(t, spec.predictors[k]));
      offset.push_back(n_theta);
      n_theta += X.back().cols();
    }
    std::map<std::vector<double>, std::size_t> index;
    std::vector<std::map<long, double>> weights;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> key;
      for (int k = 0; k < np; ++k)
        for (std::size_t j = 0; j < X[k].cols(); ++j)
          key.push_back(X[k].at(i, j));
      auto [it, fresh] = index.try_emplace(key, cells.size());
      if (fresh) {
        Cell c;
        std::size_t pos = 0;
        for (int k = 0; k < np; ++k) {
          c.xrow.emplace_back(key.begin() + pos, key.begin() + pos + X[k].cols());
          pos += X[k].cols();
        }
        cells.push_back(std::move(c));
        weights.emplace_back();
      }
      weights[it->second][t.response[i]] += 1.0;
      cells[it->second].rows.push_back(i);
    }
    for (std::size_t c = 0; c < cells.size(); ++c)
      for (auto& [y, w] : weights[c]) cells[c].y_w.emplace_back(y, w);
  }

  bool cell_params(const Cell& c, std::span<const double> theta,
                   std::vector<double>& out) const {
    int np = static_cast<int>(X.size());
    out.resize(np);
    for (int k = 0; k < np; ++k) {
      double eta = 0.0;
      for (std::size_t j = 0; j < c.xrow[k].size(); ++j)
        eta += c.xrow[k][j] * theta[offset[k] + j];
      double v = links[k].inverse(eta);
      if (!std::isfinite(v)) return false;
      out[k] = v;
    }
    return true;
  }

  double nll(const FamilySpec& fam, std::span<const double> theta) const {
    if (theta.size() != n_theta) throw std::invalid_argument("theta size mismatch");
    double total = 0.0;
    std::vector<double> params;
    for (const auto& c : cells) {
      if (!cell_params(c, theta, params)) return kInf;
      for (auto [y, w] : c.y_w) {
        double lp;
        try {
          lp = log_pmf(fam, params, y);
        } catch (const std::domain_error&) {
          return kInf;
        }
        if (std::isnan(lp) || lp == kInf) return kInf;
        total -= w * lp;
        if (total == kInf) return kInf;
      }
    }
    return std::isfinite(total) ? total : kInf;
  }
};

std::vector<double> start_vector(const ModelSpec& spec, const ObservationTable& t,
                                 const Workspace& ws) {
  int np = spec.family.n_params();
  double ybar = 0.0, zfrac = 0.0;
  for (long y : t.response) {
    ybar += static_cast<double>(y);
    if (y == 0) zfrac += 1.0;
  }
  ybar /= static_cast<double>(t.n());
  zfrac /= static_cast<double>(t.n());

  std::vector<double> theta(ws.n_theta, 0.0);
  for (int k = 0; k < np; ++k) {
    const TermList& tl = spec.predictors[k];
    double base;
    if (k == 0) {
      base = ws.links[k].forward(std::max(ybar, 0.1));
    } else if (spec.family.is_inflation(k)) {
      double p0 = std::exp(-std::max(ybar, 0.1));
      double excess = (zfrac - p0) / (1.0 - p0);
      excess = std::clamp(excess, 0.01, 0.9);
      base = std::log(excess / (1.0 - excess));
    } else {
      base = 0.0;  // dispersion starts at link(1)
    }
    // intercept column under treatment coding; the leading factor's level
    // columns under cell-means coding
    std::size_t base_cols = 1;
    if (tl.coding == Coding::cell_means && !tl.terms.empty()) {
      auto fi = t.factor_index(tl.terms[0].a);
      base_cols = fi >= 0 ? t.factors[fi].levels.size() : 1;
    }
    for (std::size_t j = 0; j < std::min(base_cols, ws.X[k].cols()); ++j)
      theta[ws.offset[k] + j] = base;
  }
  return theta;
}

}  // namespace

ModelSpec ModelSpec::intercepts(FamilySpec f) {
  ModelSpec spec;
  spec.family = f;
  for (int k = 0; k < f.n_params(); ++k)
    spec.predictors.push_back(TermList::intercept_only());
  return spec;
}

std::string ModelSpec::str() const {
  std::ostringstream os;
  os << family.name() << "(";
  for (std::size_t k = 0; k < predictors.size(); ++k) {
    if (k) os << ", ";
    os << family.param_name(static_cast<int>(k)) << " ~ " << predictors[k].str();
  }
  os << ")";
  return os.str();
}

double FittedModel::bic() const {
  return deviance() + static_cast<double>(df) * std::log(static_cast<double>(n_obs));
}

std::vector<double> FittedModel::theta() const {
  std::vector<double> out;
  for (const auto& b : coef) out.insert(out.end(), b.beta.begin(), b.beta.end());
  return out;
}

std::vector<std::vector<double>> FittedModel::fitted_params(
    const ObservationTable& t) const {
  Workspace ws(spec, t);
  auto th = theta();
  std::vector<std::vector<double>> out(t.n());
  std::vector<double> params;
  for (const auto& c : ws.cells) {
    if (!ws.cell_params(c, th, params))
      throw std::runtime_error("non-finite fitted parameter");
    for (std::size_t i : c.rows) out[i] = params;
  }
  return out;
}

double neg_log_likelihood(const ModelSpec& spec, const ObservationTable& t,
                          std::span<const double> theta) {
  Workspace ws(spec, t);
  return ws.nll(spec.family, theta);
}

FittedModel fit(const ModelSpec& spec, const ObservationTable& t,
                const FitOptions& opt) {
  Workspace ws(spec, t);
  auto objective = [&](const std::vector<double>& x) {
    return ws.nll(spec.family, x);
  };

  std::vector<double> theta0 = start_vector(spec, t, ws);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> jitter(0.0, 0.5);

  detail::OptimResult best;
  int best_start = -1;
  for (int s = 0; s < opt.n_starts; ++s) {
    std::vector<double> x = theta0;
    if (s > 0)
      for (double& v : x) v += jitter(rng);
    auto r = detail::minimize(objective, std::move(x), opt.max_iter, opt.tol);
    if (!std::isfinite(r.fx)) continue;
    if (best_start < 0 || r.fx < best.fx) {
      best = std::move(r);
      best_start = s;
    }
  }
  if (best_start < 0)
    throw std::runtime_error("all starts failed for " + spec.str());

  FittedModel m;
  m.spec = spec;
  m.spec.links = ws.links;
  m.data_fingerprint = t.fingerprint();
  m.n_obs = t.n();
  m.nll = best.fx;
  m.df = ws.n_theta;
  m.converged = best.converged;
  m.iterations = best.iterations;
  {
    auto g = detail::fd_gradient(objective, best.x, best.fx);
    for (double v : g) m.grad_norm = std::max(m.grad_norm, std::abs(v));
  }
  m.best_start = best_start;
  for (std::size_t k = 0; k < ws.X.size(); ++k) {
    CoefBlock b;
    b.param = spec.family.param_name(static_cast<int>(k));
    b.link = ws.links[k];
    b.labels = ws.X[k].labels;
    b.beta.assign(best.x.begin() + ws.offset[k],
                  best.x.begin() + ws.offset[k] + ws.X[k].cols());
    m.coef.push_back(std::move(b));
  }

  // observed information by central differences; vcov needs it positive
  // definite
  std::size_t p = ws.n_theta;
  std::vector<double> h(p);
  for (std::size_t i = 0; i < p; ++i) h[i] = 1e-4 * (1.0 + std::abs(best.x[i]));
  Eigen::MatrixXd H(p, p);
  bool h_ok = true;
  std::vector<double> xt = best.x;
  auto feval = [&](const std::vector<double>& x) { return ws.nll(spec.family, x); };
  for (std::size_t i = 0; i < p && h_ok; ++i) {
    for (std::size_t j = i; j < p && h_ok; ++j) {
      double v;
      if (i == j) {
        xt[i] = best.x[i] + h[i];
        double fp = feval(xt);
        xt[i] = best.x[i] - h[i];
        double fm = feval(xt);
        xt[i] = best.x[i];
        v = (fp - 2.0 * best.fx + fm) / (h[i] * h[i]);
      } else {
        double fpp, fpm, fmp, fmm;
        xt[i] = best.x[i] + h[i]; xt[j] = best.x[j] + h[j]; fpp = feval(xt);
        xt[j] = best.x[j] - h[j]; fpm = feval(xt);
        xt[i] = best.x[i] - h[i]; fmm = feval(xt);
        xt[j] = best.x[j] + h[j]; fmp = feval(xt);
        xt[i] = best.x[i]; xt[j] = best.x[j];
        v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      }
      if (!std::isfinite(v)) h_ok = false;
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  if (h_ok) {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd V = llt.solve(Eigen::MatrixXd::Identity(p, p));
      m.vcov_available = true;
      m.vcov.resize(p * p);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) m.vcov[i * p + j] = V(i, j);
    }
  }

  // boundary diagnostics on the fitted linear predictors
  std::vector<double> params;
  std::vector<double> eta_max(ws.X.size(), 0.0);
  bool clamp_hit = false;
  for (const auto& c : ws.cells) {
    for (std::size_t k = 0; k < ws.X.size(); ++k) {
      double eta = 0.0;
      for (std::size_t j = 0; j < c.xrow[k].size(); ++j)
        eta += c.xrow[k][j] * best.x[ws.offset[k] + j];
      eta_max[k] = std::max(eta_max[k], std::abs(eta));
    }
    if (ws.cell_params(c, best.x, params)) {
      for (std::size_t k = 0; k < ws.X.size(); ++k)
        if (spec.family.is_inflation(static_cast<int>(k)) &&
            params[k] >= 1.0 - 1e-9)
          clamp_hit = true;
    }
  }
  for (std::size_t k = 0; k < ws.X.size(); ++k)
    if (eta_max[k] >= 15.0)
      m.boundary_flags.push_back(std::string(spec.family.param_name(
                                     static_cast<int>(k))) +
                                 " linear predictor at boundary (|eta| >= 15)");
  if (clamp_hit)
    m.boundary_flags.push_back("inflation probability at clamp boundary");
  return m;
}

Criteria information_criteria(const FittedModel& fm, std::size_t n) {
  double dev = fm.deviance();
  double df = static_cast<double>(fm.df);
  return {dev + 2.0 * df,
          dev + df * (n > 0 ? std::log(static_cast<double>(n)) : 0.0)};
}

std::vector<long> simulate(const FittedModel& m, const ObservationTable& t,
                           std::mt19937_64& rng) {
  auto params = m.fitted_params(t);
  std::vector<long> out(t.n());
  for (std::size_t i = 0; i < t.n(); ++i)
    out[i] = sample(m.spec.family, params[i], rng, 1)[0];
  return out;
}

std::string FittedModel::to_json() const {
  nlohmann::json j;
  j["family"] = std::string(spec.family.name());
  j["n_obs"] = n_obs;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(data_fingerprint));
  j["data_fingerprint"] = buf;
  j["df"] = df;
  j["deviance"] = deviance();
  j["aic"] = aic();
  j["bic"] = bic();
  j["convergence"] = {{"converged", converged},
                      {"iterations", iterations},
                      {"gradient_norm", grad_norm},
                      {"best_start", best_start},
                      {"boundary_flags", boundary_flags}};
  nlohmann::json coefs = nlohmann::json::object();
  nlohmann::json links = nlohmann::json::object();
  nlohmann::json preds = nlohmann::json::object();
  for (std::size_t k = 0; k < coef.size(); ++k) {
    const auto& b = coef[k];
    nlohmann::json block = nlohmann::json::object();
    for (std::size_t i = 0; i < b.labels.size(); ++i) block[b.labels[i]] = b.beta[i];
    coefs[b.param] = block;
    links[b.param] = std::string(b.link.name());
    preds[b.param] = spec.predictors[k].str();
  }
  j["coefficients"] = coefs;
  j["links"] = links;
  j["predictors"] = preds;
  if (vcov_available) {
    std::vector<std::string> order;
    for (const auto& b : coef)
      for (const auto& lab : b.labels) order.push_back(b.param + ":" + lab);
    nlohmann::json se = nlohmann::json::object();
    std::size_t p = order.size(), idx = 0;
    for (const auto& b : coef) {
      nlohmann::json block = nlohmann::json::object();
      for (const auto& lab : b.labels) {
        block[lab] = std::sqrt(vcov[idx * p + idx]);
        ++idx;
      }
      se[b.param] = block;
    }
    j["std_errors"] = se;
    j["vcov"] = nlohmann::json::object();
    j["vcov"]["order"] = order;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < p; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t jj = 0; jj < p; ++jj) row.push_back(vcov[i * p + jj]);
      rows.push_back(row);
    }
    j["vcov"]["matrix"] = rows;
  }
  return j.dump(2);
}

}  // namespace zic
