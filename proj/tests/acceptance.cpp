// Acceptance suite: one criterion per function, each printing a single
// PASS/FAIL line.  Tolerances and runtime budgets are pinned in code.
// Run all criteria (no arguments) or one of them (--criterion N).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bessel_oracle.hpp"

#include "zic/data.hpp"
#include "zic/diagnostics.hpp"
#include "zic/families.hpp"
#include "zic/fit.hpp"
#include "zic/select.hpp"
#include "zic/specfun.hpp"

using namespace zic;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Check {
  Outcome* o;
  void operator()(bool ok, const std::string& msg) {
    if (ok) return;
    o->pass = false;
    o->detail += "    " + msg + "\n";
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool within(double x, double center, double tol) {
  return std::abs(x - center) <= tol;
}

ModelSpec photoperiod_spec(const char* family, int n_photo_params) {
  ModelSpec spec;
  spec.family = FamilySpec::from_name(family);
  for (int k = 0; k < spec.family.n_params(); ++k)
    spec.predictors.push_back(k < n_photo_params
                                  ? TermList::parse("~0+photoperiod")
                                  : TermList::intercept_only());
  return spec;
}

// --------------------------------------------------------------------
// 1. Embedded data reproduces the published summary table.

Outcome criterion1() {
  Outcome o;
  Check ck{&o};
  ObservationTable t = trajan();
  ck(t.n() == 270, "row count " + std::to_string(t.n()) + " != 270");

  auto cells = cell_summaries(t);
  ck(cells.size() == 8, "expected 8 treatment cells");
  const std::size_t counts[8] = {30, 30, 40, 40, 30, 30, 30, 40};
  const char* means[8] = {"5.8", "7.8", "7.5", "7.2",
                          "3.3", "2.7", "3.1", "2.5"};
  const char* vars[8] = {"14.1", "7.6", "8.5", "8.8",
                         "16.6", "14.8", "13.5", "8.5"};
  for (std::size_t c = 0; c < cells.size() && c < 8; ++c) {
    char m[32], v[32];
    std::snprintf(m, sizeof m, "%.1f", cells[c].mean);
    std::snprintf(v, sizeof v, "%.1f", cells[c].variance.value_or(-1.0));
    ck(cells[c].count == counts[c],
       "cell " + std::to_string(c) + " count " +
           std::to_string(cells[c].count) + " != " + std::to_string(counts[c]));
    ck(std::strcmp(m, means[c]) == 0,
       "cell " + std::to_string(c) + " mean " + m + " != " + means[c]);
    ck(std::strcmp(v, vars[c]) == 0,
       "cell " + std::to_string(c) + " variance " + v + " != " + vars[c]);
  }
  return o;
}

// --------------------------------------------------------------------
// 2-5. The four published model fits.

Outcome fit_criterion(const ModelSpec& spec, double dev_c, double dev_tol,
                      std::size_t df_want, double aic_c, double bic_c,
                      FittedModel* keep) {
  Outcome o;
  Check ck{&o};
  ObservationTable t = trajan();
  FittedModel fm = fit(spec, t);
  if (keep) *keep = fm;
  ck(fm.converged, "fit did not converge");
  ck(fm.df == df_want, "df " + std::to_string(fm.df) + " != " +
                           std::to_string(df_want));
  ck(within(fm.deviance(), dev_c, dev_tol),
     "deviance " + fmt(fm.deviance()) + " outside " + fmt(dev_c) + " +- " +
         fmt(dev_tol));
  ck(within(fm.aic(), aic_c, dev_tol),
     "AIC " + fmt(fm.aic()) + " outside " + fmt(aic_c) + " +- " + fmt(dev_tol));
  ck(within(fm.bic(), bic_c, dev_tol),
     "BIC " + fmt(fm.bic()) + " outside " + fmt(bic_c) + " +- " + fmt(dev_tol));
  return o;
}

Outcome criterion2() {
  return fit_criterion(photoperiod_spec("ZIP", 2), 1251.613, 0.05, 4,
                       1259.613, 1274.007, nullptr);
}

Outcome criterion3() {
  Outcome o = fit_criterion(photoperiod_spec("ZINB", 3), 1233.623, 0.05, 6,
                            1245.623, 1267.214, nullptr);
  Check ck{&o};
  ObservationTable t = trajan();
  FittedModel fm = fit(photoperiod_spec("ZINB", 3), t);
  const struct {
    const char* param;
    double c8, c16, tol;
  } boxes[3] = {{"mu", 1.9725, 1.6954, 0.02},
                {"sigma", -3.1158, -1.8286, 0.05},
                {"nu", -4.3808, -0.1351, 0.2}};
  for (const auto& b : boxes) {
    for (const auto& blk : fm.coef) {
      if (blk.param != b.param) continue;
      ck(blk.labels.size() == 2 && blk.labels[0] == "photo8",
         std::string(b.param) + ": unexpected design columns");
      if (blk.labels.size() == 2) {
        ck(within(blk.beta[0], b.c8, b.tol),
           std::string(b.param) + "[photo8] " + fmt(blk.beta[0]) +
               " outside " + fmt(b.c8) + " +- " + fmt(b.tol));
        ck(within(blk.beta[1], b.c16, b.tol),
           std::string(b.param) + "[photo16] " + fmt(blk.beta[1]) +
               " outside " + fmt(b.c16) + " +- " + fmt(b.tol));
      }
    }
  }
  return o;
}

ModelSpec zipig_spec() {
  ModelSpec spec;
  spec.family = FamilySpec::from_name("ZIPIG");
  spec.predictors = {TermList::parse("~0+photoperiod"),
                     TermList::intercept_only(),
                     TermList::parse("~0+photoperiod")};
  return spec;
}

Outcome criterion4() {
  return fit_criterion(zipig_spec(), 1241.760, 0.5, 5, 1251.760, 1269.750,
                       nullptr);
}

Outcome criterion5() {
  ModelSpec spec;
  spec.family = FamilySpec::from_name("ZIBNB");
  spec.predictors = {TermList::parse("~0+photoperiod"),
                     TermList::intercept_only(), TermList::intercept_only(),
                     TermList::parse("~0+photoperiod")};
  return fit_criterion(spec, 1238.955, 0.5, 6, 1250.955, 1272.545, nullptr);
}

// --------------------------------------------------------------------
// 6. Stepwise selection recovers the published ZINB terms.

Outcome criterion6() {
  Outcome o;
  Check ck{&o};
  ObservationTable t = trajan();
  SelectionTrace tr = step_gaic_all(FamilySpec::from_name("ZINB"), t,
                                    CandidateScope::defaults(t), 2.0);

  for (std::size_t p = 0; p < 3; ++p) {
    const auto& terms = tr.final_spec.predictors[p].terms;
    bool photoperiod_only = terms.size() == 1 &&
                            terms[0].label() == "photoperiod";
    ck(photoperiod_only,
       "parameter " + std::to_string(p) + " selected '" +
           tr.final_spec.predictors[p].str() + "', want photoperiod");
  }
  ck(within(tr.final_fit.aic(), 1245.623, 0.05),
     "final AIC " + fmt(tr.final_fit.aic()) + " outside 1245.623 +- 0.05");

  // greedy soundness: each accepted move is the best converged candidate
  // of its evaluation wave, and strictly improves on the incumbent
  std::map<std::pair<int, int>, std::vector<const StepRecord*>> waves;
  for (const auto& r : tr.records) waves[{r.step, r.round}].push_back(&r);
  double incumbent = std::numeric_limits<double>::infinity();
  bool first = true;
  for (const auto& [key, recs] : waves) {
    const StepRecord* acc = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const StepRecord* r : recs) {
      if (r->accepted) acc = r;
      if (r->converged) best = std::min(best, r->gaic);
    }
    if (acc) {
      ck(std::abs(acc->gaic - best) <= 1e-12,
         "accepted move is not the wave optimum");
      ck(first || acc->gaic < incumbent - 1e-6,
         "accepted move does not improve the criterion");
      incumbent = acc->gaic;
      first = false;
    }
  }
  return o;
}

// --------------------------------------------------------------------
// 7. Criterion orderings across the four published models.

Outcome criterion7() {
  Outcome o;
  Check ck{&o};
  ObservationTable t = trajan();
  FittedModel zip = fit(photoperiod_spec("ZIP", 2), t);
  FittedModel zinb = fit(photoperiod_spec("ZINB", 3), t);
  FittedModel zipig = fit(zipig_spec(), t);
  ModelSpec bnb_spec;
  bnb_spec.family = FamilySpec::from_name("ZIBNB");
  bnb_spec.predictors = {TermList::parse("~0+photoperiod"),
                         TermList::intercept_only(),
                         TermList::intercept_only(),
                         TermList::parse("~0+photoperiod")};
  FittedModel zibnb = fit(bnb_spec, t);

  std::string aics = "AIC " + fmt(zinb.aic()) + " (ZINB), " +
                     fmt(zibnb.aic()) + " (ZIBNB), " + fmt(zipig.aic()) +
                     " (ZIPIG), " + fmt(zip.aic()) + " (ZIP)";
  ck(zinb.aic() < zibnb.aic() && zibnb.aic() < zipig.aic() &&
         zipig.aic() < zip.aic(),
     "AIC order is not ZINB < ZIBNB < ZIPIG < ZIP: " + aics);

  std::string bics = "BIC " + fmt(zinb.bic()) + " (ZINB), " +
                     fmt(zipig.bic()) + " (ZIPIG), " + fmt(zibnb.bic()) +
                     " (ZIBNB), " + fmt(zip.bic()) + " (ZIP)";
  ck(zinb.bic() < zipig.bic() && zipig.bic() < zibnb.bic() &&
         zibnb.bic() < zip.bic(),
     "BIC order is not ZINB < ZIPIG < ZIBNB < ZIP: " + bics);
  return o;
}

// --------------------------------------------------------------------
// 8. Distribution normalization and reduction ladders.

Outcome criterion8() {
  Outcome o;
  Check ck{&o};
  const double mus[] = {0.5, 2.0, 7.0};
  const double disps[] = {0.1, 1.0};
  const double infls[] = {0.0, 0.3, 0.7};

  for (const char* name : {"PO", "NB", "ZIP", "ZINB", "ZIPIG", "ZIBNB"}) {
    FamilySpec f = FamilySpec::from_name(name);
    std::vector<std::vector<double>> axes;
    for (int k = 0; k < f.n_params(); ++k) {
      if (f.is_inflation(k))
        axes.push_back({infls[0], infls[1], infls[2]});
      else if (k == 0)
        axes.push_back({mus[0], mus[1], mus[2]});
      else
        axes.push_back({disps[0], disps[1]});
    }
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
      std::vector<double> params;
      for (std::size_t k = 0; k < axes.size(); ++k)
        params.push_back(axes[k][idx[k]]);
      long cap = truncation_point(f, params);
      double total = cdf(f, params, cap);
      ck(total >= 1.0 - 1e-8 && total <= 1.0 + 1e-10,
         std::string(name) + " sum " + fmt(total) + " at mu=" +
             fmt(params[0]));
      std::size_t k = 0;
      for (; k < axes.size(); ++k) {
        if (++idx[k] < axes[k].size()) break;
        idx[k] = 0;
      }
      if (k == axes.size()) break;
    }
  }

  // reduction ladders, pointwise to 1e-12
  FamilySpec po = FamilySpec::from_name("PO"), zf = FamilySpec::from_name("ZIP");
  FamilySpec nb = FamilySpec::from_name("NB"), zn = FamilySpec::from_name("ZINB");
  for (double mu : mus) {
    for (long y = 0; y <= 400; ++y) {
      double a = std::exp(log_pmf(zf, std::vector<double>{mu, 0.0}, y));
      double b = std::exp(log_pmf(po, std::vector<double>{mu}, y));
      if (std::abs(a - b) > 1e-12) {
        ck(false, "ZIP(nu=0) != PO at mu=" + fmt(mu) + " y=" +
                      std::to_string(y));
        break;
      }
    }
    for (double sig : disps) {
      for (long y = 0; y <= 400; ++y) {
        double a =
            std::exp(log_pmf(zn, std::vector<double>{mu, sig, 0.0}, y));
        double b = std::exp(log_pmf(nb, std::vector<double>{mu, sig}, y));
        if (std::abs(a - b) > 1e-12) {
          ck(false, "ZINB(nu=0) != NB at mu=" + fmt(mu) + " sigma=" +
                        fmt(sig) + " y=" + std::to_string(y));
          break;
        }
      }
    }
  }
  return o;
}

// --------------------------------------------------------------------
// 9. Special functions against independent oracles.

Outcome criterion9() {
  Outcome o;
  Check ck{&o};
  std::mt19937_64 rng(20260816);
  std::uniform_int_distribution<int> pick_m(0, 30);
  std::uniform_real_distribution<double> pick_t(0.1, 50.0);
  for (int i = 0; i < 60; ++i) {
    int m = pick_m(rng);
    double t = pick_t(rng);
    double got = log_bessel_k_half(m, t);
    double want = log_bessel_quadrature(m, t);
    if (!(std::abs(got - want) <= 1e-9 * std::max(1.0, std::abs(want)))) {
      ck(false, "log K_{" + std::to_string(m) + "+1/2}(" + fmt(t) + ") = " +
                    fmt(got) + ", oracle " + fmt(want));
    }
  }

  for (int i = -80; i <= 80; ++i) {
    double p = std::pow(10.0, -8.0 + 16.0 * (i + 80) / 160.0);
    p = std::min(p, 1.0 - 1e-8);
    double z = std_normal_quantile(p);
    double back = std_normal_cdf(z);
    if (std::abs(back - p) > 1e-10 * std::max(p, 1e-3)) {
      ck(false, "cdf(quantile(" + fmt(p) + ")) = " + fmt(back));
    }
  }
  for (double z = -8.0; z <= 8.0; z += 0.25) {
    double p = std_normal_cdf(z);
    if (p <= 0.0 || p >= 1.0) continue;
    double back = std_normal_quantile(p);
    ck(std::abs(back - z) <= 1e-10 * std::max(1.0, std::abs(z)),
       "quantile(cdf(" + fmt(z) + ")) = " + fmt(back));
  }
  return o;
}

// --------------------------------------------------------------------
// 10. Simulation / refit calibration of the quantile residuals.

Outcome criterion10() {
  Outcome o;
  Check ck{&o};
  ObservationTable t = trajan();
  ModelSpec spec = photoperiod_spec("ZINB", 3);
  FittedModel truth = fit(spec, t);

  // balanced design with 2500 shoots per photoperiod
  ObservationTable big;
  big.response_name = t.response_name;
  big.factors = {t.factors[0]};
  big.codes.emplace_back();
  for (int level = 0; level < 2; ++level)
    for (int i = 0; i < 2500; ++i) big.codes[0].push_back(level);
  big.response.assign(5000, 0);

  const int reps = 100;
  double sum_mean = 0.0, sum_sd = 0.0, sum_cover = 0.0;
  for (int s = 1; s <= reps; ++s) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(s));
    big.response = simulate(truth, big, rng);
    FitOptions fast;
    fast.n_starts = 1;
    fast.seed = static_cast<std::uint64_t>(s);
    FittedModel refit = fit(spec, big, fast);
    ResidualSet rs =
        quantile_residuals(refit, big, static_cast<std::uint64_t>(s));
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (const auto& r : rs.rows) {
      if (!r.z) continue;
      sum += *r.z;
      sumsq += *r.z * *r.z;
      ++n;
    }
    double mean = sum / static_cast<double>(n);
    double sd = std::sqrt(sumsq / static_cast<double>(n) - mean * mean);
    auto ws = worm_series(rs, big);
    std::size_t inside = 0;
    for (const auto& p : ws[0].points) inside += std::abs(p.d) <= p.band;
    sum_mean += mean;
    sum_sd += sd;
    sum_cover += static_cast<double>(inside) /
                 static_cast<double>(ws[0].points.size());
  }
  double avg_mean = sum_mean / reps;
  double avg_sd = sum_sd / reps;
  double avg_cover = sum_cover / reps;
  ck(std::abs(avg_mean) <= 0.05,
     "mean residual " + fmt(avg_mean) + " outside +-0.05");
  ck(avg_sd >= 0.95 && avg_sd <= 1.05,
     "residual sd " + fmt(avg_sd) + " outside [0.95, 1.05]");
  ck(avg_cover >= 0.93,
     "worm band coverage " + fmt(avg_cover) + " below 0.93");
  return o;
}

// --------------------------------------------------------------------
// 11. Numerical gradient consistency across step sizes.

Outcome criterion11() {
  Outcome o;
  Check ck{&o};
  ObservationTable t = trajan();
  ModelSpec spec = photoperiod_spec("ZINB", 3);
  FittedModel fm = fit(spec, t);
  std::vector<double> center = fm.theta();

  std::mt19937_64 rng(11);
  std::normal_distribution<double> jitter(0.0, 0.1);
  auto grad = [&](const std::vector<double>& x, double h0) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double h = h0 * (1.0 + std::abs(x[i]));
      auto hi = x, lo = x;
      hi[i] += h;
      lo[i] -= h;
      g[i] = (neg_log_likelihood(spec, t, hi) -
              neg_log_likelihood(spec, t, lo)) /
             (2.0 * h);
    }
    return g;
  };

  for (int point = 0; point < 3; ++point) {
    std::vector<double> x = center;
    for (auto& v : x) v += jitter(rng);
    if (!std::isfinite(neg_log_likelihood(spec, t, x))) {
      ck(false, "perturbed point " + std::to_string(point) +
                    " left the domain");
      continue;
    }
    auto g5 = grad(x, 1e-5);
    auto g7 = grad(x, 1e-7);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double scale = std::max(1.0, std::abs(g7[i]));
      ck(std::abs(g5[i] - g7[i]) <= 1e-4 * scale,
         "point " + std::to_string(point) + " coordinate " +
             std::to_string(i) + ": " + fmt(g5[i]) + " vs " + fmt(g7[i]));
    }
  }
  return o;
}

struct Criterion {
  int id;
  const char* label;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "summary table", 1.0, criterion1},
      {2, "ZIP fit", 10.0, criterion2},
      {3, "ZINB fit and coefficients", 30.0, criterion3},
      {4, "ZIPIG fit", 60.0, criterion4},
      {5, "ZIBNB fit", 60.0, criterion5},
      {6, "stepwise selection", 300.0, criterion6},
      {7, "criterion orderings", 120.0, criterion7},
      {8, "normalization and reductions", 120.0, criterion8},
      {9, "special-function oracles", 60.0, criterion9},
      {10, "simulation calibration", 300.0, criterion10},
      {11, "gradient step consistency", 60.0, criterion11},
  };

  bool all_pass = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome o = c.run();
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "    runtime " + fmt(secs) + "s exceeds budget " +
                  fmt(c.budget_s) + "s\n";
    }
    std::printf("criterion %2d (%s): %s [%.2fs]\n", c.id, c.label,
                o.pass ? "PASS" : "FAIL", secs);
    if (!o.pass) std::fputs(o.detail.c_str(), stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
