// zicount: fit, select, compare, and diagnose zero-inflated count models
// from the command line.  Artifacts (fit.json, trace.log, *.csv, *.svg)
// are deterministic given the flags and seed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "svg.hpp"

#include "zic/data.hpp"
#include "zic/diagnostics.hpp"
#include "zic/families.hpp"
#include "zic/fit.hpp"
#include "zic/select.hpp"
#include "zic/specfun.hpp"

namespace fs = std::filesystem;
using namespace zic;

namespace {

struct DataOpts {
  std::string source = "trajan";
  std::string response = "roots";
  std::string factors;
};

struct TermOpts {
  std::string mu = "1";
  std::string sigma = "1";
  std::string nu = "1";
  std::string tau = "1";
  std::string mu_link, sigma_link, nu_link, tau_link;

  const std::string& term(const std::string& p) const {
    if (p == "mu") return mu;
    if (p == "sigma") return sigma;
    if (p == "nu") return nu;
    return tau;
  }
  const std::string& link(const std::string& p) const {
    if (p == "mu") return mu_link;
    if (p == "sigma") return sigma_link;
    if (p == "nu") return nu_link;
    return tau_link;
  }
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

ObservationTable load_table(const DataOpts& d) {
  if (d.source == "trajan") return trajan();
  CsvSchema schema;
  schema.response = d.response;
  schema.factors = split_csv(d.factors);
  if (schema.factors.empty())
    throw data_error("--factors is required when --data is a CSV path");
  return read_csv(d.source, schema);
}

ModelSpec build_spec(const std::string& family, const TermOpts& terms) {
  ModelSpec spec;
  spec.family = FamilySpec::from_name(family);
  int np = spec.family.n_params();
  for (int k = 0; k < np; ++k) {
    std::string pn(spec.family.param_name(k));
    spec.predictors.push_back(TermList::parse(terms.term(pn)));
    const std::string& ln = terms.link(pn);
    spec.links.push_back(ln.empty() ? spec.family.default_link(k)
                                    : Link::from_name(ln));
  }
  return spec;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw data_error("cannot write " + path.string());
  os << content;
}

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

void print_fit(const FittedModel& fm) {
  std::printf("family %s  n %zu  df %zu  converged %s\n",
              std::string(fm.spec.family.name()).c_str(), fm.n_obs, fm.df,
              fm.converged ? "yes" : "no");
  std::printf("deviance %.3f\nAIC %.3f\nBIC %.3f\n", fm.deviance(), fm.aic(),
              fm.bic());
  std::printf("%-8s %-20s %12s %12s\n", "param", "term", "estimate",
              "std.error");
  auto effects = term_effects(fm);
  for (const auto& e : effects) {
    if (e.has_interval)
      std::printf("%-8s %-20s %12.4f %12.4f\n", e.parameter.c_str(),
                  e.label.c_str(), e.estimate, e.se);
    else
      std::printf("%-8s %-20s %12.4f %12s\n", e.parameter.c_str(),
                  e.label.c_str(), e.estimate, "-");
  }
  for (const auto& flag : fm.boundary_flags)
    std::printf("note: %s\n", flag.c_str());
}

// ---------------------------------------------------------------------
// fit.json round trip for `diagnose --fit`

FittedModel model_from_json(const nlohmann::json& j,
                            const ObservationTable& t) {
  FittedModel fm;
  fm.spec.family = FamilySpec::from_name(j.at("family").get<std::string>());
  int np = fm.spec.family.n_params();
  for (int k = 0; k < np; ++k) {
    std::string pn(fm.spec.family.param_name(k));
    fm.spec.predictors.push_back(
        TermList::parse(j.at("predictors").at(pn).get<std::string>()));
    fm.spec.links.push_back(
        Link::from_name(j.at("links").at(pn).get<std::string>()));
  }

  std::uint64_t fp = std::strtoull(
      j.at("data_fingerprint").get<std::string>().c_str(), nullptr, 16);
  if (fp != t.fingerprint())
    throw data_error("fit.json was produced from different data");
  fm.data_fingerprint = fp;
  fm.n_obs = j.at("n_obs").get<std::size_t>();
  fm.df = j.at("df").get<std::size_t>();
  fm.nll = j.at("deviance").get<double>() / 2.0;
  const auto& conv = j.at("convergence");
  fm.converged = conv.at("converged").get<bool>();
  fm.iterations = conv.at("iterations").get<int>();
  fm.grad_norm = conv.at("gradient_norm").get<double>();
  fm.best_start = conv.at("best_start").get<int>();
  for (const auto& f : conv.at("boundary_flags"))
    fm.boundary_flags.push_back(f.get<std::string>());

  std::vector<std::string> order;
  for (int k = 0; k < np; ++k) {
    std::string pn(fm.spec.family.param_name(k));
    DesignMatrix X = build_design(t, fm.spec.predictors[k]);
    CoefBlock b;
    b.param = pn;
    b.link = fm.spec.links[k];
    b.labels = X.labels;
    for (const auto& lab : b.labels) {
      b.beta.push_back(j.at("coefficients").at(pn).at(lab).get<double>());
      order.push_back(pn + ":" + lab);
    }
    fm.coef.push_back(std::move(b));
  }

  if (j.contains("vcov")) {
    std::map<std::string, std::size_t> stored;
    const auto& jorder = j.at("vcov").at("order");
    for (std::size_t i = 0; i < jorder.size(); ++i)
      stored[jorder[i].get<std::string>()] = i;
    const auto& m = j.at("vcov").at("matrix");
    std::size_t p = order.size();
    fm.vcov.assign(p * p, 0.0);
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b)
        fm.vcov[a * p + b] =
            m.at(stored.at(order[a])).at(stored.at(order[b])).get<double>();
    fm.vcov_available = true;
  }
  return fm;
}

// ---------------------------------------------------------------------
// plot emission

std::string worm_svg(const WormSeries& ws, const std::string& title) {
  double qlo = 0, qhi = 0, dmax = 0.1;
  for (const auto& p : ws.points) {
    qlo = std::min(qlo, p.q);
    qhi = std::max(qhi, p.q);
    dmax = std::max({dmax, std::abs(p.d), std::min(p.band, 1.5)});
  }
  zictool::Svg svg(480, 360);
  svg.frame(qlo - 0.2, qhi + 0.2, -dmax * 1.15, dmax * 1.15, title,
            "unit normal quantile", "deviation");
  svg.data_line(qlo - 0.2, 0.0, qhi + 0.2, 0.0, "#999999", 1.0, "4,3");
  std::vector<std::pair<double, double>> up, dn;
  for (const auto& p : ws.points) {
    up.emplace_back(p.q, std::min(p.band, dmax * 1.15));
    dn.emplace_back(p.q, std::max(-p.band, -dmax * 1.15));
  }
  svg.polyline(up, "#cc3333", 1.0, "5,3");
  svg.polyline(dn, "#cc3333", 1.0, "5,3");
  for (const auto& p : ws.points) svg.circle(p.q, p.d, 2.2, "#2255aa");
  return svg.str();
}

std::string qq_svg(const WormSeries& ws) {
  double lo = -1, hi = 1;
  for (const auto& p : ws.points) {
    lo = std::min({lo, p.q, p.q + p.d});
    hi = std::max({hi, p.q, p.q + p.d});
  }
  zictool::Svg svg(480, 360);
  svg.frame(lo - 0.2, hi + 0.2, lo - 0.2, hi + 0.2,
            "normal Q-Q of quantile residuals", "theoretical quantile",
            "sample quantile");
  svg.data_line(lo - 0.2, lo - 0.2, hi + 0.2, hi + 0.2, "#999999", 1.0, "4,3");
  for (const auto& p : ws.points) svg.circle(p.q, p.q + p.d, 2.2, "#2255aa");
  return svg.str();
}

std::string terms_svg(const std::vector<TermEffect>& effects) {
  double lo = 0, hi = 0;
  for (const auto& e : effects) {
    lo = std::min(lo, e.has_interval ? e.lo : e.estimate);
    hi = std::max(hi, e.has_interval ? e.hi : e.estimate);
  }
  double pad = 0.08 * (hi - lo + 1e-9) + 0.1;
  zictool::Svg svg(std::max<std::size_t>(360, 90 * effects.size() + 120), 360);
  svg.frame(0.5, effects.size() + 0.5, lo - pad, hi + pad,
            "term effects (link scale)", "", "estimate");
  svg.data_line(0.5, 0.0, effects.size() + 0.5, 0.0, "#999999", 1.0, "4,3");
  for (std::size_t i = 0; i < effects.size(); ++i) {
    const auto& e = effects[i];
    double x = static_cast<double>(i + 1);
    if (e.has_interval) {
      svg.data_line(x, e.lo, x, e.hi, "#2255aa", 1.6);
      svg.data_line(x - 0.08, e.lo, x + 0.08, e.lo, "#2255aa", 1.6);
      svg.data_line(x - 0.08, e.hi, x + 0.08, e.hi, "#2255aa", 1.6);
    }
    svg.circle(x, e.estimate, 3.0, "#cc3333");
    svg.data_text(x, lo - pad * 0.55, e.parameter + ":" + e.label, 9);
  }
  return svg.str();
}

std::string hist_svg(const ObservationTable& t, const FittedModel& fm) {
  long ymax = 0;
  for (long y : t.response) ymax = std::max(ymax, y);
  std::vector<double> observed(ymax + 1, 0.0), expected(ymax + 1, 0.0);
  for (long y : t.response) observed[y] += 1.0;
  auto params = fm.fitted_params(t);
  for (std::size_t i = 0; i < t.n(); ++i)
    for (long y = 0; y <= ymax; ++y)
      expected[y] += std::exp(log_pmf(fm.spec.family, params[i], y));
  double top = 0;
  for (long y = 0; y <= ymax; ++y)
    top = std::max({top, observed[y], expected[y]});

  zictool::Svg svg(560, 380);
  svg.frame(-0.6, ymax + 0.6, 0.0, top * 1.1, "observed counts and fitted pmf",
            t.response_name, "count");
  for (long y = 0; y <= ymax; ++y)
    svg.data_rect(static_cast<double>(y), 0.0, observed[y], 0.38, "#b8cce4");
  std::vector<std::pair<double, double>> line;
  for (long y = 0; y <= ymax; ++y)
    line.emplace_back(static_cast<double>(y), expected[y]);
  svg.polyline(line, "#cc3333", 1.6);
  for (const auto& [x, y] : line) svg.circle(x, y, 2.4, "#cc3333");
  return svg.str();
}

// ---------------------------------------------------------------------
// artifact writers

std::string residuals_csv(const ResidualSet& rs) {
  std::string out = "index,y,f_lo,f_hi,u,z,degenerate\n";
  for (const auto& r : rs.rows) {
    out += std::to_string(r.index) + "," + std::to_string(r.y) + "," +
           csv_num(r.f_lo) + "," + csv_num(r.f_hi) + "," + csv_num(r.u) + ",";
    if (r.z) out += csv_num(*r.z);
    out += ",";
    out += r.degenerate ? "1" : "0";
    out += "\n";
  }
  return out;
}

std::string worm_csv(const WormSeries& ws) {
  std::string out = "q,d,band\n";
  for (const auto& p : ws.points)
    out += csv_num(p.q) + "," + csv_num(p.d) + "," + csv_num(p.band) + "\n";
  return out;
}

std::string terms_csv(const std::vector<TermEffect>& effects) {
  std::string out = "parameter,term,estimate,se,lo,hi,has_interval\n";
  for (const auto& e : effects) {
    out += e.parameter + "," + e.label + "," + csv_num(e.estimate) + ",";
    if (e.has_interval)
      out += csv_num(e.se) + "," + csv_num(e.lo) + "," + csv_num(e.hi) + ",1\n";
    else
      out += ",,,0\n";
  }
  return out;
}

std::string compare_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "family,mu,sigma,nu,tau,deviance,aic,bic\n";
  for (const auto& r : rows) {
    out += r.family + ",";
    for (std::size_t k = 0; k < 4; ++k)
      out += (k < r.terms.size() ? r.terms[k] : std::string()) + ",";
    out += csv_num(r.deviance) + "," + csv_num(r.aic) + "," + csv_num(r.bic) +
           "\n";
  }
  return out;
}

// ---------------------------------------------------------------------
// commands

int cmd_fit(const DataOpts& dopt, const TermOpts& topt,
            const std::string& family, std::uint64_t seed,
            const fs::path& out) {
  ObservationTable t = load_table(dopt);
  ModelSpec spec = build_spec(family, topt);
  FitOptions opt;
  opt.seed = seed;
  FittedModel fm = fit(spec, t, opt);
  fs::create_directories(out);
  write_file(out / "fit.json", fm.to_json());
  print_fit(fm);
  if (!fm.converged) {
    std::cerr << "error: fit did not converge (gradient norm "
              << fm.grad_norm << ")\n";
    return 3;
  }
  return 0;
}

int cmd_select(const DataOpts& dopt, const std::string& family,
               const std::string& scope_str, double k, std::uint64_t seed,
               const fs::path& out) {
  ObservationTable t = load_table(dopt);
  FamilySpec fam = FamilySpec::from_name(family);
  CandidateScope scope = scope_str.empty() ? CandidateScope::defaults(t)
                                           : CandidateScope::parse(scope_str, t);
  FitOptions opt;
  opt.seed = seed;
  SelectionTrace tr = step_gaic_all(fam, t, scope, k, opt);
  fs::create_directories(out);
  write_file(out / "trace.log", tr.log());
  write_file(out / "fit.json", tr.final_fit.to_json());
  write_file(out / "trace.json", tr.to_json());

  std::printf("selected %s terms (k=%g):\n", std::string(fam.name()).c_str(),
              k);
  for (std::size_t p = 0; p < tr.final_spec.predictors.size(); ++p)
    std::printf("  %-6s ~ %s\n",
                std::string(fam.param_name(static_cast<int>(p))).c_str(),
                tr.final_spec.predictors[p].str().c_str());
  std::printf("df %zu  deviance %.3f  AIC %.3f  BIC %.3f\n", tr.final_fit.df,
              tr.final_fit.deviance(), tr.final_fit.aic(), tr.final_fit.bic());
  return tr.final_fit.converged ? 0 : 3;
}

int cmd_diagnose(const DataOpts& dopt, const TermOpts& topt,
                 const std::string& family, const std::string& fit_json,
                 const std::string& group, const std::string& mode_str,
                 bool plots, std::uint64_t seed, const fs::path& out) {
  ObservationTable t = load_table(dopt);
  FittedModel fm;
  if (!fit_json.empty()) {
    std::ifstream is(fit_json);
    if (!is) throw data_error("cannot read " + fit_json);
    nlohmann::json j;
    is >> j;
    fm = model_from_json(j, t);
  } else if (!family.empty()) {
    FitOptions opt;
    opt.seed = seed;
    fm = fit(build_spec(family, topt), t, opt);
  } else {
    throw std::invalid_argument("diagnose needs --fit fit.json or --family");
  }

  ResidualMode mode = mode_str == "midpoint" ? ResidualMode::midpoint
                                             : ResidualMode::randomized;
  ResidualSet rs = quantile_residuals(fm, t, seed, mode);
  fs::create_directories(out);
  write_file(out / "residuals.csv", residuals_csv(rs));

  auto pooled = worm_series(rs, t);
  write_file(out / "worm_all.csv", worm_csv(pooled[0]));
  std::vector<WormSeries> grouped;
  if (!group.empty()) {
    grouped = worm_series(rs, t, group);
    for (const auto& ws : grouped)
      write_file(out / ("worm_" + sanitize(ws.group) + ".csv"), worm_csv(ws));
  }

  auto effects = term_effects(fm);
  write_file(out / "terms.csv", terms_csv(effects));

  if (plots) {
    write_file(out / "qq.svg", qq_svg(pooled[0]));
    write_file(out / "worm_all.svg", worm_svg(pooled[0], "worm plot (all)"));
    for (const auto& ws : grouped)
      write_file(out / ("worm_" + sanitize(ws.group) + ".svg"),
                 worm_svg(ws, "worm plot (" + group + " = " + ws.group + ")"));
    write_file(out / "terms.svg", terms_svg(effects));
    write_file(out / "hist.svg", hist_svg(t, fm));
  }

  std::size_t degenerate = 0;
  for (const auto& r : rs.rows) degenerate += r.degenerate;
  std::printf("wrote %zu residuals (%zu degenerate) to %s\n", rs.rows.size(),
              degenerate, (out / "residuals.csv").string().c_str());
  return 0;
}

int cmd_compare(const DataOpts& dopt, const TermOpts& topt,
                const std::string& families_str, bool do_select,
                const std::string& scope_str, double k,
                const std::string& criterion, std::uint64_t seed,
                const fs::path& out) {
  ObservationTable t = load_table(dopt);
  std::vector<std::string> familes = split_csv(families_str);
  if (familes.empty()) throw std::invalid_argument("--families is empty");
  // validate before spawning any work
  for (const auto& f : familes) FamilySpec::from_name(f);
  if (do_select && !scope_str.empty())
    CandidateScope::parse(scope_str, t);  // fail fast on bad scope

  std::vector<std::future<FittedModel>> jobs;
  for (const auto& name : familes) {
    jobs.push_back(std::async(std::launch::async, [&, name]() {
      FitOptions opt;
      opt.seed = seed;
      if (do_select) {
        FamilySpec fam = FamilySpec::from_name(name);
        CandidateScope scope = scope_str.empty()
                                   ? CandidateScope::defaults(t)
                                   : CandidateScope::parse(scope_str, t);
        return step_gaic_all(fam, t, scope, k, opt).final_fit;
      }
      return fit(build_spec(name, topt), t, opt);
    }));
  }
  std::vector<FittedModel> fits;
  for (auto& j : jobs) fits.push_back(j.get());

  auto rows = compare_models(fits, criterion);
  fs::create_directories(out);
  write_file(out / "compare.csv", compare_csv(rows));

  std::printf("%-7s %-28s %4s %10s %10s %10s\n", "family", "terms", "df",
              "deviance", "AIC", "BIC");
  for (const auto& r : rows) {
    std::string terms;
    for (std::size_t p = 0; p < r.terms.size(); ++p) {
      if (p) terms += "; ";
      terms += r.terms[p];
    }
    std::size_t df = 0;
    for (const auto& fmv : fits)
      if (std::string(fmv.spec.family.name()) == r.family) df = fmv.df;
    std::printf("%-7s %-28s %4zu %10.3f %10.3f %10.3f\n", r.family.c_str(),
                terms.c_str(), df, r.deviance, r.aic, r.bic);
  }
  for (const auto& fmv : fits)
    if (!fmv.converged) {
      std::cerr << "error: " << fmv.spec.str() << " did not converge\n";
      return 3;
    }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-inflated count regression (PO, NB, ZIP, ZINB, ZIPIG, ZIBNB)"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  if (const char* env = std::getenv("ZICOUNT_SEED"))
    seed = std::strtoull(env, nullptr, 10);

  DataOpts dopt;
  TermOpts topt;
  std::string family, scope, criterion = "aic", group, mode = "randomized";
  std::string fit_json, families = "ZIP,ZINB,ZIPIG,ZIBNB";
  std::string out = ".";
  double k = 2.0;
  bool plots = false, do_select = false;

  auto add_data = [&](CLI::App* c) {
    c->add_option("--data", dopt.source,
                  "'trajan' or a CSV path (default trajan)");
    c->add_option("--response", dopt.response, "CSV response column");
    c->add_option("--factors", dopt.factors, "CSV factor columns, comma-separated");
    c->add_option("--seed", seed, "RNG seed (env ZICOUNT_SEED)");
    c->add_option("--out", out, "output directory (default .)");
  };
  auto add_terms = [&](CLI::App* c) {
    c->add_option("--mu", topt.mu, "mu terms, e.g. \"~0+photoperiod\"");
    c->add_option("--sigma", topt.sigma, "sigma terms");
    c->add_option("--nu", topt.nu, "nu terms");
    c->add_option("--tau", topt.tau, "tau terms");
    c->add_option("--mu-link", topt.mu_link, "override mu link");
    c->add_option("--sigma-link", topt.sigma_link, "override sigma link");
    c->add_option("--nu-link", topt.nu_link, "override nu link");
    c->add_option("--tau-link", topt.tau_link, "override tau link");
  };

  CLI::App* cfit = app.add_subcommand("fit", "maximum-likelihood fit");
  add_data(cfit);
  add_terms(cfit);
  cfit->add_option("--family", family, "PO, NB, ZIP, ZINB, ZIPIG or ZIBNB")
      ->required();

  CLI::App* csel = app.add_subcommand("select", "stepwise GAIC term selection");
  add_data(csel);
  csel->add_option("--family", family)->required();
  csel->add_option("--scope", scope, "candidate terms, comma-separated");
  csel->add_option("--k", k, "GAIC penalty (2 = AIC)");

  CLI::App* cdia = app.add_subcommand("diagnose", "quantile-residual diagnostics");
  add_data(cdia);
  add_terms(cdia);
  cdia->add_option("--family", family, "fit this spec before diagnosing");
  cdia->add_option("--fit", fit_json, "read an existing fit.json instead");
  cdia->add_option("--group", group, "factor for per-level worm plots");
  cdia->add_option("--mode", mode)
      ->check(CLI::IsMember({"randomized", "midpoint"}));
  cdia->add_flag("--plots", plots, "emit SVG plots");

  CLI::App* ccmp = app.add_subcommand("compare", "fit several families, tabulate");
  add_data(ccmp);
  add_terms(ccmp);
  ccmp->add_option("--families", families, "comma-separated family list");
  ccmp->add_flag("--select", do_select, "stepwise-select terms per family");
  ccmp->add_option("--scope", scope, "candidate terms for --select");
  ccmp->add_option("--k", k, "GAIC penalty for --select");
  ccmp->add_option("--criterion", criterion)
      ->check(CLI::IsMember({"aic", "bic"}));

  try {
    app.parse(argc, argv);
    if (cfit->parsed()) return cmd_fit(dopt, topt, family, seed, out);
    if (csel->parsed()) return cmd_select(dopt, family, scope, k, seed, out);
    if (cdia->parsed())
      return cmd_diagnose(dopt, topt, family, fit_json, group, mode, plots,
                          seed, out);
    return cmd_compare(dopt, topt, families, do_select, scope, k, criterion,
                       seed, out);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "run 'zicount --help' for usage\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
