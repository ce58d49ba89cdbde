#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include <json.hpp>

#include "zic/data.hpp"
#include "zic/fit.hpp"

using namespace zic;

namespace {

ObservationTable tens_of_three() {
  ObservationTable t;
  t.response.assign(10, 3);
  t.factors = {Factor{"g", "g", {"a"}}};
  t.codes = {std::vector<int>(10, 0)};
  return t;
}

ModelSpec zinb_cellmeans() {
  ModelSpec spec;
  spec.family = FamilySpec::from_name("ZINB");
  spec.predictors = {TermList::parse("~0+photoperiod"),
                     TermList::parse("~0+photoperiod"),
                     TermList::parse("~0+photoperiod")};
  return spec;
}

}  // namespace

TEST_CASE("model spec helpers") {
  ModelSpec m = ModelSpec::intercepts(FamilySpec::from_name("ZINB"));
  REQUIRE(m.predictors.size() == 3);
  for (const auto& tl : m.predictors) CHECK(tl == TermList::intercept_only());
  CHECK(m.str() == "ZINB(mu ~ 1, sigma ~ 1, nu ~ 1)");
}

TEST_CASE("neg_log_likelihood closed form and sentinels") {
  ObservationTable t = tens_of_three();
  ModelSpec spec = ModelSpec::intercepts(FamilySpec::from_name("PO"));

  double want = 10.0 * (3.0 - 3.0 * std::log(3.0) + std::log(6.0));
  std::vector<double> theta = {std::log(3.0)};
  CHECK(neg_log_likelihood(spec, t, theta) ==
        doctest::Approx(want).epsilon(1e-12));

  // linear predictor overflow -> +inf sentinel, not an exception
  std::vector<double> huge = {900.0};
  CHECK(neg_log_likelihood(spec, t, huge) ==
        std::numeric_limits<double>::infinity());

  // identity-linked inflation outside [0,1] -> +inf sentinel
  ModelSpec zip = ModelSpec::intercepts(FamilySpec::from_name("ZIP"));
  zip.links = {Link::from_name("log"), Link::from_name("identity")};
  std::vector<double> inside = {std::log(3.0), 0.25};
  std::vector<double> outside = {std::log(3.0), 1.5};
  CHECK(std::isfinite(neg_log_likelihood(zip, t, inside)));
  CHECK(neg_log_likelihood(zip, t, outside) ==
        std::numeric_limits<double>::infinity());

  std::vector<double> wrong_len = {0.0, 0.0};
  CHECK_THROWS_AS(neg_log_likelihood(spec, t, wrong_len),
                  std::invalid_argument);
}

TEST_CASE("poisson intercept fit recovers the sample mean") {
  ObservationTable t = tens_of_three();
  ModelSpec spec = ModelSpec::intercepts(FamilySpec::from_name("PO"));
  FittedModel fm = fit(spec, t);
  CHECK(fm.converged);
  CHECK(fm.df == 1);
  CHECK(fm.n_obs == 10);
  REQUIRE(fm.coef.size() == 1);
  CHECK(fm.coef[0].beta[0] == doctest::Approx(std::log(3.0)).epsilon(1e-7));
  CHECK(fm.nll == doctest::Approx(10.0 * (3.0 - 3.0 * std::log(3.0) +
                                          std::log(6.0))).epsilon(1e-10));
  // observed information for the log-mean of a Poisson is n*mu
  REQUIRE(fm.vcov_available);
  CHECK(std::sqrt(fm.vcov[0]) == doctest::Approx(1.0 / std::sqrt(30.0)).epsilon(1e-3));
}

TEST_CASE("fit is stationary at the reported optimum") {
  ObservationTable t = trajan();
  ModelSpec spec = zinb_cellmeans();
  FittedModel fm = fit(spec, t);
  CHECK(fm.converged);
  auto theta = fm.theta();
  double base = neg_log_likelihood(spec, t, theta);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (double d : {-1e-4, 1e-4}) {
      auto probe = theta;
      probe[i] += d;
      CHECK(neg_log_likelihood(spec, t, probe) >= base - 1e-6);
    }
  }
}

TEST_CASE("adding terms never worsens the optimal deviance") {
  ObservationTable t = trajan();
  FamilySpec zip = FamilySpec::from_name("ZIP");

  ModelSpec m0 = ModelSpec::intercepts(zip);
  ModelSpec m1 = m0;
  m1.predictors[0] = TermList::parse("photoperiod");
  ModelSpec m2 = m1;
  m2.predictors[1] = TermList::parse("photoperiod");

  double d0 = fit(m0, t).deviance();
  double d1 = fit(m1, t).deviance();
  double d2 = fit(m2, t).deviance();
  CHECK(d1 <= d0 + 1e-6);
  CHECK(d2 <= d1 + 1e-6);
}

TEST_CASE("cell-means and treatment codings agree") {
  ObservationTable t = trajan();
  ModelSpec cm = zinb_cellmeans();

  ModelSpec tr = cm;
  for (auto& tl : tr.predictors) tl = TermList::parse("photoperiod");

  FitOptions tight;
  tight.tol = 1e-9;
  FittedModel a = fit(cm, t, tight);
  FittedModel b = fit(tr, t, tight);
  CHECK(std::abs(a.deviance() - b.deviance()) <= 1e-6);

  auto pa = a.fitted_params(t);
  auto pb = b.fitted_params(t);
  for (std::size_t i = 0; i < t.n(); ++i)
    for (std::size_t k = 0; k < pa[i].size(); ++k)
      CHECK(std::abs(pa[i][k] - pb[i][k]) <= 1e-6);
}

TEST_CASE("fitted parameters are constant within a photoperiod group") {
  ObservationTable t = trajan();
  FittedModel fm = fit(zinb_cellmeans(), t);
  auto params = fm.fitted_params(t);
  for (std::size_t i = 1; i < t.n(); ++i) {
    if (t.codes[0][i] != t.codes[0][0]) continue;
    for (std::size_t k = 0; k < 3; ++k) CHECK(params[i][k] == params[0][k]);
  }
}

TEST_CASE("information criteria identities") {
  FittedModel fm;
  fm.nll = 1233.623 / 2.0;
  fm.df = 6;
  fm.n_obs = 270;
  CHECK(fm.deviance() == doctest::Approx(1233.623));
  CHECK(fm.aic() == doctest::Approx(1245.623));
  CHECK(fm.bic() ==
        doctest::Approx(1233.623 + 6.0 * std::log(270.0)).epsilon(1e-15));
  CHECK(fm.gaic(2.0) == doctest::Approx(fm.aic()).epsilon(1e-15));
  CHECK(fm.gaic(3.5) == doctest::Approx(1233.623 + 3.5 * 6.0));

  Criteria c = information_criteria(fm, 270);
  CHECK(c.aic == doctest::Approx(fm.aic()).epsilon(1e-15));
  CHECK(c.bic == doctest::Approx(fm.bic()).epsilon(1e-15));

  FittedModel zero;
  Criteria z = information_criteria(zero, 270);
  CHECK(z.aic == 0.0);
  CHECK(z.bic == 0.0);
}

TEST_CASE("fit result serializes with coefficients keyed by parameter") {
  ObservationTable t = trajan();
  FittedModel fm = fit(zinb_cellmeans(), t);
  auto j = nlohmann::json::parse(fm.to_json());
  CHECK(j["family"] == "ZINB");
  CHECK(j["df"] == 6);
  CHECK(j["n_obs"] == 270);
  REQUIRE(j.contains("coefficients"));
  for (const char* p : {"mu", "sigma", "nu"}) {
    REQUIRE(j["coefficients"].contains(p));
    CHECK(j["coefficients"][p].contains("photo8"));
    CHECK(j["coefficients"][p].contains("photo16"));
  }
  CHECK(j["links"]["nu"] == "logit");
  CHECK(j["convergence"].contains("converged"));
  CHECK(j["convergence"].contains("iterations"));
  CHECK(j["convergence"].contains("gradient_norm"));
  double dev = j["deviance"];
  CHECK(dev == doctest::Approx(fm.deviance()).epsilon(1e-12));
}

TEST_CASE("simulate draws one value per row, reproducibly") {
  ObservationTable t = trajan();
  FittedModel fm = fit(zinb_cellmeans(), t);
  std::mt19937_64 r1(5), r2(5);
  auto s1 = simulate(fm, t, r1);
  auto s2 = simulate(fm, t, r2);
  CHECK(s1.size() == t.n());
  CHECK(s1 == s2);
  for (long y : s1) CHECK(y >= 0);
}

TEST_CASE("multi-start fit tolerates a hostile seed") {
  // All starts still converge to the same optimum from noisy inits.
  ObservationTable t = trajan();
  ModelSpec spec = zinb_cellmeans();
  FitOptions a;
  a.seed = 1;
  FitOptions b;
  b.seed = 987654321;
  double da = fit(spec, t, a).deviance();
  double db = fit(spec, t, b).deviance();
  CHECK(da == doctest::Approx(db).epsilon(1e-7));
}
