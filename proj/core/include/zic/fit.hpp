#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "zic/data.hpp"
#include "zic/design.hpp"
#include "zic/families.hpp"
#include "zic/links.hpp"

namespace zic {

/// Model: one term list (and link) per distribution parameter, in the
/// family's parameter order.
struct ModelSpec {
  FamilySpec family;
  std::vector<TermList> predictors;
  std::vector<Link> links;  // resolved to family defaults when empty

  static ModelSpec intercepts(FamilySpec f);
  std::string str() const;
};

struct FitOptions {
  int n_starts = 5;
  int max_iter = 500;
  double tol = 1e-6;       // gradient-norm convergence target
  std::uint64_t seed = 1;  // perturbation stream for starts 1..n-1
};

struct CoefBlock {
  std::string param;  // "mu", "sigma", "nu", "tau"
  Link link;
  std::vector<std::string> labels;
  std::vector<double> beta;
};

struct FittedModel {
  ModelSpec spec;
  std::uint64_t data_fingerprint = 0;
  std::size_t n_obs = 0;
  std::vector<CoefBlock> coef;
  double nll = 0.0;
  std::size_t df = 0;
  bool converged = false;
  int iterations = 0;      // optimizer iterations of the winning start
  double grad_norm = 0.0;  // max |d nll / d theta_i| at the optimum
  int best_start = -1;
  bool vcov_available = false;
  std::vector<double> vcov;  // df x df row-major; empty when unavailable
  std::vector<std::string> boundary_flags;

  double deviance() const { return 2.0 * nll; }
  double aic() const { return deviance() + 2.0 * static_cast<double>(df); }
  double bic() const;
  double gaic(double k) const { return deviance() + k * static_cast<double>(df); }

  std::vector<double> theta() const;  // concatenated coefficient blocks

  /// n_obs x n_params matrix of fitted natural-scale parameters.
  std::vector<std::vector<double>> fitted_params(const ObservationTable& t) const;

  std::string to_json() const;
};

/// Negative log likelihood at coefficient vector theta (concatenated
/// blocks in parameter order).  Returns +inf instead of throwing when
/// the parameters leave the family domain or a predictor overflows.
double neg_log_likelihood(const ModelSpec& spec, const ObservationTable& t,
                          std::span<const double> theta);

FittedModel fit(const ModelSpec& spec, const ObservationTable& t,
                const FitOptions& opt = {});

struct Criteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// aic = deviance + 2 df, bic = deviance + df ln(n).
Criteria information_criteria(const FittedModel& fm, std::size_t n);

/// One response draw per row of t from the fitted model.
std::vector<long> simulate(const FittedModel& m, const ObservationTable& t,
                           std::mt19937_64& rng);

}  // namespace zic
