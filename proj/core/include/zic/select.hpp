#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zic/data.hpp"
#include "zic/design.hpp"
#include "zic/fit.hpp"

namespace zic {

/// Pool of terms the stepwise search may add to any parameter's predictor.
struct CandidateScope {
  std::vector<Term> terms;

  /// Every factor in the table plus all pairwise interactions.
  static CandidateScope defaults(const ObservationTable& t);

  /// Comma-separated labels, e.g. "photoperiod,bap,photoperiod:bap".
  /// Unknown factor names are rejected before any fitting happens.
  static CandidateScope parse(std::string_view s, const ObservationTable& t);
};

enum class StepDirection { forward, backward };

/// One candidate evaluation inside the stepwise search.
struct StepRecord {
  int step = 0;             // position in the seven-step schedule
  int round = 0;            // greedy iteration within the step, from 1
  std::string parameter;    // "mu", "sigma", "nu", "tau"
  StepDirection direction = StepDirection::forward;
  std::string candidate;    // term label under consideration
  double gaic = 0.0;        // criterion for the candidate model
  bool converged = true;    // false marks a skipped (non-converged) candidate
  bool accepted = false;
};

struct SelectionTrace {
  double k = 2.0;
  std::vector<StepRecord> records;
  ModelSpec final_spec;
  FittedModel final_fit;

  std::string log() const;      // one line per record
  std::string to_json() const;  // structured mirror of the trace
};

/// Seven-step stepwise GAIC search: forward passes over mu, sigma, nu, tau,
/// then backward passes over nu, sigma, mu; parameters the family does not
/// have are skipped. Within a pass, the single change with the lowest GAIC
/// is applied while it improves the criterion by more than 1e-6; parameters
/// not yet visited stay intercept-only. Interactions obey marginality in
/// both directions. Each candidate evaluation is recorded; non-convergent
/// candidates are recorded and skipped, never fatal.
SelectionTrace step_gaic_all(FamilySpec family, const ObservationTable& data,
                             const CandidateScope& scope, double k,
                             const FitOptions& opt = {});

struct ComparisonRow {
  std::string family;
  double deviance = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::vector<std::string> terms;  // predictor string per parameter
};

/// Rows sorted ascending by the chosen criterion ("aic" or "bic"); ties keep
/// input order. All fits must share one dataset fingerprint.
std::vector<ComparisonRow> compare_models(const std::vector<FittedModel>& fits,
                                          std::string_view criterion = "aic");

}  // namespace zic
