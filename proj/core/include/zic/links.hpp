#pragma once

#include <string_view>

namespace zic {

enum class LinkId { log, logit, identity };

// Monotone map between a distribution parameter and its linear predictor.
// inverse() lands in the parameter domain for every real predictor value.
struct Link {
  LinkId id = LinkId::identity;

  double forward(double x) const;
  double inverse(double eta) const;
  double inverse_derivative(double eta) const;

  std::string_view name() const;
  static Link from_name(std::string_view name);
};

}  // namespace zic
