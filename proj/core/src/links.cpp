#include "zic/links.hpp"

#include <cmath>
#include <stdexcept>

namespace zic {

double Link::forward(double x) const {
  switch (id) {
    case LinkId::log:
      if (!(x > 0.0)) throw std::domain_error("log link: x must be > 0");
      return std::log(x);
    case LinkId::logit:
      if (!(x > 0.0) || !(x < 1.0)) throw std::domain_error("logit link: x must be in (0,1)");
      return std::log(x / (1.0 - x));
    case LinkId::identity:
      return x;
  }
  throw std::logic_error("unreachable");
}

double Link::inverse(double eta) const {
  switch (id) {
    case LinkId::log:
      return std::exp(eta);
    case LinkId::logit:
      // 1/(1+e^-eta), evaluated from the side that cannot overflow
      return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                        : std::exp(eta) / (1.0 + std::exp(eta));
    case LinkId::identity:
      return eta;
  }
  throw std::logic_error("unreachable");
}

double Link::inverse_derivative(double eta) const {
  switch (id) {
    case LinkId::log:
      return std::exp(eta);
    case LinkId::logit: {
      const double p = inverse(eta);
      return p * (1.0 - p);
    }
    case LinkId::identity:
      return 1.0;
  }
  throw std::logic_error("unreachable");
}

std::string_view Link::name() const {
  switch (id) {
    case LinkId::log: return "log";
    case LinkId::logit: return "logit";
    case LinkId::identity: return "identity";
  }
  return "?";
}

Link Link::from_name(std::string_view name) {
  if (name == "log") return Link{LinkId::log};
  if (name == "logit") return Link{LinkId::logit};
  if (name == "identity") return Link{LinkId::identity};
  throw std::invalid_argument("unknown link: " + std::string(name));
}

}  // namespace zic
