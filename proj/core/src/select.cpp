#include "zic/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace zic {
namespace {

constexpr double kMinImprovement = 1e-6;

std::string trimmed(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string_view::npos) return {};
  return std::string(s.substr(b, e - b + 1));
}

void require_factor(const ObservationTable& t, const std::string& name) {
  if (t.factor_index(name) < 0)
    throw std::invalid_argument("unknown factor in scope: " + name);
}

bool contains(const TermList& tl, const Term& t) {
  return std::find(tl.terms.begin(), tl.terms.end(), t) != tl.terms.end();
}

// Interactions may be added only on top of both main effects, and a main
// effect may be dropped only once no retained interaction mentions it.
bool addable(const TermList& tl, const Term& t) {
  if (contains(tl, t)) return false;
  if (t.kind != Term::Kind::interaction) return true;
  return contains(tl, Term::factor(t.a)) && contains(tl, Term::factor(t.b));
}

bool droppable(const TermList& tl, const Term& t) {
  if (t.kind == Term::Kind::interaction) return true;
  for (const auto& other : tl.terms)
    if (other.kind == Term::Kind::interaction &&
        (other.a == t.a || other.b == t.a))
      return false;
  return true;
}

TermList with_term(const TermList& tl, const Term& t) {
  TermList out = tl;
  out.terms.push_back(t);
  return out;
}

TermList without_term(const TermList& tl, const Term& t) {
  TermList out = tl;
  out.terms.erase(std::remove(out.terms.begin(), out.terms.end(), t),
                  out.terms.end());
  return out;
}

struct FitCache {
  const ObservationTable& data;
  const FitOptions& opt;
  std::map<std::string, FittedModel> store;

  // Throws only if the optimizer cannot produce any finite optimum.
  const FittedModel& get(const ModelSpec& spec) {
    auto key = spec.str();
    auto it = store.find(key);
    if (it == store.end()) it = store.emplace(key, fit(spec, data, opt)).first;
    return it->second;
  }
};

}  // namespace

CandidateScope CandidateScope::defaults(const ObservationTable& t) {
  CandidateScope s;
  for (const auto& f : t.factors) s.terms.push_back(Term::factor(f.name));
  for (std::size_t i = 0; i < t.factors.size(); ++i)
    for (std::size_t j = i + 1; j < t.factors.size(); ++j)
      s.terms.push_back(
          Term::interaction(t.factors[i].name, t.factors[j].name));
  return s;
}

CandidateScope CandidateScope::parse(std::string_view s,
                                     const ObservationTable& t) {
  CandidateScope out;
  std::string token;
  std::istringstream is{std::string(s)};
  while (std::getline(is, token, ',')) {
    std::string lab = trimmed(token);
    if (lab.empty()) continue;
    auto colon = lab.find(':');
    Term term;
    if (colon == std::string::npos) {
      require_factor(t, lab);
      term = Term::factor(lab);
    } else {
      std::string a = trimmed(lab.substr(0, colon));
      std::string b = trimmed(lab.substr(colon + 1));
      require_factor(t, a);
      require_factor(t, b);
      term = Term::interaction(a, b);
    }
    if (std::find(out.terms.begin(), out.terms.end(), term) == out.terms.end())
      out.terms.push_back(term);
  }
  if (out.terms.empty()) throw std::invalid_argument("empty candidate scope");
  return out;
}

SelectionTrace step_gaic_all(FamilySpec family, const ObservationTable& data,
                             const CandidateScope& scope, double k,
                             const FitOptions& opt) {
  if (scope.terms.empty()) throw std::invalid_argument("empty candidate scope");
  if (!(k > 0.0)) throw std::invalid_argument("GAIC penalty must be positive");

  SelectionTrace trace;
  trace.k = k;

  int np = family.n_params();
  std::vector<TermList> current(np, TermList::intercept_only());
  FitCache cache{data, opt};

  auto make_spec = [&](const std::vector<TermList>& preds) {
    ModelSpec spec;
    spec.family = family;
    spec.predictors = preds;
    return spec;
  };

  // Canonical schedule; entries whose parameter the family lacks are skipped.
  struct Stage { int step; int param; StepDirection dir; };
  const Stage schedule[] = {
      {1, 0, StepDirection::forward},  {2, 1, StepDirection::forward},
      {3, 2, StepDirection::forward},  {4, 3, StepDirection::forward},
      {5, 2, StepDirection::backward}, {6, 1, StepDirection::backward},
      {7, 0, StepDirection::backward},
  };

  for (const Stage& st : schedule) {
    if (st.param >= np) continue;
    std::string pname(family.param_name(st.param));
    for (int round = 1;; ++round) {
      double base = cache.get(make_spec(current)).gaic(k);

      std::vector<Term> moves;
      for (const auto& t : scope.terms) {
        bool ok = st.dir == StepDirection::forward
                      ? addable(current[st.param], t)
                      : (contains(current[st.param], t) &&
                         droppable(current[st.param], t));
        if (ok) moves.push_back(t);
      }
      std::sort(moves.begin(), moves.end(),
                [](const Term& a, const Term& b) { return a.label() < b.label(); });

      int best = -1;
      double best_gaic = base - kMinImprovement;
      std::size_t first_rec = trace.records.size();
      for (const auto& t : moves) {
        auto preds = current;
        preds[st.param] = st.dir == StepDirection::forward
                              ? with_term(preds[st.param], t)
                              : without_term(preds[st.param], t);
        StepRecord rec;
        rec.step = st.step;
        rec.round = round;
        rec.parameter = pname;
        rec.direction = st.dir;
        rec.candidate = t.label();
        try {
          const FittedModel& fm = cache.get(make_spec(preds));
          rec.gaic = fm.gaic(k);
          rec.converged = fm.converged;
        } catch (const std::exception&) {
          rec.gaic = std::numeric_limits<double>::infinity();
          rec.converged = false;
        }
        if (rec.converged && rec.gaic < best_gaic) {
          best_gaic = rec.gaic;
          best = static_cast<int>(trace.records.size() - first_rec);
        }
        trace.records.push_back(std::move(rec));
      }
      if (best < 0) break;
      auto& winner = trace.records[first_rec + best];
      winner.accepted = true;
      Term t = moves[best];
      current[st.param] = st.dir == StepDirection::forward
                              ? with_term(current[st.param], t)
                              : without_term(current[st.param], t);
    }
  }

  trace.final_spec = make_spec(current);
  trace.final_fit = fit(trace.final_spec, data, opt);  // fresh, not cached
  return trace;
}

std::string SelectionTrace::log() const {
  std::ostringstream os;
  for (const auto& r : records) {
    os << "step " << r.step << " round " << r.round << " "
       << (r.direction == StepDirection::forward ? "forward" : "backward")
       << " " << r.parameter << " "
       << (r.direction == StepDirection::forward ? "+" : "-") << r.candidate
       << " gaic=";
    if (std::isfinite(r.gaic)) {
      os.precision(6);
      os << std::fixed << r.gaic;
      os.unsetf(std::ios::fixed);
    } else {
      os << "nan";
    }
    if (!r.converged) os << " [not converged]";
    os << (r.accepted ? " *accepted*" : "") << "\n";
  }
  os << "final " << final_spec.str() << " gaic=";
  os.precision(6);
  os << std::fixed << final_fit.gaic(k) << "\n";
  return os.str();
}

std::string SelectionTrace::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json rec;
    rec["step"] = r.step;
    rec["round"] = r.round;
    rec["parameter"] = r.parameter;
    rec["direction"] =
        r.direction == StepDirection::forward ? "forward" : "backward";
    rec["candidate"] = r.candidate;
    if (std::isfinite(r.gaic)) rec["gaic"] = r.gaic;
    rec["converged"] = r.converged;
    rec["accepted"] = r.accepted;
    steps.push_back(std::move(rec));
  }
  j["records"] = steps;
  j["final"] = nlohmann::json::parse(final_fit.to_json());
  return j.dump(2);
}

std::vector<ComparisonRow> compare_models(const std::vector<FittedModel>& fits,
                                          std::string_view criterion) {
  bool by_bic;
  if (criterion == "aic") by_bic = false;
  else if (criterion == "bic") by_bic = true;
  else throw std::invalid_argument("criterion must be aic or bic");

  for (std::size_t i = 1; i < fits.size(); ++i)
    if (fits[i].data_fingerprint != fits[0].data_fingerprint)
      throw std::invalid_argument("compare_models: fits use different data");

  std::vector<ComparisonRow> rows;
  for (const auto& fm : fits) {
    ComparisonRow r;
    r.family = std::string(fm.spec.family.name());
    r.deviance = fm.deviance();
    r.aic = fm.aic();
    r.bic = fm.bic();
    for (std::size_t k = 0; k < fm.spec.predictors.size(); ++k)
      r.terms.push_back(fm.spec.predictors[k].str());
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [by_bic](const ComparisonRow& a, const ComparisonRow& b) {
                     return (by_bic ? a.bic : a.aic) < (by_bic ? b.bic : b.aic);
                   });
  return rows;
}

}  // namespace zic
