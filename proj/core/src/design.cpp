#include "zic/design.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace zic {

std::string Term::label() const {
  switch (kind) {
    case Kind::intercept: return "1";
    case Kind::factor: return a;
    case Kind::interaction: return a + ":" + b;
  }
  return "?";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void push_unique(std::vector<Term>& terms, Term t) {
  if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(std::move(t));
}

}  // namespace

TermList TermList::parse(std::string_view spec) {
  std::string_view s = trim(spec);
  if (!s.empty() && s.front() == '~') s.remove_prefix(1);
  s = trim(s);

  TermList out;
  bool dropped_intercept = false;

  std::vector<std::string_view> chunks;
  while (!s.empty()) {
    const auto plus = s.find('+');
    chunks.push_back(trim(s.substr(0, plus)));
    if (plus == std::string_view::npos) break;
    s.remove_prefix(plus + 1);
  }
  if (chunks.empty()) throw std::invalid_argument("empty term specification");

  for (const auto chunk : chunks) {
    if (chunk.empty()) throw std::invalid_argument("empty term in specification");
    if (chunk == "0") {
      dropped_intercept = true;
      continue;
    }
    if (chunk == "1") continue;
    if (const auto star = chunk.find('*'); star != std::string_view::npos) {
      const std::string fa{trim(chunk.substr(0, star))};
      const std::string fb{trim(chunk.substr(star + 1))};
      if (fa.empty() || fb.empty()) throw std::invalid_argument("malformed interaction term");
      push_unique(out.terms, Term::factor(fa));
      push_unique(out.terms, Term::factor(fb));
      push_unique(out.terms, Term::interaction(fa, fb));
      continue;
    }
    if (const auto colon = chunk.find(':'); colon != std::string_view::npos) {
      const std::string fa{trim(chunk.substr(0, colon))};
      const std::string fb{trim(chunk.substr(colon + 1))};
      if (fa.empty() || fb.empty()) throw std::invalid_argument("malformed interaction term");
      push_unique(out.terms, Term::interaction(fa, fb));
      continue;
    }
    push_unique(out.terms, Term::factor(std::string{chunk}));
  }

  out.coding = dropped_intercept ? Coding::cell_means : Coding::treatment;
  if (dropped_intercept && out.terms.empty())
    throw std::invalid_argument("cell-means specification needs at least one factor term");
  return out;
}

std::string TermList::str() const {
  std::string out = coding == Coding::cell_means ? "~0" : "";
  if (terms.empty()) return out.empty() ? "1" : out;
  for (const auto& t : terms) {
    if (!out.empty()) out += "+";
    out += t.label();
  }
  return out;
}

namespace {

const Factor& require_factor(const ObservationTable& data, const std::string& name) {
  const int idx = data.factor_index(name);
  if (idx < 0) throw data_error("unknown factor: " + name);
  return data.factors[idx];
}

void append_column(DesignMatrix& m, std::string label, const std::vector<double>& col) {
  m.labels.push_back(std::move(label));
  // columns arrive one at a time; rebuild row-major storage at the end
  m.values.insert(m.values.end(), col.begin(), col.end());
}

}  // namespace

DesignMatrix build_design(const ObservationTable& data, const TermList& terms) {
  const std::size_t n = data.n();
  DesignMatrix m;
  m.rows = n;

  // gather columns in column-major order first
  std::vector<double> col(n);
  const bool intercept = terms.has_intercept();
  bool spans_constant = intercept;

  if (intercept) {
    std::fill(col.begin(), col.end(), 1.0);
    append_column(m, "(Intercept)", col);
  }

  auto has_main = [&](const std::string& f) {
    return std::any_of(terms.terms.begin(), terms.terms.end(), [&](const Term& t) {
      return t.kind == Term::Kind::factor && t.a == f;
    });
  };

  for (const auto& term : terms.terms) {
    switch (term.kind) {
      case Term::Kind::intercept:
        break;  // implicit via coding
      case Term::Kind::factor: {
        const Factor& f = require_factor(data, term.a);
        const auto& codes = data.codes[data.factor_index(term.a)];
        const std::size_t first = spans_constant ? 1 : 0;
        for (std::size_t l = first; l < f.levels.size(); ++l) {
          for (std::size_t i = 0; i < n; ++i) col[i] = codes[i] == static_cast<int>(l) ? 1.0 : 0.0;
          append_column(m, f.short_label + f.levels[l], col);
        }
        spans_constant = true;
        break;
      }
      case Term::Kind::interaction: {
        const Factor& fa = require_factor(data, term.a);
        const Factor& fb = require_factor(data, term.b);
        const auto& ca = data.codes[data.factor_index(term.a)];
        const auto& cb = data.codes[data.factor_index(term.b)];
        const bool mains = has_main(term.a) && has_main(term.b);
        if (!mains && spans_constant)
          throw data_error("interaction " + term.label() + " requires both main effects");
        const std::size_t fa0 = mains ? 1 : 0;
        const std::size_t fb0 = mains ? 1 : 0;
        for (std::size_t la = fa0; la < fa.levels.size(); ++la) {
          for (std::size_t lb = fb0; lb < fb.levels.size(); ++lb) {
            for (std::size_t i = 0; i < n; ++i)
              col[i] = (ca[i] == static_cast<int>(la) && cb[i] == static_cast<int>(lb)) ? 1.0 : 0.0;
            append_column(m, fa.short_label + fa.levels[la] + ":" + fb.short_label + fb.levels[lb],
                          col);
          }
        }
        spans_constant = true;
        break;
      }
    }
  }

  if (m.labels.empty()) throw data_error("empty design matrix");

  // transpose the accumulated column-major buffer into row-major storage
  const std::size_t p = m.labels.size();
  std::vector<double> rowmajor(n * p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) rowmajor[i * p + j] = m.values[j * n + i];
  m.values = std::move(rowmajor);

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
      m.values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < static_cast<Eigen::Index>(p))
    throw data_error("rank-deficient design for terms: " + terms.str());

  return m;
}

std::vector<double> apply_link(const Link& link, const DesignMatrix& design,
                               std::span<const double> coefficients) {
  if (coefficients.size() != design.cols())
    throw std::invalid_argument("coefficient length does not match design columns");
  std::vector<double> out(design.rows);
  const std::size_t p = design.cols();
  for (std::size_t i = 0; i < design.rows; ++i) {
    double eta = 0.0;
    for (std::size_t j = 0; j < p; ++j) eta += design.values[i * p + j] * coefficients[j];
    out[i] = link.inverse(eta);
  }
  return out;
}

}  // namespace zic
