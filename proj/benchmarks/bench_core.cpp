#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "zic/data.hpp"
#include "zic/diagnostics.hpp"
#include "zic/families.hpp"
#include "zic/fit.hpp"

using namespace zic;

namespace {

ModelSpec zinb_photo() {
  ModelSpec spec;
  spec.family = FamilySpec::from_name("ZINB");
  for (int k = 0; k < 3; ++k)
    spec.predictors.push_back(TermList::parse("~0+photoperiod"));
  return spec;
}

void BM_log_pmf(benchmark::State& state, const char* name,
                std::vector<double> params) {
  FamilySpec f = FamilySpec::from_name(name);
  long y = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_pmf(f, params, y));
    y = (y + 1) % 40;
  }
}

void BM_cdf_truncation(benchmark::State& state) {
  FamilySpec f = FamilySpec::from_name("ZIBNB");
  std::vector<double> params = {7.0, 0.5, 0.3, 0.2};
  for (auto _ : state) {
    long cap = truncation_point(f, params);
    benchmark::DoNotOptimize(cdf(f, params, cap));
  }
}

void BM_nll(benchmark::State& state) {
  ObservationTable t = trajan();
  ModelSpec spec = zinb_photo();
  std::vector<double> theta = {1.97, 1.70, -3.12, -1.83, -4.38, -0.14};
  for (auto _ : state)
    benchmark::DoNotOptimize(neg_log_likelihood(spec, t, theta));
}

void BM_fit_zinb(benchmark::State& state) {
  ObservationTable t = trajan();
  ModelSpec spec = zinb_photo();
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, t));
}

void BM_residuals(benchmark::State& state) {
  ObservationTable t = trajan();
  FittedModel fm = fit(zinb_photo(), t);
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(quantile_residuals(fm, t, seed++));
}

}  // namespace

BENCHMARK_CAPTURE(BM_log_pmf, po, "PO", {4.0});
BENCHMARK_CAPTURE(BM_log_pmf, zinb, "ZINB", {4.0, 0.5, 0.2});
BENCHMARK_CAPTURE(BM_log_pmf, zipig, "ZIPIG", {4.0, 0.5, 0.2});
BENCHMARK_CAPTURE(BM_log_pmf, zibnb, "ZIBNB", {4.0, 0.5, 0.3, 0.2});
BENCHMARK(BM_cdf_truncation);
BENCHMARK(BM_nll);
BENCHMARK(BM_fit_zinb)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residuals)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
