#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "troplace/asymptotics.hpp"
#include "troplace/errors.hpp"
#include "troplace/io.hpp"
#include "troplace/logmap.hpp"
#include "troplace/metric_graph.hpp"
#include "troplace/potential.hpp"
#include "troplace/tropical.hpp"

using namespace troplace;

namespace {

// Complete graph on n vertices, lengths 1..|E| cycled through a small range.
MetricGraph complete(int n) {
  MetricGraph mg;
  for (int v = 0; v < n; ++v) mg.graph.add_vertex("v" + std::to_string(v));
  int id = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      mg.graph.add_edge("e" + std::to_string(id), a, b);
      mg.length.push_back(1.0 + (id++ % 7) * 0.25);
    }
  return mg;
}

GraphMeasure dipole(const MetricGraph& mg) {
  GraphMeasure mu(mg.graph.n_edges());
  mu.add_atom(Point::at_vertex(0), 1.0);
  mu.add_atom(Point::at_vertex(mg.graph.n_vertices() - 1), -1.0);
  return mu;
}

void BM_FosterTrees(benchmark::State& st) {
  const auto mg = complete(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(foster_trees(mg, 64));
}
BENCHMARK(BM_FosterTrees)->DenseRange(3, 5);

void BM_FosterMatrix(benchmark::State& st) {
  const auto mg = complete(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(foster_matrix(mg));
}
BENCHMARK(BM_FosterMatrix)->DenseRange(3, 12, 3);

void BM_PoissonDouble(benchmark::State& st) {
  const auto mg = complete(static_cast<int>(st.range(0)));
  const auto mu = dipole(mg);
  for (auto _ : st) benchmark::DoNotOptimize(solve_poisson(mg, mu, Normalization::pinned(Point::at_vertex(0))));
}
BENCHMARK(BM_PoissonDouble)->DenseRange(4, 16, 4);

void BM_PoissonRational(benchmark::State& st) {
  const auto mg = convert_metric<Rational>(complete(static_cast<int>(st.range(0))));
  MeasureT<Rational> mu(mg.graph.n_edges());
  mu.add_atom(PointT<Rational>::at_vertex(0), Rational(1));
  mu.add_atom(PointT<Rational>::at_vertex(mg.graph.n_vertices() - 1), Rational(-1));
  for (auto _ : st)
    benchmark::DoNotOptimize(
        solve_poisson(mg, mu, NormalizationT<Rational>::pinned(PointT<Rational>::at_vertex(0))));
}
BENCHMARK(BM_PoissonRational)->DenseRange(4, 10, 3);

void BM_TropicalJ(benchmark::State& st) {
  const auto spec = preset(st.range(0) == 0 ? "kite" : "fig9");
  const auto tc = TropicalCurveT<Rational>::make(spec.graph, *spec.partition,
                                                 std::vector<Rational>(spec.length.begin(), spec.length.end()));
  const auto p = PointT<Rational>::at_vertex(0), q = PointT<Rational>::at_vertex(1);
  for (auto _ : st) benchmark::DoNotOptimize(tropical_j(tc, p, q, p));
}
BENCHMARK(BM_TropicalJ)->Arg(0)->Arg(1);

void BM_SweepPoisson(benchmark::State& st) {
  const auto spec = preset("kite");
  SweepConfig cfg;
  cfg.schedule = DegenerationSchedule::standard(spec.partition->rank());
  cfg.exact = st.range(0) != 0;
  cfg.parallel = false;
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep(spec.graph, *spec.partition, spec.length, cfg));
}
BENCHMARK(BM_SweepPoisson)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LogTrop(benchmark::State& st) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logu(-2, 10);
  std::vector<std::vector<double>> pts(256);
  for (auto& x : pts) {
    x.resize(static_cast<size_t>(st.range(0)));
    for (auto& c : x) c = std::exp(logu(rng));
    x[0] = 1e6;
  }
  size_t i = 0, overflow = 0;
  for (auto _ : st) {
    try {
      benchmark::DoNotOptimize(log_trop(pts[i++ % pts.size()]));
    } catch (const NumericalError&) {
      ++overflow;  // finitary part past double range
    }
  }
  st.counters["overflow"] = static_cast<double>(overflow);
}
BENCHMARK(BM_LogTrop)->DenseRange(2, 12, 2);

}  // namespace
BENCHMARK_MAIN();
