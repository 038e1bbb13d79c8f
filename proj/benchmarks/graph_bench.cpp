#include <benchmark/benchmark.h>

#include <random>

#include "unseg/affinity.hpp"
#include "unseg/kmeans.hpp"
#include "unseg/spectral.hpp"

namespace {

// n points around `k` well separated centres in `dim` dimensions.
Eigen::MatrixXd clustered_points(int n, int k, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd centres(k, dim);
  for (int i = 0; i < centres.size(); ++i) centres.data()[i] = 8.0 * g(rng);
  Eigen::MatrixXd pts(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) pts(i, d) = centres(i % k, d) + g(rng);
  }
  return pts;
}

void BM_KnnAffinity(benchmark::State& state) {
  const auto pts = clustered_points(static_cast<int>(state.range(0)), 20, 64, 1);
  for (auto _ : state) benchmark::DoNotOptimize(unseg::build_knn_affinity(pts, 30));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnAffinity)->RangeMultiplier(2)->Range(512, 4096)->Unit(benchmark::kMillisecond);

void BM_SpectralDense(benchmark::State& state) {
  const auto graph =
      unseg::build_knn_affinity(clustered_points(static_cast<int>(state.range(0)), 20, 32, 2), 30);
  for (auto _ : state) benchmark::DoNotOptimize(unseg::spectral_embed(graph, 20));
}
BENCHMARK(BM_SpectralDense)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_SpectralLanczos(benchmark::State& state) {
  const auto graph =
      unseg::build_knn_affinity(clustered_points(static_cast<int>(state.range(0)), 20, 32, 3), 30);
  unseg::SpectralOptions opt;
  opt.dense_limit = 0;
  for (auto _ : state) benchmark::DoNotOptimize(unseg::spectral_embed(graph, 20, opt));
}
BENCHMARK(BM_SpectralLanczos)->Arg(1024)->Arg(4096)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  const auto pts = unseg::normalize_rows(clustered_points(static_cast<int>(state.range(0)), 20, 20, 4));
  unseg::KMeansOptions opt;
  opt.n_clusters = 20;
  for (auto _ : state) benchmark::DoNotOptimize(unseg::kmeans(pts, opt));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
