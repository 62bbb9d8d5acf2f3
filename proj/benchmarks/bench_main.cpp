#include <benchmark/benchmark.h>

#include <cmath>

#include "quicfl/bitpack.hpp"
#include "quicfl/prf.hpp"
#include "quicfl/quicfl_codec.hpp"
#include "quicfl/solver.hpp"
#include "quicfl/table_store.hpp"
#include "quicfl/transform.hpp"

using namespace quicfl;

namespace {

std::vector<double> input(std::size_t d) {
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = std::exp(prf_uniform(1, i) * 2) - 3;
  return v;
}

const QuantTable& shipped(int b) {
  static std::vector<QuantTable> tables = [] {
    std::vector<QuantTable> out;
    for (int k = 1; k <= 4; ++k) out.push_back(load_default_table(k, default_ell(k)));
    return out;
  }();
  return tables[b - 1];
}

void BM_Fwht(benchmark::State& state) {
  auto v = input(state.range(0));
  for (auto _ : state) {
    fwht(v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fwht)->RangeMultiplier(16)->Range(1 << 10, 1 << 22);

void BM_Encode(benchmark::State& state) {
  const auto& t = shipped(static_cast<int>(state.range(1)));
  auto x = input(state.range(0));
  std::uint64_t c = 0;
  for (auto _ : state) {
    auto m = encode_quicfl(x, t, 1, ++c, c + 7);
    benchmark::DoNotOptimize(m.payload.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Encode)->ArgsProduct({{1 << 14, 1 << 20}, {1, 4}});

void BM_DecodeAggregate(benchmark::State& state) {
  const auto& t = shipped(2);
  auto x = input(state.range(0));
  std::vector<EncodedVector> msgs;
  for (int c = 0; c < state.range(1); ++c) msgs.push_back(encode_quicfl(x, t, 1, c, c + 100));
  for (auto _ : state) {
    auto y = decode_aggregate(msgs, t, 1);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_DecodeAggregate)->ArgsProduct({{1 << 14, 1 << 18}, {1, 16}});

void BM_SenderDistribution(benchmark::State& state) {
  const auto& t = shipped(static_cast<int>(state.range(0)));
  const double T = t.config().threshold;
  std::size_t i = 0;
  for (auto _ : state) {
    const double z = -T + 2 * T * prf_uniform(3, ++i);
    benchmark::DoNotOptimize(sender_distribution(z, t));
  }
}
BENCHMARK(BM_SenderDistribution)->DenseRange(1, 4);

void BM_SStep(benchmark::State& state) {
  const auto& t = shipped(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lp_value(t.r_values(), t.config()));
}
BENCHMARK(BM_SStep)->DenseRange(1, 4);

void BM_Bitpack(benchmark::State& state) {
  const int b = static_cast<int>(state.range(0));
  std::vector<std::uint32_t> msgs(1 << 20);
  for (std::size_t i = 0; i < msgs.size(); ++i) msgs[i] = prf(b, i) % (1u << b);
  for (auto _ : state) {
    auto bytes = bitpack(msgs, b);
    auto back = bitunpack(bytes, msgs.size(), b);
    benchmark::DoNotOptimize(back.data());
  }
  state.SetItemsProcessed(state.iterations() * msgs.size());
}
BENCHMARK(BM_Bitpack)->Arg(1)->Arg(3)->Arg(4)->Arg(8);

void BM_SolveTable(benchmark::State& state) {
  SolverOptions o;
  o.restarts = 4;
  auto cfg = QuantConfig::make(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 512);
  for (auto _ : state) benchmark::DoNotOptimize(solve_table(cfg, o).objective);
}
BENCHMARK(BM_SolveTable)->Args({1, 4})->Args({2, 3})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
