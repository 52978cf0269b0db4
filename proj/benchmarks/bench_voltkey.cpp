#include <benchmark/benchmark.h>

#include <vector>

#include <voltkey/alignment.hpp>
#include <voltkey/eval.hpp>
#include <voltkey/recon.hpp>
#include <voltkey/rng.hpp>
#include <voltkey/signal.hpp>

using namespace voltkey;

namespace {

SignalTrace bench_trace(size_t n_samples, uint64_t seed) {
  DomainNoiseConfig domain;
  domain.seed = seed;
  AdcConfig adc;
  adc.seed = mix_seed(seed, 2);
  double duration = double(n_samples) / adc.nominal_rate + 0.002;
  MasterSignal master = synth_master(domain, duration);
  return observe(master, adc, 0.0, n_samples);
}

void BM_synth_master(benchmark::State& state) {
  DomainNoiseConfig domain;
  domain.seed = 17;
  double duration = double(state.range(0)) / 1000.0;
  for (auto _ : state) {
    MasterSignal master = synth_master(domain, duration);
    benchmark::DoNotOptimize(master.samples.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(duration * 1e6));
}
BENCHMARK(BM_synth_master)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_estimate_spp(benchmark::State& state) {
  SignalTrace trace = bench_trace(size_t(24) * 1423 + 32, 99);
  int radius = int(state.range(0));
  for (auto _ : state) {
    SppEstimate est = estimate_spp(trace, trace.nominal_rate, radius);
    benchmark::DoNotOptimize(est.spp);
  }
}
BENCHMARK(BM_estimate_spp)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_sync_offset(benchmark::State& state) {
  SignalTrace trace = bench_trace(size_t(6) * 1423, 77);
  std::vector<uint16_t> preamble(trace.samples.begin() + 250, trace.samples.begin() + 250 + 1423);
  size_t span = size_t(state.range(0));
  for (auto _ : state) {
    SyncResult r = sync_offset(preamble, trace, span);
    benchmark::DoNotOptimize(r.offset_samples);
  }
}
BENCHMARK(BM_sync_offset)->Arg(400)->Arg(2846)->Unit(benchmark::kMillisecond);

void BM_resample(benchmark::State& state) {
  SignalTrace trace = bench_trace(size_t(24) * 1423, 55);
  for (auto _ : state) {
    SignalTrace out = resample(trace, 1423, 1419);
    benchmark::DoNotOptimize(out.samples.data());
  }
}
BENCHMARK(BM_resample)->Unit(benchmark::kMicrosecond);

void BM_reconcile(benchmark::State& state) {
  BlockCode code = build_code(int(state.range(0)), int(state.range(1)));
  Rng rng(404);
  BitSequence k_a, k_b;
  for (int i = 0; i < 2048; ++i) {
    uint8_t bit = uint8_t(rng.next_u64() & 1);
    k_a.bits.push_back(bit);
    // 4% channel flips, the regime reconciliation is built for
    k_b.bits.push_back(rng.uniform() < 0.04 ? uint8_t(bit ^ 1) : bit);
  }
  HelperData helper = helper_data(code, k_a);
  for (auto _ : state) {
    BitSequence out = reconcile(code, k_b, helper);
    benchmark::DoNotOptimize(out.bits.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * 2048);
}
BENCHMARK(BM_reconcile)->Args({3, 1})->Args({7, 4})->Unit(benchmark::kMicrosecond);

void BM_berlekamp_massey(benchmark::State& state) {
  std::vector<uint8_t> bits = crypto_reference_stream(31, size_t(state.range(0)));
  for (auto _ : state) {
    int lc = nist::berlekamp_massey(bits);
    benchmark::DoNotOptimize(lc);
  }
}
BENCHMARK(BM_berlekamp_massey)->Arg(500)->Arg(2000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
