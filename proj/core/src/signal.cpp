#include "voltkey/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "voltkey/rng.hpp"

namespace voltkey {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// seed stream ids, one per independent noise process
enum : uint64_t {
  kPhaseStream = 1,
  kBackgroundStream = 2,
  kImpulseStream = 3,
  kLoadStream = 4,
  kWidebandStream = 5,
  kLoadAmStream = 6,
};

// One oscillator advanced by rotation; the recurrence is resynced from the
// closed form every 64k samples so rounding drift stays bounded.
struct ToneState {
  double s, c, cw, sw, amp, w, phase0;

  ToneState(double rate, double freq, double a, double ph)
      : s(std::sin(ph)), c(std::cos(ph)), cw(std::cos(kTau * freq / rate)),
        sw(std::sin(kTau * freq / rate)), amp(a), w(kTau * freq / rate), phase0(ph) {}

  void resync(size_t i) {
    double ph = phase0 + w * double(i);
    s = std::sin(ph);
    c = std::cos(ph);
  }

  double step() {
    double v = amp * s;
    double ns = s * cw + c * sw;
    c = c * cw - s * sw;
    s = ns;
    return v;
  }
};

// Gauss-Markov noise held on a coarse grid and linearly interpolated on read.
// The grid stays >= 20x the bandwidth so the interpolation error is tiny, and
// the coarse generation keeps synthesis cheap at MHz master rates.
struct NoiseGrid {
  std::vector<double> grid;
  size_t decim = 1;

  NoiseGrid(size_t n, double rate, double rms, double bandwidth, Rng& rng) {
    if (rms == 0.0) return;
    while (rate / double(decim * 2) >= 20.0 * bandwidth && decim < (1u << 20)) decim *= 2;
    double grid_rate = rate / double(decim);
    double a = std::exp(-kTau * bandwidth / grid_rate);
    double innov = rms * std::sqrt(1.0 - a * a);
    size_t gn = n / decim + 2;
    grid.resize(gn);
    double x = rms * rng.gaussian();
    for (size_t i = 0; i < gn; ++i) {
      grid[i] = x;
      x = a * x + innov * rng.gaussian();
    }
  }

  double at(size_t i) const {
    if (grid.empty()) return 0.0;
    size_t i0 = i / decim;
    double frac = double(i - i0 * decim) / double(decim);
    return grid[i0] + frac * (grid[i0 + 1] - grid[i0]);
  }
};

void add_impulses(std::vector<double>& out, double rate, const DomainNoiseConfig& cfg, Rng& rng) {
  if (cfg.impulse_rate == 0.0) return;
  const double mean_gap = 1.0 / cfg.impulse_rate;
  const double dur = double(out.size()) / rate;
  const double tail = 8.0 * cfg.impulse_decay;
  const double step = std::exp(-1.0 / (rate * cfg.impulse_decay));
  double t = rng.exponential(mean_gap);
  while (t < dur) {
    double amp = rng.uniform(cfg.impulse_amp_min, cfg.impulse_amp_max);
    if (rng.uniform() < 0.5) amp = -amp;
    auto i0 = size_t(std::ceil(t * rate));
    auto i1 = std::min(out.size(), size_t(std::ceil((t + tail) * rate)));
    double v = amp * std::exp(-(double(i0) / rate - t) / cfg.impulse_decay);
    for (size_t i = i0; i < i1; ++i) {
      out[i] += v;
      v *= step;
    }
    t += rng.exponential(mean_gap);
  }
}

constexpr double kLoadAmDepth = 0.2;
constexpr double kLoadAmBandwidthHz = 1.6;

// Persistent appliance load: odd harmonics whose weights and phases derive
// from the comb rng (appliance identity), slowly amplitude-modulated by a
// trajectory drawn from the separate am rng (the moment in time).
std::vector<ToneState> make_load_comb(double rate, const DomainNoiseConfig& cfg, Rng& comb_rng) {
  std::vector<ToneState> tones;
  if (cfg.continuous_load_noise_rms == 0.0) return tones;
  static constexpr int kHarmonics[] = {3, 5, 7, 9, 11, 13, 15, 17, 19};
  size_t nh = std::size(kHarmonics);
  std::vector<double> weight(nh), phase(nh);
  double power = 0.0;
  for (size_t h = 0; h < nh; ++h) {
    weight[h] = (0.5 + comb_rng.uniform()) / double(kHarmonics[h]);
    phase[h] = kTau * comb_rng.uniform();
    power += weight[h] * weight[h] * 0.5;
  }
  double scale = cfg.continuous_load_noise_rms /
                 std::sqrt(power * (1.0 + kLoadAmDepth * kLoadAmDepth));
  tones.reserve(nh);
  for (size_t h = 0; h < nh; ++h)
    tones.emplace_back(rate, cfg.fundamental_hz * kHarmonics[h], scale * weight[h], phase[h]);
  return tones;
}

void validate(const DomainNoiseConfig& cfg, double duration) {
  if (duration <= 0.0) throw std::invalid_argument("synth_master: duration must be > 0");
  if (cfg.master_rate <= 0.0) throw std::invalid_argument("synth_master: master_rate must be > 0");
  if (cfg.fundamental_hz <= 0.0) throw std::invalid_argument("synth_master: fundamental_hz must be > 0");
  if (cfg.residual_fundamental_amp < 0.0 || cfg.background_noise_rms < 0.0 ||
      cfg.continuous_load_noise_rms < 0.0 || cfg.impulse_rate < 0.0)
    throw std::invalid_argument("synth_master: amplitudes and rates must be >= 0");
  if (cfg.background_noise_rms > 0.0 && cfg.background_bandwidth_hz <= 0.0)
    throw std::invalid_argument("synth_master: background_bandwidth_hz must be > 0");
  if (cfg.wideband_noise_rms < 0.0 ||
      (cfg.wideband_noise_rms > 0.0 && cfg.wideband_bandwidth_hz <= 0.0))
    throw std::invalid_argument("synth_master: bad wideband noise parameters");
  if (cfg.impulse_rate > 0.0 &&
      (cfg.impulse_decay <= 0.0 || cfg.impulse_amp_min < 0.0 ||
       cfg.impulse_amp_max < cfg.impulse_amp_min))
    throw std::invalid_argument("synth_master: bad impulse parameters");
  for (auto& [h, amp] : cfg.harmonic_amps)
    if (h < 1 || amp < 0.0) throw std::invalid_argument("synth_master: bad harmonic entry");
}

}  // namespace

MasterSignal synth_master(const DomainNoiseConfig& cfg, double duration) {
  validate(cfg, duration);
  auto n = size_t(std::llround(duration * cfg.master_rate));
  if (n == 0) throw std::invalid_argument("synth_master: window shorter than one sample");

  MasterSignal master;
  master.rate = cfg.master_rate;
  master.duration = duration;
  master.samples.resize(n);

  const double rate = cfg.master_rate;
  std::vector<ToneState> mains;
  Rng phase_rng(mix_seed(cfg.seed, kPhaseStream));
  double ph0 = kTau * phase_rng.uniform();
  if (cfg.residual_fundamental_amp > 0.0)
    mains.emplace_back(rate, cfg.fundamental_hz, cfg.residual_fundamental_amp, ph0);
  for (auto& [h, amp] : cfg.harmonic_amps) {
    double ph = kTau * phase_rng.uniform();
    if (amp > 0.0) mains.emplace_back(rate, cfg.fundamental_hz * h, amp, ph);
  }

  Rng bg_rng(mix_seed(cfg.seed, kBackgroundStream));
  NoiseGrid bg(n, rate, cfg.background_noise_rms, cfg.background_bandwidth_hz, bg_rng);
  Rng wide_rng(mix_seed(cfg.seed, kWidebandStream));
  NoiseGrid wide(n, rate, cfg.wideband_noise_rms, cfg.wideband_bandwidth_hz, wide_rng);

  uint64_t load_base = cfg.load_seed ? cfg.load_seed : mix_seed(cfg.seed, kLoadStream);
  uint64_t am_base = cfg.load_window_seed ? cfg.load_window_seed : load_base;
  Rng comb_rng(mix_seed(load_base, kLoadStream));
  Rng am_rng(mix_seed(am_base, kLoadAmStream));
  std::vector<ToneState> load = make_load_comb(rate, cfg, comb_rng);
  NoiseGrid am(n, rate, load.empty() ? 0.0 : 1.0, kLoadAmBandwidthHz, am_rng);

  for (size_t i = 0; i < n; ++i) {
    if ((i & 0xffff) == 0) {
      for (auto& t : mains) t.resync(i);
      for (auto& t : load) t.resync(i);
    }
    double v = bg.at(i) + wide.at(i);
    for (auto& t : mains) v += t.step();
    double lv = 0.0;
    for (auto& t : load) lv += t.step();
    master.samples[i] = v + lv * (1.0 + kLoadAmDepth * am.at(i));
  }

  Rng imp_rng(mix_seed(cfg.seed, kImpulseStream));
  add_impulses(master.samples, rate, cfg, imp_rng);

  return master;
}

MasterSignal apply_breaker_filter(const MasterSignal& in, double cutoff_hz) {
  if (cutoff_hz <= 0.0 || cutoff_hz >= in.rate / 2.0)
    throw std::invalid_argument("apply_breaker_filter: cutoff must be in (0, rate/2)");
  if (in.samples.empty()) throw std::invalid_argument("apply_breaker_filter: empty signal");
  MasterSignal out;
  out.rate = in.rate;
  out.duration = in.duration;
  out.samples.resize(in.samples.size());
  double alpha = 1.0 - std::exp(-kTau * cutoff_hz / in.rate);
  double y = in.samples[0];
  for (size_t i = 0; i < in.samples.size(); ++i) {
    y += alpha * (in.samples[i] - y);
    out.samples[i] = y;
  }
  return out;
}

SignalTrace observe(const MasterSignal& master, const AdcConfig& adc,
                    double start_offset, size_t n_samples) {
  if (master.samples.size() < 2) throw std::invalid_argument("observe: master too short");
  if (n_samples == 0) throw std::invalid_argument("observe: n_samples must be > 0");
  if (adc.nominal_rate <= 0.0) throw std::invalid_argument("observe: nominal_rate must be > 0");
  if (master.rate < 10.0 * adc.nominal_rate)
    throw std::invalid_argument("observe: master rate must be >= 10x device rate");
  if (adc.resolution_bits < 8 || adc.resolution_bits > 16)
    throw std::invalid_argument("observe: resolution_bits must be in [8, 16]");
  if (adc.full_scale <= 0.0) throw std::invalid_argument("observe: full_scale must be > 0");
  if (adc.gain_levels.empty()) throw std::invalid_argument("observe: no gain levels");
  if (adc.local_noise_rms < 0.0) throw std::invalid_argument("observe: local_noise_rms must be >= 0");
  if (start_offset < 0.0) throw std::invalid_argument("observe: start_offset must be >= 0");

  const double actual_rate = adc.nominal_rate * (1.0 + adc.skew_ppm / 1e6);
  const double last_t = start_offset + double(n_samples - 1) / actual_rate;
  if (last_t * master.rate > double(master.samples.size() - 1))
    throw std::invalid_argument("observe: capture window exceeds master signal");

  Rng rng(adc.seed);
  std::vector<double> analog(n_samples);
  for (size_t j = 0; j < n_samples; ++j) {
    double pos = (start_offset + double(j) / actual_rate) * master.rate;
    auto i0 = size_t(pos);
    double frac = pos - double(i0);
    double v = i0 + 1 < master.samples.size()
                   ? master.samples[i0] + frac * (master.samples[i0 + 1] - master.samples[i0])
                   : master.samples.back();
    analog[j] = v + adc.local_noise_rms * rng.gaussian();
  }

  auto [lo, hi] = std::minmax_element(analog.begin(), analog.end());
  double span = *hi - *lo;
  auto gains = adc.gain_levels;
  std::sort(gains.begin(), gains.end());
  double gain = gains.back();
  for (double g : gains) {
    if (g * span >= 0.6 * adc.full_scale) {
      gain = g;
      break;
    }
  }

  SignalTrace trace;
  trace.nominal_rate = adc.nominal_rate;
  trace.actual_rate = actual_rate;
  trace.start_offset = start_offset;
  trace.gain_used = gain;
  trace.resolution_bits = adc.resolution_bits;
  trace.samples.resize(n_samples);
  const double max_code = double((1 << adc.resolution_bits) - 1);
  for (size_t j = 0; j < n_samples; ++j) {
    double code = std::round((gain * analog[j] + adc.full_scale / 2.0) / adc.full_scale * max_code);
    trace.samples[j] = uint16_t(std::clamp(code, 0.0, max_code));
  }
  return trace;
}

}  // namespace voltkey
