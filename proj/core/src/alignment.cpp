#include "voltkey/alignment.hpp"

#include <cmath>
#include <stdexcept>

namespace voltkey {

namespace {

// correlation of two equal-length views given precomputed raw sums
double corr_from_sums(double sx, double sxx, double sy, double syy, double sxy, double n) {
  double vx = sxx - sx * sx / n;
  double vy = syy - sy * sy / n;
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return (sxy - sx * sy / n) / std::sqrt(vx * vy);
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.empty()) throw std::invalid_argument("pearson: empty input");
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return corr_from_sums(sx, sxx, sy, syy, sxy, double(x.size()));
}

SppEstimate estimate_spp(const SignalTrace& trace, double nominal_rate, int sweep_radius,
                         double mains_hz, int avg_periods) {
  if (nominal_rate <= 0.0 || mains_hz <= 0.0)
    throw std::invalid_argument("estimate_spp: rates must be > 0");
  if (sweep_radius < 0) throw std::invalid_argument("estimate_spp: sweep_radius must be >= 0");
  if (avg_periods < 1) throw std::invalid_argument("estimate_spp: avg_periods must be >= 1");

  int center = int(std::llround(nominal_rate / mains_hz));
  int c_min = center - sweep_radius;
  int c_max = center + sweep_radius;
  if (c_min < 2) throw std::invalid_argument("estimate_spp: sweep reaches below 2 samples/period");
  if (trace.samples.size() < size_t(avg_periods + 1) * size_t(c_max))
    throw std::invalid_argument("estimate_spp: trace too short for sweep");

  SppEstimate best;
  best.sweep.reserve(size_t(2 * sweep_radius + 1));
  std::vector<double> preamble, mean;
  for (int c = c_min; c <= c_max; ++c) {
    preamble.assign(trace.samples.begin(), trace.samples.begin() + c);
    mean.assign(size_t(c), 0.0);
    for (int p = 1; p <= avg_periods; ++p) {
      const uint16_t* chunk = trace.samples.data() + size_t(p) * size_t(c);
      for (int i = 0; i < c; ++i) mean[size_t(i)] += chunk[i];
    }
    for (double& m : mean) m /= avg_periods;
    double r = pearson(preamble, mean);
    best.sweep.emplace_back(c, r);
    if (best.spp == 0 || r > best.correlation + 1e-12) {
      best.spp = c;
      best.correlation = r;
    }
  }
  return best;
}

SignalTrace resample(const SignalTrace& trace, int from_spp, int to_spp) {
  if (from_spp <= 0 || to_spp <= 0)
    throw std::invalid_argument("resample: rates must be > 0");
  if (trace.samples.empty()) throw std::invalid_argument("resample: empty trace");
  if (from_spp == to_spp) return trace;

  SignalTrace out = trace;
  auto n_out = size_t(trace.samples.size() * size_t(to_spp) / size_t(from_spp));
  out.samples.resize(n_out);
  const size_t last = trace.samples.size() - 1;
  const double max_code = double((1 << trace.resolution_bits) - 1);
  for (size_t j = 0; j < n_out; ++j) {
    double pos = double(j) * double(from_spp) / double(to_spp);
    auto i0 = size_t(pos);
    if (i0 >= last) {
      out.samples[j] = trace.samples[last];
      continue;
    }
    double frac = pos - double(i0);
    double v = double(trace.samples[i0]) +
               frac * (double(trace.samples[i0 + 1]) - double(trace.samples[i0]));
    v = std::round(v);
    out.samples[j] = uint16_t(std::clamp(v, 0.0, max_code));
  }
  return out;
}

int negotiate_rate(int spp_a, int spp_b) {
  if (spp_a <= 0 || spp_b <= 0) throw std::invalid_argument("negotiate_rate: rates must be > 0");
  return spp_a < spp_b ? spp_a : spp_b;
}

SyncResult sync_offset(std::span<const uint16_t> preamble, const SignalTrace& trace,
                       size_t search_span) {
  if (preamble.empty()) throw std::invalid_argument("sync_offset: empty preamble");
  if (trace.samples.size() < preamble.size())
    throw std::invalid_argument("sync_offset: trace shorter than preamble");

  const size_t n = preamble.size();
  const size_t d_max = std::min(search_span, trace.samples.size() - n);

  double sy = 0, syy = 0;
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = double(preamble[i]);
    sy += y[i];
    syy += y[i] * y[i];
  }

  // prefix sums over the trace so window mean/variance are O(1) per offset
  const size_t m = trace.samples.size();
  std::vector<double> ps(m + 1, 0.0), pss(m + 1, 0.0);
  for (size_t i = 0; i < m; ++i) {
    double v = double(trace.samples[i]);
    ps[i + 1] = ps[i] + v;
    pss[i + 1] = pss[i] + v * v;
  }

  SyncResult best{0, -2.0};
  for (size_t d = 0; d <= d_max; ++d) {
    double sx = ps[d + n] - ps[d];
    double sxx = pss[d + n] - pss[d];
    double sxy = 0;
    const uint16_t* w = trace.samples.data() + d;
    for (size_t i = 0; i < n; ++i) sxy += double(w[i]) * y[i];
    double r = corr_from_sums(sx, sxx, sy, syy, sxy, double(n));
    if (best.correlation < -1.5 || r > best.correlation + 1e-12) {
      best.offset_samples = d;
      best.correlation = r;
    }
  }
  return best;
}

}  // namespace voltkey
