#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace voltkey::test {

std::vector<double> moving_avg(const std::vector<double>& x, size_t w) {
  if (w == 0 || w > x.size()) throw std::invalid_argument("moving_avg: bad window");
  std::vector<double> s(x.size() - w + 1, 0.0);
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= w) acc -= x[i - w];
    if (i + 1 >= w) s[i + 1 - w] = acc / double(w);
  }
  return s;
}

double zero_cross_spp(const SignalTrace& t, double nominal_spp) {
  std::vector<double> raw(t.samples.begin(), t.samples.end());
  const size_t w1 = size_t(nominal_spp / 3.0), w2 = size_t(nominal_spp / 5.0),
               w3 = size_t(nominal_spp / 7.0), wb = size_t(nominal_spp);
  auto sm = moving_avg(moving_avg(moving_avg(raw, w1), w2), w3);
  auto base = moving_avg(raw, wb);
  // the cascade and the baseline have different group delays; align window
  // centers before subtracting
  const double c_sm = double(w1 + w2 + w3 - 3) / 2.0;
  const double c_b = double(wb - 1) / 2.0;
  std::vector<double> s(sm.size());
  for (size_t i = 0; i < sm.size(); ++i) {
    double bi = double(i) + c_sm - c_b;
    size_t k = size_t(std::clamp(bi, 0.0, double(base.size() - 1)));
    s[i] = sm[i] - base[k];
  }
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= double(s.size());
  std::vector<double> ups, downs;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    double frac = (mean - s[i]) / (s[i + 1] - s[i]);
    if (s[i] < mean && s[i + 1] >= mean) {
      double pos = double(i) + frac;
      if (ups.empty() || pos - ups.back() >= nominal_spp / 2.0) ups.push_back(pos);
    } else if (s[i] >= mean && s[i + 1] < mean) {
      double pos = double(i) + frac;
      if (downs.empty() || pos - downs.back() >= nominal_spp / 2.0) downs.push_back(pos);
    }
  }
  // midpoint of an up/down pair cancels residual baseline to first order
  std::vector<double> crossings;
  size_t d = 0;
  for (double up : ups) {
    while (d < downs.size() && downs[d] <= up) ++d;
    if (d == downs.size()) break;
    crossings.push_back((up + downs[d]) / 2.0);
  }
  if (crossings.size() < 2) return 0.0;
  std::vector<double> slopes;
  for (size_t i = 0; i < crossings.size(); ++i)
    for (size_t j = i + 1; j < crossings.size(); ++j)
      slopes.push_back((crossings[j] - crossings[i]) / double(j - i));
  std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
  return slopes[slopes.size() / 2];
}

static double naive_pearson(std::span<const uint16_t> a, const uint16_t* b, size_t n) {
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(n);
  mb /= double(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

size_t brute_force_sync(std::span<const uint16_t> preamble, const SignalTrace& trace,
                        size_t search_span) {
  const size_t n = preamble.size();
  if (n == 0 || trace.samples.size() < n) throw std::invalid_argument("brute_force_sync: short");
  size_t max_off = std::min(search_span, trace.samples.size() - n);
  size_t best = 0;
  double best_r = -2.0;
  for (size_t off = 0; off <= max_off; ++off) {
    double r = naive_pearson(preamble, trace.samples.data() + off, n);
    if (r > best_r + 1e-12) {
      best_r = r;
      best = off;
    }
  }
  return best;
}

double goertzel_power(std::span<const double> x, double sample_rate, double freq_hz) {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  const double coeff = 2.0 * std::cos(w);
  double s1 = 0.0, s2 = 0.0;
  for (double v : x) {
    double s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  return s1 * s1 + s2 * s2 - coeff * s1 * s2;
}

uint8_t exhaustive_nearest(const BlockCode& code, uint8_t word) {
  uint8_t best = code.codewords.at(0);
  int best_d = 64;
  for (uint8_t cw : code.codewords) {
    int d = std::popcount(unsigned(word ^ cw));
    if (d < best_d) {
      best_d = d;
      best = cw;
    }
  }
  return best;
}

std::vector<uint8_t> lfsr_bits(uint32_t taps, uint32_t state, int degree, size_t count) {
  std::vector<uint8_t> out;
  out.reserve(count);
  const uint32_t mask = (degree >= 32) ? 0xffffffffu : ((1u << degree) - 1u);
  state &= mask;
  if (state == 0) state = 1;
  for (size_t i = 0; i < count; ++i) {
    out.push_back(uint8_t(state & 1u));
    uint32_t fb = uint32_t(std::popcount(state & taps) & 1);
    state = (state >> 1) | (fb << (degree - 1));
  }
  return out;
}

}  // namespace voltkey::test
