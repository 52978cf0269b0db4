#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <stdexcept>

#include "voltkey/eval.hpp"

namespace voltkey::nist {

namespace {

double igamc(double a, double x) { return boost::math::gamma_q(a, x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// rank of a 32x32 GF(2) matrix given as 32 row words
int gf2_rank32(uint32_t rows[32]) {
  int rank = 0;
  for (int col = 31; col >= 0 && rank < 32; --col) {
    uint32_t mask = 1u << col;
    int pivot = -1;
    for (int r = rank; r < 32; ++r) {
      if (rows[r] & mask) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < 32; ++r)
      if (r != rank && (rows[r] & mask)) rows[r] ^= rows[rank];
    ++rank;
  }
  return rank;
}

// P(rank == 32 - deficiency) for a random 32x32 binary matrix
double rank_probability(int deficiency) {
  const int M = 32, Q = 32;
  int r = M - deficiency;
  double log2p = double(r) * double(Q + M - r) - double(M) * double(Q);
  double p = std::exp2(log2p);
  for (int i = 0; i < r; ++i) {
    p *= (1.0 - std::exp2(double(i - Q))) * (1.0 - std::exp2(double(i - M))) /
         (1.0 - std::exp2(double(i - r)));
  }
  return p;
}

}  // namespace

double frequency(std::span<const uint8_t> bits) {
  if (bits.empty()) throw std::invalid_argument("frequency: empty sequence");
  long long s = 0;
  for (uint8_t b : bits) s += b ? 1 : -1;
  double s_obs = std::abs(double(s)) / std::sqrt(double(bits.size()));
  return std::erfc(s_obs / std::sqrt(2.0));
}

double block_frequency(std::span<const uint8_t> bits, int block_len) {
  size_t blocks = bits.size() / size_t(block_len);
  if (blocks == 0) throw std::invalid_argument("block_frequency: sequence shorter than a block");
  double chi2 = 0.0;
  for (size_t j = 0; j < blocks; ++j) {
    long long ones = 0;
    for (int i = 0; i < block_len; ++i) ones += bits[j * size_t(block_len) + size_t(i)] & 1;
    double pi = double(ones) / double(block_len);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * double(block_len);
  return igamc(double(blocks) / 2.0, chi2 / 2.0);
}

double cumulative_sums_forward(std::span<const uint8_t> bits) {
  long long s = 0, z = 0;
  for (uint8_t b : bits) {
    s += b ? 1 : -1;
    z = std::max(z, std::llabs(s));
  }
  if (z == 0) return 0.0;
  double n = double(bits.size());
  double sqn = std::sqrt(n);
  double zz = double(z);
  auto lfloor = [](double v) { return (long long)std::floor(v); };
  double sum1 = 0.0;
  for (long long k = lfloor((-n / zz + 1.0) / 4.0); k <= lfloor((n / zz - 1.0) / 4.0); ++k) {
    sum1 += std_normal_cdf((4.0 * double(k) + 1.0) * zz / sqn) -
            std_normal_cdf((4.0 * double(k) - 1.0) * zz / sqn);
  }
  double sum2 = 0.0;
  for (long long k = lfloor((-n / zz - 3.0) / 4.0); k <= lfloor((n / zz - 1.0) / 4.0); ++k) {
    sum2 += std_normal_cdf((4.0 * double(k) + 3.0) * zz / sqn) -
            std_normal_cdf((4.0 * double(k) + 1.0) * zz / sqn);
  }
  return 1.0 - sum1 + sum2;
}

double rank(std::span<const uint8_t> bits) {
  const size_t bits_per_matrix = 32 * 32;
  size_t n_mat = bits.size() / bits_per_matrix;
  if (n_mat < 38)
    throw std::invalid_argument("rank: need at least 38 matrices of 1024 bits");
  double p32 = rank_probability(0);
  double p31 = rank_probability(1);
  double prest = 1.0 - p32 - p31;
  size_t f32 = 0, f31 = 0;
  for (size_t m = 0; m < n_mat; ++m) {
    uint32_t rows[32] = {};
    const uint8_t* src = bits.data() + m * bits_per_matrix;
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c)
        if (src[r * 32 + c] & 1) rows[r] |= 1u << (31 - c);
    int rk = gf2_rank32(rows);
    if (rk == 32)
      ++f32;
    else if (rk == 31)
      ++f31;
  }
  double n = double(n_mat);
  double frest = n - double(f32) - double(f31);
  double chi2 = (double(f32) - p32 * n) * (double(f32) - p32 * n) / (p32 * n) +
                (double(f31) - p31 * n) * (double(f31) - p31 * n) / (p31 * n) +
                (frest - prest * n) * (frest - prest * n) / (prest * n);
  return igamc(1.0, chi2 / 2.0);
}

double non_overlapping_template(std::span<const uint8_t> bits) {
  // template B = 000000001, m = 9, N = 8 blocks
  constexpr int m = 9;
  constexpr size_t N = 8;
  const size_t M = bits.size() / N;
  if (M < 2 * size_t(m)) throw std::invalid_argument("non_overlapping_template: blocks too short");
  const double mu = double(M - m + 1) / 512.0;
  const double sigma2 = double(M) * (1.0 / 512.0 - double(2 * m - 1) / (512.0 * 512.0));
  double chi2 = 0.0;
  for (size_t j = 0; j < N; ++j) {
    const uint8_t* block = bits.data() + j * M;
    size_t w = 0;
    size_t i = 0;
    while (i + m <= M) {
      bool match = (block[i + 8] & 1) == 1;
      for (int t = 0; match && t < 8; ++t)
        if (block[i + size_t(t)] & 1) match = false;
      if (match) {
        ++w;
        i += m;
      } else {
        ++i;
      }
    }
    chi2 += (double(w) - mu) * (double(w) - mu) / sigma2;
  }
  return igamc(double(N) / 2.0, chi2 / 2.0);
}

int berlekamp_massey(std::span<const uint8_t> bits) {
  const int n = int(bits.size());
  std::vector<uint8_t> c(size_t(n) + 1, 0), b(size_t(n) + 1, 0), t;
  c[0] = b[0] = 1;
  int L = 0, m = -1;
  for (int i = 0; i < n; ++i) {
    int d = bits[size_t(i)] & 1;
    for (int j = 1; j <= L; ++j) d ^= c[size_t(j)] & bits[size_t(i - j)];
    if (d == 0) continue;
    t = c;
    int shift = i - m;
    for (int j = 0; j + shift <= n; ++j) c[size_t(j + shift)] ^= b[size_t(j)];
    if (2 * L <= i) {
      L = i + 1 - L;
      m = i;
      b = t;
    }
  }
  return L;
}

double linear_complexity(std::span<const uint8_t> bits, int block_len) {
  size_t N = bits.size() / size_t(block_len);
  if (N < 20) throw std::invalid_argument("linear_complexity: too few blocks");
  const double M = double(block_len);
  const int sign = block_len % 2 == 0 ? 1 : -1;
  const double mu = M / 2.0 + (9.0 + double(-sign)) / 36.0 - (M / 3.0 + 2.0 / 9.0) / std::exp2(M);
  static const double pi_table[7] = {0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833};
  size_t nu[7] = {};
  for (size_t j = 0; j < N; ++j) {
    int L = berlekamp_massey(bits.subspan(j * size_t(block_len), size_t(block_len)));
    double t = double(sign) * (double(L) - mu) + 2.0 / 9.0;
    int bin;
    if (t <= -2.5)
      bin = 0;
    else if (t <= -1.5)
      bin = 1;
    else if (t <= -0.5)
      bin = 2;
    else if (t <= 0.5)
      bin = 3;
    else if (t <= 1.5)
      bin = 4;
    else if (t <= 2.5)
      bin = 5;
    else
      bin = 6;
    ++nu[bin];
  }
  double chi2 = 0.0;
  for (int i = 0; i < 7; ++i) {
    double expect = double(N) * pi_table[i];
    chi2 += (double(nu[i]) - expect) * (double(nu[i]) - expect) / expect;
  }
  return igamc(3.0, chi2 / 2.0);
}

}  // namespace voltkey::nist

namespace voltkey {

std::vector<std::pair<std::string, double>> randomness_suite(std::span<const uint8_t> bits) {
  if (bits.size() < 100000)
    throw std::invalid_argument("randomness_suite: need at least 100,000 bits");
  return {
      {"frequency", nist::frequency(bits)},
      {"block_frequency", nist::block_frequency(bits)},
      {"cumulative_sums", nist::cumulative_sums_forward(bits)},
      {"rank", nist::rank(bits)},
      {"non_overlapping_template", nist::non_overlapping_template(bits)},
      {"linear_complexity", nist::linear_complexity(bits)},
  };
}

}  // namespace voltkey
