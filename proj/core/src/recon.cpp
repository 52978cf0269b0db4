#include "voltkey/recon.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace voltkey {

namespace {

uint8_t encode_word(const BlockCode& code, uint8_t data) {
  uint8_t word = 0;
  for (int i = 0; i < code.k; ++i)
    if (data & (1u << (code.k - 1 - i))) word ^= code.generator[size_t(i)];
  return word;
}

uint8_t pack_block(const BitSequence& seq, size_t start, int n) {
  uint8_t word = 0;
  for (int i = 0; i < n; ++i) word = uint8_t((word << 1) | (seq.bits[start + size_t(i)] & 1));
  return word;
}

}  // namespace

BlockCode build_code(int n, int k) {
  BlockCode code;
  code.n = n;
  code.k = k;
  if (n == 3 && k == 1) {
    code.generator = {0b111};
  } else if (n == 7 && k == 4) {
    // systematic Hamming: data bits then parities d0^d1^d3, d0^d2^d3, d1^d2^d3
    code.generator = {0b1000110, 0b0100101, 0b0010011, 0b0001111};
  } else {
    throw std::invalid_argument("build_code: unsupported code size");
  }
  code.codewords.resize(size_t(1) << k);
  for (size_t d = 0; d < code.codewords.size(); ++d)
    code.codewords[d] = encode_word(code, uint8_t(d));

  code.decode_table.resize(size_t(1) << n);
  for (size_t w = 0; w < code.decode_table.size(); ++w) {
    int best_dist = n + 1;
    uint8_t best = 0;
    for (uint8_t c : code.codewords) {
      int dist = std::popcount(unsigned(uint8_t(w) ^ c));
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    code.decode_table[w] = best;
  }
  return code;
}

uint8_t nearest_codeword(const BlockCode& code, uint8_t word) {
  if (word >= code.decode_table.size())
    throw std::invalid_argument("nearest_codeword: word wider than the code");
  return code.decode_table[word];
}

HelperData helper_data(const BlockCode& code, const BitSequence& k_a) {
  if (k_a.bits.size() < size_t(code.n))
    throw std::invalid_argument("helper_data: sequence shorter than one block");
  HelperData helper;
  helper.n = code.n;
  size_t blocks = k_a.bits.size() / size_t(code.n);
  helper.blocks.reserve(blocks);
  for (size_t b = 0; b < blocks; ++b) {
    uint8_t word = pack_block(k_a, b * size_t(code.n), code.n);
    helper.blocks.push_back(uint8_t(word ^ nearest_codeword(code, word)));
  }
  return helper;
}

BitSequence reconcile(const BlockCode& code, const BitSequence& k_b, const HelperData& helper) {
  if (helper.n != code.n) throw std::invalid_argument("reconcile: helper built for another code");
  if (k_b.bits.size() / size_t(code.n) < helper.blocks.size())
    throw std::invalid_argument("reconcile: sequence shorter than helper data");
  BitSequence out;
  out.bits.reserve(helper.blocks.size() * size_t(code.n));
  for (size_t b = 0; b < helper.blocks.size(); ++b) {
    uint8_t word = pack_block(k_b, b * size_t(code.n), code.n);
    uint8_t shifted = uint8_t(word ^ helper.blocks[b]);
    uint8_t fixed = uint8_t(nearest_codeword(code, shifted) ^ helper.blocks[b]);
    for (int i = 0; i < code.n; ++i)
      out.bits.push_back(uint8_t((fixed >> (code.n - 1 - i)) & 1));
  }
  size_t keep = std::min(out.bits.size(), k_b.provenance.size());
  out.provenance.assign(k_b.provenance.begin(), k_b.provenance.begin() + keep);
  return out;
}

EntropyAccounting entropy_accounting(double a_max, int target_entropy_bits,
                                     const BlockCode& code, int n_b) {
  if (a_max <= 0.0 || a_max >= 1.0)
    throw std::invalid_argument("entropy_accounting: a_max must be in (0, 1)");
  if (target_entropy_bits < 1 || n_b < 1)
    throw std::invalid_argument("entropy_accounting: targets must be >= 1");

  EntropyAccounting acc;
  // truncate, not round: 0.118 bits/bit budgets as 0.11
  acc.entropy_per_bit = std::floor((1.0 - a_max) * 100.0 + 1e-9) / 100.0;
  if (acc.entropy_per_bit <= 0.0)
    throw std::invalid_argument("entropy_accounting: adversary agreement leaves no entropy");
  acc.inflated_target_bits = target_entropy_bits * code.n / code.k;
  acc.raw_bits_required = int(std::ceil(double(acc.inflated_target_bits) / acc.entropy_per_bit - 1e-9));
  acc.measurement_seconds = double(acc.raw_bits_required) / (60.0 * double(n_b));
  return acc;
}

}  // namespace voltkey
