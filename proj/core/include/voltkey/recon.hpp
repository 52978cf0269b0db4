#pragma once

#include <cstdint>
#include <vector>

#include "voltkey/bitext.hpp"

namespace voltkey {

// Small binary block code with a precomputed nearest-codeword table. Words
// are n-bit values with the first bit in the most significant position.
struct BlockCode {
  int n = 0;
  int k = 0;
  std::vector<uint8_t> generator;     // k rows, each an n-bit word
  std::vector<uint8_t> codewords;     // 2^k entries
  std::vector<uint8_t> decode_table;  // 2^n entries -> nearest codeword
};

// Supported codes: repetition (3,1) and Hamming (7,4).
BlockCode build_code(int n, int k);

uint8_t nearest_codeword(const BlockCode& code, uint8_t word);

// Per-block offsets K_A xor nearest(K_A); public, reveals no key bits beyond
// the code redundancy. A trailing partial block is dropped.
struct HelperData {
  int n = 0;
  std::vector<uint8_t> blocks;
};

HelperData helper_data(const BlockCode& code, const BitSequence& k_a);

// B's side: nearest(K_B xor R) xor R per block recovers A's bits whenever
// the block disagreement is within the code's correction radius.
BitSequence reconcile(const BlockCode& code, const BitSequence& k_b, const HelperData& helper);

// Raw-measurement budget for a target amount of key entropy, given the worst
// observed adversary agreement rate a_max.
struct EntropyAccounting {
  double entropy_per_bit = 0.0;   // 1 - a_max, truncated to 2 decimals
  int inflated_target_bits = 0;   // target scaled by the code rate n/k
  int raw_bits_required = 0;
  double measurement_seconds = 0.0;
};

EntropyAccounting entropy_accounting(double a_max, int target_entropy_bits,
                                     const BlockCode& code, int n_b);

}  // namespace voltkey
