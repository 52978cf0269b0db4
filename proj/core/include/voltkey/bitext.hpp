#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voltkey/signal.hpp"

namespace voltkey {

// Sample-wise difference between two consecutive mains periods. Subtraction
// cancels the periodic content and keeps the aperiodic noise both devices
// share.
struct NoisePeriod {
  std::vector<double> values;
  int period_index = 0;
};

// Per-period bin maxima chosen by the indexing side; entries are period-major.
struct IndexSchedule {
  size_t n_p = 0;
  size_t n_b = 0;
  std::vector<uint16_t> entries;

  uint16_t at(size_t p, size_t b) const { return entries[p * n_b + b]; }
};

struct BitSequence {
  std::vector<uint8_t> bits;
  // (period index, sample index) each bit came from
  std::vector<std::pair<uint16_t, uint16_t>> provenance;

  size_t size() const { return bits.size(); }
};

enum class ExtractRole { indexer, follower };

// Cuts `count` consecutive periods of `spp` samples out of a trace, starting
// at `start`; row p covers samples [start + p*spp, start + (p+1)*spp).
std::vector<std::vector<double>> slice_periods(const SignalTrace& trace, size_t spp,
                                               size_t count, size_t start = 0);

// rows[0] is the sync anchor period; output entry p (1-based period_index)
// is rows[p] - rows[p+1], so rows.size() - 2 noise periods come back.
std::vector<NoisePeriod> noise_periods(const std::vector<std::vector<double>>& rows);

// Splits the period into n_b equal bins (remainder samples dropped) and
// returns the index of the largest-magnitude sample per bin, ties low.
std::vector<uint16_t> select_indices(const NoisePeriod& period, int n_b);

// One bit per index: 1 when the sample exceeds the period mean.
std::vector<uint8_t> extract_bits(const NoisePeriod& period, std::span<const uint16_t> indices);

// Full extraction pipeline over sliced periods. The indexer picks indices
// itself; a follower reads the peer's schedule. Returns key_len bits (stops
// mid-period once enough) plus the complete n_p x n_b schedule.
std::pair<BitSequence, IndexSchedule> generate_sequence(
    const std::vector<std::vector<double>>& rows, int n_p, int n_b, int key_len,
    ExtractRole role, const IndexSchedule* peer_schedule = nullptr);

}  // namespace voltkey
