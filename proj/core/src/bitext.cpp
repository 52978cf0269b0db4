#include "voltkey/bitext.hpp"

#include <cmath>
#include <stdexcept>

namespace voltkey {

std::vector<std::vector<double>> slice_periods(const SignalTrace& trace, size_t spp,
                                               size_t count, size_t start) {
  if (spp == 0 || count == 0) throw std::invalid_argument("slice_periods: empty slicing");
  if (start + spp * count > trace.samples.size())
    throw std::invalid_argument("slice_periods: trace too short");
  std::vector<std::vector<double>> rows(count);
  for (size_t p = 0; p < count; ++p) {
    rows[p].resize(spp);
    const uint16_t* src = trace.samples.data() + start + p * spp;
    for (size_t i = 0; i < spp; ++i) rows[p][i] = double(src[i]);
  }
  return rows;
}

std::vector<NoisePeriod> noise_periods(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 3) throw std::invalid_argument("noise_periods: need at least 3 periods");
  const size_t spp = rows[0].size();
  for (auto& r : rows)
    if (r.size() != spp) throw std::invalid_argument("noise_periods: ragged period lengths");
  std::vector<NoisePeriod> out(rows.size() - 2);
  for (size_t p = 1; p + 1 < rows.size(); ++p) {
    NoisePeriod& np = out[p - 1];
    np.period_index = int(p);
    np.values.resize(spp);
    for (size_t i = 0; i < spp; ++i) np.values[i] = rows[p][i] - rows[p + 1][i];
  }
  return out;
}

std::vector<uint16_t> select_indices(const NoisePeriod& period, int n_b) {
  if (n_b < 1) throw std::invalid_argument("select_indices: n_b must be >= 1");
  const size_t bin = period.values.size() / size_t(n_b);
  if (bin == 0) throw std::invalid_argument("select_indices: more bins than samples");
  std::vector<uint16_t> idx(size_t(n_b), 0);
  for (size_t b = 0; b < size_t(n_b); ++b) {
    size_t best = b * bin;
    double best_mag = std::abs(period.values[best]);
    for (size_t i = b * bin + 1; i < (b + 1) * bin; ++i) {
      double mag = std::abs(period.values[i]);
      if (mag > best_mag) {
        best = i;
        best_mag = mag;
      }
    }
    idx[b] = uint16_t(best);
  }
  return idx;
}

std::vector<uint8_t> extract_bits(const NoisePeriod& period, std::span<const uint16_t> indices) {
  if (period.values.empty()) throw std::invalid_argument("extract_bits: empty period");
  double mean = 0.0;
  for (double v : period.values) mean += v;
  mean /= double(period.values.size());
  std::vector<uint8_t> bits(indices.size());
  for (size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= period.values.size())
      throw std::invalid_argument("extract_bits: index out of range");
    bits[b] = period.values[indices[b]] > mean ? 1 : 0;
  }
  return bits;
}

std::pair<BitSequence, IndexSchedule> generate_sequence(
    const std::vector<std::vector<double>>& rows, int n_p, int n_b, int key_len,
    ExtractRole role, const IndexSchedule* peer_schedule) {
  if (n_p < 1 || n_b < 1 || key_len < 1)
    throw std::invalid_argument("generate_sequence: sizes must be >= 1");
  if (size_t(n_p) * size_t(n_b) < size_t(key_len))
    throw std::invalid_argument("generate_sequence: n_p * n_b < key_len");
  if (rows.size() < size_t(n_p) + 2)
    throw std::invalid_argument("generate_sequence: need n_p + 2 sliced periods");
  if (role == ExtractRole::follower) {
    if (!peer_schedule) throw std::invalid_argument("generate_sequence: follower needs a schedule");
    if (peer_schedule->n_p != size_t(n_p) || peer_schedule->n_b != size_t(n_b))
      throw std::invalid_argument("generate_sequence: schedule shape mismatch");
  }

  auto nps = noise_periods(rows);
  IndexSchedule schedule;
  schedule.n_p = size_t(n_p);
  schedule.n_b = size_t(n_b);
  schedule.entries.reserve(schedule.n_p * schedule.n_b);

  BitSequence seq;
  seq.bits.reserve(size_t(key_len));
  seq.provenance.reserve(size_t(key_len));
  for (int p = 0; p < n_p; ++p) {
    std::vector<uint16_t> idx;
    if (role == ExtractRole::indexer) {
      idx = select_indices(nps[size_t(p)], n_b);
    } else {
      idx.assign(peer_schedule->entries.begin() + size_t(p) * size_t(n_b),
                 peer_schedule->entries.begin() + size_t(p + 1) * size_t(n_b));
    }
    schedule.entries.insert(schedule.entries.end(), idx.begin(), idx.end());
    auto bits = extract_bits(nps[size_t(p)], idx);
    for (size_t b = 0; b < bits.size() && seq.bits.size() < size_t(key_len); ++b) {
      seq.bits.push_back(bits[b]);
      seq.provenance.emplace_back(uint16_t(nps[size_t(p)].period_index), idx[b]);
    }
  }
  return {std::move(seq), std::move(schedule)};
}

}  // namespace voltkey
