#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voltkey/signal.hpp"

namespace voltkey {

// Outcome of the samples-per-period sweep: winning candidate, its Pearson
// score, and the whole sweep for diagnostics.
struct SppEstimate {
  int spp = 0;
  double correlation = 0.0;
  std::vector<std::pair<int, double>> sweep;
};

struct SyncResult {
  size_t offset_samples = 0;
  double correlation = 0.0;
};

// Pearson correlation coefficient; 0 when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Estimates how many samples one mains period spans in the trace. Candidates
// nominal/mains +/- sweep_radius are scored by correlating the first period
// against the mean of the next avg_periods periods sliced at that length;
// ties within 1e-12 go to the smaller candidate.
SppEstimate estimate_spp(const SignalTrace& trace, double nominal_rate, int sweep_radius,
                         double mains_hz = 60.0, int avg_periods = 20);

// Linear-interpolation resample so from_spp input samples cover to_spp output
// samples. Identity when the rates match; output length floor(n*to/from).
SignalTrace resample(const SignalTrace& trace, int from_spp, int to_spp);

// Both sides adopt the lower rate so the faster device downsamples.
int negotiate_rate(int spp_a, int spp_b);

// Slides the peer's first period across [0, search_span] and returns the
// offset with maximal Pearson correlation (ties to the smaller offset).
SyncResult sync_offset(std::span<const uint16_t> preamble, const SignalTrace& trace,
                       size_t search_span);

}  // namespace voltkey
