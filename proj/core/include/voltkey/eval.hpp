#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "voltkey/bitext.hpp"
#include "voltkey/protocol.hpp"
#include "voltkey/signal.hpp"

namespace voltkey {

double bit_agreement_rate(std::span<const uint8_t> a, std::span<const uint8_t> b);
double bit_agreement_rate(const BitSequence& a, const BitSequence& b);

double pairing_success_rate(std::span<const PairingReport> outcomes);

// Fig.-5-style confusion matrix: entry (i, j) is the mean agreement between
// A's bits from its period i and B's bits from its period j, where B reads
// A's per-period index schedule (as the live protocol would). Inputs are one
// period list per repetition, equally shaped.
std::vector<std::vector<double>> uniqueness_matrix(
    const std::vector<std::vector<NoisePeriod>>& dev_a_periods,
    const std::vector<std::vector<NoisePeriod>>& dev_b_periods, int n_b);

// Simulates one colocated repetition for the uniqueness analysis: both
// devices watch the same master window (device-exact rate, no skew) and the
// n_p noise periods of each come back aligned.
std::pair<std::vector<NoisePeriod>, std::vector<NoisePeriod>> simulate_shared_noise_periods(
    const DomainNoiseConfig& domain, const AdcConfig& adc_a, const AdcConfig& adc_b, int n_p,
    uint64_t rep_seed);

enum class AttackKind { near_time, daily_pattern, dominant_noise, passive };

const char* attack_kind_name(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);

// The adversary owns only its own domain's signal; links to the victim are
// limited to whatever each scenario grants (shared appliance-load seed, or
// the public transcript for `passive`).
struct AttackScenario {
  AttackKind kind = AttackKind::near_time;
  int trials = 1000;
  DomainNoiseConfig victim_domain;
  DomainNoiseConfig adversary_domain;
  AdcConfig victim_adc;
  AdcConfig adversary_adc;
};

struct AttackReport {
  std::string scenario;
  int trials = 0;
  std::vector<double> rates;  // post-reconciliation agreement per trial
  double mean_agreement = 0.0;
  double max_agreement = 0.0;
  std::vector<int> histogram;  // 100 bins of width 0.01 over [0, 1]
  bool any_success = false;    // some trial hit agreement 1.0
};

AttackReport run_attack(const AttackScenario& scenario, const SessionParams& params,
                        uint64_t seed);

// Six SP 800-22 tests in canonical order; p-value per test.
std::vector<std::pair<std::string, double>> randomness_suite(std::span<const uint8_t> bits);

namespace nist {
double frequency(std::span<const uint8_t> bits);
double block_frequency(std::span<const uint8_t> bits, int block_len = 128);
double cumulative_sums_forward(std::span<const uint8_t> bits);
double rank(std::span<const uint8_t> bits);
double non_overlapping_template(std::span<const uint8_t> bits);
double linear_complexity(std::span<const uint8_t> bits, int block_len = 500);

// linear span of one sequence, Berlekamp-Massey over GF(2)
int berlekamp_massey(std::span<const uint8_t> bits);
}  // namespace nist

// SHA-256 counter-mode bitstream; the reference the suite validates against.
std::vector<uint8_t> crypto_reference_stream(uint64_t seed, size_t n_bits);

// Concatenated final keys from repeated simulated pairings on a reduced-rate
// profile (cheap sessions, same extraction pipeline).
std::vector<uint8_t> generate_key_stream(size_t n_bits, uint64_t seed);

}  // namespace voltkey
