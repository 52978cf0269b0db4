#include "voltkey/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "voltkey/alignment.hpp"
#include "voltkey/digest.hpp"
#include "voltkey/recon.hpp"
#include "voltkey/rng.hpp"

namespace voltkey {

namespace {

// seed streams inside eval
enum : uint64_t {
  kVictimStream = 1,
  kAdversaryStream = 2,
  kSharedWindowStream = 3,
  kVictimWindowStream = 4,
  kAdversaryWindowStream = 5,
  kLoadIdentityStream = 6,
  kSessionStream = 7,
  kAdcAStream = 11,
  kAdcBStream = 12,
  kAdcEStream = 13,
  kRetryStream = 17,
};

struct WindowKey {
  BitSequence bits;    // key_len raw bits
  BitSequence final;   // truncated to whole code blocks
  HelperData helper;
};

// One device extracting alone from its own domain at device-exact slicing;
// the shortest honest path through slice -> index -> extract -> helper.
WindowKey extract_window_key(const DomainNoiseConfig& domain, const AdcConfig& adc,
                             const SessionParams& params, const BlockCode& code) {
  int c = int(std::llround(params.nominal_rate / params.mains_hz));
  size_t n = size_t(params.n_p + 2) * size_t(c) + 2;
  double duration = double(n) / adc.nominal_rate * 1.001 + 0.001;
  MasterSignal master = synth_master(domain, duration);
  SignalTrace trace = observe(master, adc, 0.0, n);
  auto rows = slice_periods(trace, size_t(c), size_t(params.n_p) + 2, 0);
  WindowKey out;
  IndexSchedule schedule;
  std::tie(out.bits, schedule) =
      generate_sequence(rows, params.n_p, params.n_b, params.key_len, ExtractRole::indexer);
  out.helper = helper_data(code, out.bits);
  out.final = out.bits;
  size_t keep = out.final.bits.size() / size_t(code.n) * size_t(code.n);
  out.final.bits.resize(keep);
  out.final.provenance.resize(keep);
  return out;
}

WireMessage last_of(const std::vector<TranscriptEntry>& transcript, MsgType type, bool sent) {
  for (auto it = transcript.rbegin(); it != transcript.rend(); ++it)
    if (it->msg.type == type && it->sent == sent) return it->msg;
  throw std::logic_error(std::string("transcript holds no ") + msg_type_name(type));
}

double key_replay_trial(const AttackScenario& scenario, const SessionParams& params,
                        const BlockCode& code, uint64_t trial_seed, uint64_t shared_load) {
  DomainNoiseConfig dv = scenario.victim_domain;
  DomainNoiseConfig de = scenario.adversary_domain;
  dv.seed = mix_seed(dv.seed, mix_seed(trial_seed, kVictimStream));
  de.seed = mix_seed(de.seed, mix_seed(trial_seed, kAdversaryStream));
  dv.load_seed = shared_load;
  de.load_seed = shared_load;
  if (scenario.kind == AttackKind::dominant_noise) {
    // the deterministic appliance waveform is shared exactly; only the
    // stochastic components differ
    uint64_t w = mix_seed(shared_load, mix_seed(trial_seed, kSharedWindowStream));
    dv.load_window_seed = w;
    de.load_window_seed = w;
  } else {
    // near_time: same appliances, a different minute of the same hour;
    // daily_pattern: same appliances, the same minute of a different day.
    // Both land on "same load identity, different modulation trajectory".
    uint64_t salt = scenario.kind == AttackKind::near_time ? 0x6e74 : 0x6470;
    dv.load_window_seed =
        mix_seed(shared_load, mix_seed(trial_seed, mix_seed(kVictimWindowStream, salt)));
    de.load_window_seed =
        mix_seed(shared_load, mix_seed(trial_seed, mix_seed(kAdversaryWindowStream, salt)));
  }

  AdcConfig av = scenario.victim_adc;
  AdcConfig ae = scenario.adversary_adc;
  av.seed = mix_seed(av.seed, mix_seed(trial_seed, kAdcAStream));
  ae.seed = mix_seed(ae.seed, mix_seed(trial_seed, kAdcEStream));

  WindowKey victim = extract_window_key(dv, av, params, code);
  WindowKey adversary = extract_window_key(de, ae, params, code);
  BitSequence guess = reconcile(code, adversary.bits, victim.helper);
  return bit_agreement_rate(std::span<const uint8_t>(guess.bits),
                            std::span<const uint8_t>(victim.final.bits));
}

double passive_trial(const AttackScenario& scenario, const SessionParams& params,
                     const BlockCode& code, uint64_t trial_seed) {
  bool same_domain = scenario.adversary_domain.seed == scenario.victim_domain.seed &&
                     scenario.adversary_domain.load_seed == scenario.victim_domain.load_seed;
  bool same_adc = scenario.adversary_adc.seed == scenario.victim_adc.seed;

  DomainNoiseConfig dv = scenario.victim_domain;
  dv.seed = mix_seed(dv.seed, mix_seed(trial_seed, kVictimStream));
  DomainNoiseConfig de = scenario.adversary_domain;
  de.seed = mix_seed(de.seed, mix_seed(trial_seed, same_domain ? kVictimStream : kAdversaryStream));

  AdcConfig aa = scenario.victim_adc;
  AdcConfig ab = scenario.victim_adc;
  AdcConfig ae = scenario.adversary_adc;
  aa.seed = mix_seed(aa.seed, mix_seed(trial_seed, kAdcAStream));
  ab.seed = mix_seed(ab.seed, mix_seed(trial_seed, kAdcBStream));
  ae.seed = mix_seed(ae.seed, mix_seed(trial_seed, same_adc ? kAdcBStream : kAdcEStream));

  // the legitimate session whose transcript leaks to the adversary
  PairOutcome outcome;
  uint64_t session_seed = mix_seed(trial_seed, kSessionStream);
  for (int retry = 0;; ++retry) {
    outcome = run_pair_inprocess(dv, dv, aa, ab, params, session_seed);
    if (outcome.success) break;
    if (retry >= 20)
      throw std::runtime_error("passive_trial: legitimate session never succeeded");
    session_seed = mix_seed(session_seed, kRetryStream);
  }

  const auto& transcript = outcome.initiator.transcript;
  int c_a = int(parse_rate(last_of(transcript, MsgType::rate, true)));
  int c_b = int(parse_rate(last_of(transcript, MsgType::rate, false)));
  int c_l = negotiate_rate(c_a, c_b);
  auto preamble = parse_preamble(last_of(transcript, MsgType::preamble, true));
  auto schedule = parse_indices(last_of(transcript, MsgType::indices, true), size_t(params.n_p),
                                size_t(params.n_b));
  size_t blocks = size_t(params.key_len) / size_t(params.code_n);
  auto helper = parse_helper(last_of(transcript, MsgType::helper, true), params.code_n, blocks);

  // adversary captures its own domain in the responder's window and replays
  // the responder pipeline against the public transcript
  SimTraceSource source_e(de, ae, session_seed, false);
  SignalTrace trace = source_e.capture(outcome.initiator.attempts_used,
                                       responder_capture_samples(params));
  SppEstimate est = estimate_spp(trace, params.nominal_rate, params.sweep_radius, params.mains_hz);
  SignalTrace aligned = resample(trace, est.spp, c_l);
  SyncResult sync = sync_offset(preamble, aligned,
                                size_t(params.search_span_periods) * size_t(c_l));
  auto rows = slice_periods(aligned, size_t(c_l), size_t(params.n_p) + 2, sync.offset_samples);
  auto [bits, echoed] = generate_sequence(rows, params.n_p, params.n_b, params.key_len,
                                          ExtractRole::follower, &schedule);
  (void)echoed;
  BitSequence guess = reconcile(code, bits, helper);
  return bit_agreement_rate(std::span<const uint8_t>(guess.bits),
                            std::span<const uint8_t>(outcome.initiator.final_key_bits));
}

}  // namespace

double bit_agreement_rate(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("bit_agreement_rate: length mismatch");
  if (a.empty()) throw std::invalid_argument("bit_agreement_rate: empty sequences");
  size_t match = 0;
  for (size_t i = 0; i < a.size(); ++i)
    if ((a[i] & 1) == (b[i] & 1)) ++match;
  return double(match) / double(a.size());
}

double bit_agreement_rate(const BitSequence& a, const BitSequence& b) {
  return bit_agreement_rate(std::span<const uint8_t>(a.bits), std::span<const uint8_t>(b.bits));
}

double pairing_success_rate(std::span<const PairingReport> outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("pairing_success_rate: no outcomes");
  size_t ok = 0;
  for (const auto& r : outcomes) ok += r.success ? 1 : 0;
  return double(ok) / double(outcomes.size());
}

std::vector<std::vector<double>> uniqueness_matrix(
    const std::vector<std::vector<NoisePeriod>>& dev_a_periods,
    const std::vector<std::vector<NoisePeriod>>& dev_b_periods, int n_b) {
  if (dev_a_periods.empty() || dev_a_periods.size() != dev_b_periods.size())
    throw std::invalid_argument("uniqueness_matrix: repetition counts differ");
  const size_t n_p = dev_a_periods[0].size();
  if (n_p == 0) throw std::invalid_argument("uniqueness_matrix: empty period lists");

  std::vector<std::vector<double>> matrix(n_p, std::vector<double>(n_p, 0.0));
  for (size_t rep = 0; rep < dev_a_periods.size(); ++rep) {
    const auto& pa = dev_a_periods[rep];
    const auto& pb = dev_b_periods[rep];
    if (pa.size() != n_p || pb.size() != n_p)
      throw std::invalid_argument("uniqueness_matrix: ragged repetition");
    std::vector<std::vector<uint8_t>> bits_a(n_p), bits_b(n_p);
    for (size_t p = 0; p < n_p; ++p) {
      auto idx = select_indices(pa[p], n_b);
      bits_a[p] = extract_bits(pa[p], idx);
      bits_b[p] = extract_bits(pb[p], idx);
    }
    for (size_t i = 0; i < n_p; ++i)
      for (size_t j = 0; j < n_p; ++j)
        matrix[i][j] += bit_agreement_rate(std::span<const uint8_t>(bits_a[i]),
                                           std::span<const uint8_t>(bits_b[j]));
  }
  for (auto& row : matrix)
    for (double& v : row) v /= double(dev_a_periods.size());
  return matrix;
}

std::pair<std::vector<NoisePeriod>, std::vector<NoisePeriod>> simulate_shared_noise_periods(
    const DomainNoiseConfig& domain, const AdcConfig& adc_a, const AdcConfig& adc_b, int n_p,
    uint64_t rep_seed) {
  DomainNoiseConfig d = domain;
  d.seed = mix_seed(d.seed, rep_seed);
  AdcConfig aa = adc_a;
  aa.seed = mix_seed(aa.seed, mix_seed(rep_seed, kAdcAStream));
  AdcConfig ab = adc_b;
  ab.seed = mix_seed(ab.seed, mix_seed(rep_seed, kAdcBStream));

  int c = int(std::llround(aa.nominal_rate / domain.fundamental_hz));
  size_t n = size_t(n_p + 2) * size_t(c) + 2;
  double duration = double(n) / aa.nominal_rate * 1.001 + 0.001;
  MasterSignal master = synth_master(d, duration);
  SignalTrace ta = observe(master, aa, 0.0, n);
  SignalTrace tb = observe(master, ab, 0.0, n);
  auto periods_a = noise_periods(slice_periods(ta, size_t(c), size_t(n_p) + 2, 0));
  auto periods_b = noise_periods(slice_periods(tb, size_t(c), size_t(n_p) + 2, 0));
  periods_a.resize(size_t(n_p));
  periods_b.resize(size_t(n_p));
  return {std::move(periods_a), std::move(periods_b)};
}

const char* attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::near_time: return "near_time";
    case AttackKind::daily_pattern: return "daily_pattern";
    case AttackKind::dominant_noise: return "dominant_noise";
    case AttackKind::passive: return "passive";
  }
  return "unknown";
}

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "near_time") return AttackKind::near_time;
  if (name == "daily_pattern") return AttackKind::daily_pattern;
  if (name == "dominant_noise") return AttackKind::dominant_noise;
  if (name == "passive") return AttackKind::passive;
  throw std::invalid_argument("unknown attack scenario: " + name);
}

AttackReport run_attack(const AttackScenario& scenario, const SessionParams& params,
                        uint64_t seed) {
  if (scenario.trials < 100) throw std::invalid_argument("run_attack: need at least 100 trials");
  params.validate();
  const BlockCode code = build_code(params.code_n, params.code_k);

  uint64_t shared_load = scenario.victim_domain.load_seed
                             ? scenario.victim_domain.load_seed
                             : mix_seed(seed, kLoadIdentityStream);

  AttackReport report;
  report.scenario = attack_kind_name(scenario.kind);
  report.trials = scenario.trials;
  report.rates.reserve(size_t(scenario.trials));
  report.histogram.assign(100, 0);
  for (int trial = 0; trial < scenario.trials; ++trial) {
    uint64_t ts = mix_seed(seed, uint64_t(trial));
    double rate = scenario.kind == AttackKind::passive
                      ? passive_trial(scenario, params, code, ts)
                      : key_replay_trial(scenario, params, code, ts, shared_load);
    report.rates.push_back(rate);
    report.mean_agreement += rate;
    report.max_agreement = std::max(report.max_agreement, rate);
    if (rate >= 1.0) report.any_success = true;
    report.histogram[size_t(std::min(99.0, rate * 100.0))] += 1;
  }
  report.mean_agreement /= double(report.trials);
  return report;
}

std::vector<uint8_t> crypto_reference_stream(uint64_t seed, size_t n_bits) {
  std::vector<uint8_t> bits;
  bits.reserve(n_bits);
  uint64_t counter = 0;
  uint8_t block[16];
  while (bits.size() < n_bits) {
    for (int i = 0; i < 8; ++i) {
      block[i] = uint8_t(seed >> (8 * i));
      block[8 + i] = uint8_t(counter >> (8 * i));
    }
    auto digest = sha256(std::span<const uint8_t>(block, 16));
    for (uint8_t byte : digest)
      for (int i = 7; i >= 0 && bits.size() < n_bits; --i)
        bits.push_back((byte >> i) & 1);
    ++counter;
  }
  return bits;
}

std::vector<uint8_t> generate_key_stream(size_t n_bits, uint64_t seed) {
  // reduced-rate profile: exact 283 samples per period, long sessions, so a
  // million bits of key material stays affordable
  DomainNoiseConfig domain;
  domain.master_rate = 200000.0;
  domain.seed = mix_seed(seed, kVictimStream);

  AdcConfig adc_a, adc_b;
  adc_a.nominal_rate = 16980.0;
  adc_b.nominal_rate = 16980.0;
  adc_a.seed = mix_seed(seed, kAdcAStream);
  adc_b.seed = mix_seed(seed, kAdcBStream);

  SessionParams params;
  params.nominal_rate = 16980.0;
  params.n_b = 10;
  params.key_len = 510;
  params.n_p = 51;

  std::vector<uint8_t> bits;
  bits.reserve(n_bits);
  for (uint64_t session = 0; bits.size() < n_bits; ++session) {
    PairOutcome outcome =
        run_pair_inprocess(domain, domain, adc_a, adc_b, params, mix_seed(seed, session));
    if (!outcome.success) continue;
    const auto& key = outcome.initiator.final_key_bits;
    for (size_t i = 0; i < key.size() && bits.size() < n_bits; ++i) bits.push_back(key[i]);
  }
  return bits;
}

}  // namespace voltkey
