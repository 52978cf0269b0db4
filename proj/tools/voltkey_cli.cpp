// voltkey: simulate power-line noise traces, run pairing sessions (in-process
// or over TCP), mount attack scenarios, sweep parameters, and test randomness.
//
// Exit codes: 0 success, 1 pairing/runtime failure, 2 usage error.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <voltkey/alignment.hpp>
#include <voltkey/eval.hpp>
#include <voltkey/protocol.hpp>
#include <voltkey/recon.hpp>
#include <voltkey/rng.hpp>
#include <voltkey/signal.hpp>
#include <voltkey/trace_io.hpp>

using namespace voltkey;

namespace {

// seed streams for deriving per-component seeds from the one CLI seed
enum : uint64_t {
  kDomainStream = 1,
  kSimAdcStream = 2,
  kSessionStream = 7,
  kAdcAStream = 11,
  kAdcBStream = 12,
  kAttackVictimStream = 21,
  kAttackAdversaryStream = 22,
  kAttackVictimAdcStream = 23,
  kAttackAdversaryAdcStream = 24,
  kAttackRunStream = 25,
  kSweepStream = 88,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fnum(double v) {
  char buf[64];
  snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    if (text.empty() || text.back() != '\n') std::fputc('\n', stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open --out path: " + out_path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::pair<int, int> parse_code(const std::string& name) {
  if (name == "h31") return {3, 1};
  if (name == "h74") return {7, 4};
  throw UsageError("--code must be h31 or h74, got '" + name + "'");
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  size_t samples = 85400;
  double nominal_rate = 85400.0;
  double skew_ppm = 0.0;
  double local_noise = 0.002;
  int resolution_bits = 12;
  double breaker_hz = 0.0;
  double start_offset = 0.0;
};

int run_simulate(const SimulateArgs& a, uint64_t seed, const std::string& out_path,
                 const std::string& format) {
  if (out_path.empty()) throw UsageError("simulate requires --out <trace file>");
  DomainNoiseConfig domain;
  domain.seed = mix_seed(seed, kDomainStream);
  AdcConfig adc;
  adc.seed = mix_seed(seed, kSimAdcStream);
  adc.nominal_rate = a.nominal_rate;
  adc.skew_ppm = a.skew_ppm;
  adc.local_noise_rms = a.local_noise;
  adc.resolution_bits = a.resolution_bits;

  double actual = adc.nominal_rate * (1.0 + adc.skew_ppm / 1e6);
  double duration = a.start_offset + double(a.samples) / actual + 0.002;
  MasterSignal master = synth_master(domain, duration);
  if (a.breaker_hz > 0.0) master = apply_breaker_filter(master, a.breaker_hz);
  SignalTrace trace = observe(master, adc, a.start_offset, a.samples);

  TraceFormat tf = (format == "csv") ? TraceFormat::csv : TraceFormat::binary;
  write_trace(out_path, trace, tf);
  fprintf(stderr, "wrote %zu samples at %.0f SPS (gain %.0fx) to %s\n", trace.samples.size(),
          trace.nominal_rate, trace.gain_used, out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------- pair

struct PairArgs {
  std::string transport = "inproc";
  uint16_t listen_port = 0;
  bool listen_set = false;
  std::string connect_to;
  std::string role;
  int n_b = 6;
  std::string code = "h31";
  int key_len = 128;
  int attempts = 5;
  double skew_ppm = 35.0;
  double local_noise = 0.002;
  double breaker_hz = 0.0;
  uint64_t domain_seed = 0;
};

SessionParams pair_params(const PairArgs& a) {
  if (a.n_b < 1 || a.n_b > 16) throw UsageError("--n-b must be between 1 and 16");
  if (a.key_len < 8 || a.key_len > 4096) throw UsageError("--key-len must be between 8 and 4096");
  if (a.attempts < 1 || a.attempts > 50) throw UsageError("--attempts must be between 1 and 50");
  SessionParams params = SessionParams::for_bins(a.n_b, a.key_len);
  auto [n, k] = parse_code(a.code);
  params.code_n = n;
  params.code_k = k;
  params.max_attempts = a.attempts;
  params.validate();
  return params;
}

std::string pair_outcome_json(const PairOutcome& out) {
  std::string s = "{\"type\":\"pair_outcome\",\"success\":";
  s += out.success ? "true" : "false";
  s += ",\"pre_reconciliation_agreement\":" + fnum(out.pre_reconciliation_agreement);
  s += ",\"initiator\":" + to_json(out.initiator);
  s += ",\"responder\":" + to_json(out.responder);
  s += "}";
  return s;
}

int run_pair_inproc(const PairArgs& a, uint64_t seed, const std::string& out_path) {
  SessionParams params = pair_params(a);
  DomainNoiseConfig domain;
  domain.seed = a.domain_seed ? a.domain_seed : mix_seed(seed, kDomainStream);
  AdcConfig adc_a, adc_b;
  adc_a.seed = mix_seed(seed, kAdcAStream);
  adc_b.seed = mix_seed(seed, kAdcBStream);
  adc_a.local_noise_rms = a.local_noise;
  adc_b.local_noise_rms = a.local_noise;
  adc_b.skew_ppm = a.skew_ppm;
  PairOutcome out = run_pair_inprocess(domain, domain, adc_a, adc_b, params,
                                       mix_seed(seed, kSessionStream), a.breaker_hz);
  write_output(out_path, pair_outcome_json(out));
  return out.success ? 0 : 1;
}

int run_pair_tcp(const PairArgs& a, uint64_t seed, const std::string& out_path) {
  bool listening = a.listen_set;
  if (listening == !a.connect_to.empty())
    throw UsageError("tcp transport needs exactly one of --listen or --connect");
  std::string role = a.role;
  if (role.empty()) role = listening ? "responder" : "initiator";
  if (role != "initiator" && role != "responder")
    throw UsageError("--role must be initiator or responder, got '" + role + "'");

  std::unique_ptr<TcpChannel> channel;
  if (listening) {
    TcpListener listener(a.listen_port);
    fprintf(stderr, "listening on port %u\n", unsigned(listener.port()));
    channel = listener.accept_one();
  } else {
    auto colon = a.connect_to.rfind(':');
    if (colon == std::string::npos)
      throw UsageError("--connect expects host:port, got '" + a.connect_to + "'");
    std::string host = a.connect_to.substr(0, colon);
    int port = std::stoi(a.connect_to.substr(colon + 1));
    if (port < 1 || port > 65535) throw UsageError("--connect port out of range");
    channel = TcpChannel::connect(host, uint16_t(port));
  }

  SessionParams params = pair_params(a);
  DomainNoiseConfig domain;
  domain.seed = a.domain_seed ? a.domain_seed : mix_seed(seed, kDomainStream);
  AdcConfig adc;
  bool is_initiator = role == "initiator";
  adc.seed = mix_seed(seed, is_initiator ? kAdcAStream : kAdcBStream);
  adc.local_noise_rms = a.local_noise;
  if (!is_initiator) adc.skew_ppm = a.skew_ppm;
  SimTraceSource source(domain, adc, mix_seed(seed, kSessionStream), is_initiator);
  source.breaker_cutoff_hz = is_initiator ? 0.0 : a.breaker_hz;

  PairingReport report = is_initiator ? run_initiator(*channel, source, params)
                                      : run_responder(*channel, source, params);
  write_output(out_path, to_json(report));
  return report.success ? 0 : 1;
}

// -------------------------------------------------------------------- attack

int run_attack_cmd(const std::string& scenario_name, int trials, uint64_t seed,
                   const std::string& out_path) {
  if (trials < 100) throw UsageError("--trials must be at least 100");
  AttackScenario scenario;
  try {
    scenario.kind = parse_attack_kind(scenario_name);
  } catch (const std::invalid_argument&) {
    throw UsageError("--scenario must be near_time, daily_pattern, dominant_noise or passive, got '" +
                     scenario_name + "'");
  }
  scenario.trials = trials;
  scenario.victim_domain.seed = mix_seed(seed, kAttackVictimStream);
  scenario.adversary_domain.seed = mix_seed(seed, kAttackAdversaryStream);
  scenario.victim_adc.seed = mix_seed(seed, kAttackVictimAdcStream);
  scenario.adversary_adc.seed = mix_seed(seed, kAttackAdversaryAdcStream);
  SessionParams params;
  AttackReport report = run_attack(scenario, params, mix_seed(seed, kAttackRunStream));
  write_output(out_path, to_json(report));
  return 0;
}

// --------------------------------------------------------------------- sweep

int run_sweep(const std::vector<int>& bins, const std::vector<std::string>& codes,
              const std::vector<double>& noises, const std::vector<double>& skews, int trials,
              uint64_t seed, const std::string& out_path) {
  std::string csv = "n_b,code,local_noise_rms,skew_ppm,trials,success_rate,pre_agreement_mean\n";
  uint64_t base = mix_seed(seed, kSweepStream);
  for (int n_b : bins) {
    for (const std::string& code : codes) {
      for (double noise : noises) {
        for (double skew : skews) {
          PairArgs a;
          a.n_b = n_b;
          a.code = code;
          SessionParams params = pair_params(a);
          int ok = 0;
          double pre_sum = 0.0;
          for (int trial = 0; trial < trials; ++trial) {
            DomainNoiseConfig domain;
            domain.seed = mix_seed(mix_seed(base, 1), uint64_t(trial));
            AdcConfig adc_a, adc_b;
            adc_a.seed = mix_seed(mix_seed(base, 2), uint64_t(trial));
            adc_b.seed = mix_seed(mix_seed(base, 3), uint64_t(trial));
            adc_a.local_noise_rms = noise;
            adc_b.local_noise_rms = noise;
            adc_b.skew_ppm = skew;
            PairOutcome out =
                run_pair_inprocess(domain, domain, adc_a, adc_b, params,
                                   mix_seed(mix_seed(base, 4), uint64_t(trial)));
            if (out.success) ++ok;
            pre_sum += out.pre_reconciliation_agreement;
          }
          char row[160];
          snprintf(row, sizeof row, "%d,%s,%.4f,%.1f,%d,%.4f,%.4f\n", n_b, code.c_str(), noise,
                   skew, trials, double(ok) / trials, pre_sum / trials);
          csv += row;
          fprintf(stderr, "%s", row);
        }
      }
    }
  }
  write_output(out_path, csv);
  return 0;
}

// ---------------------------------------------------------------------- nist

std::vector<uint8_t> read_bit_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open --in path: " + path);
  std::vector<uint8_t> bits;
  char c;
  while (in.get(c)) {
    if (c == '0') bits.push_back(0);
    else if (c == '1') bits.push_back(1);
    else if (!std::isspace(static_cast<unsigned char>(c)))
      throw UsageError(std::string("--in file must contain only 0, 1 and whitespace; found '") +
                       c + "'");
  }
  return bits;
}

int run_nist(const std::string& source, const std::string& in_path, size_t n_bits, uint64_t seed,
             const std::string& out_path) {
  if (in_path.empty() && n_bits < 100000) throw UsageError("--bits must be at least 100000");
  std::vector<uint8_t> bits;
  std::string src_label;
  if (!in_path.empty()) {
    bits = read_bit_file(in_path);
    src_label = "file";
  } else if (source == "reference") {
    bits = crypto_reference_stream(seed, n_bits);
    src_label = "reference";
  } else if (source == "keys") {
    bits = generate_key_stream(n_bits, seed);
    src_label = "keys";
  } else {
    throw UsageError("--source must be keys or reference, got '" + source + "'");
  }
  auto results = randomness_suite(bits);
  std::string json = "{\"type\":\"randomness_report\",\"source\":\"" + src_label +
                     "\",\"bits\":" + std::to_string(bits.size()) + ",\"results\":[";
  bool first = true;
  for (auto& [name, p] : results) {
    if (!first) json += ",";
    first = false;
    json += "{\"test\":\"" + name + "\",\"p_value\":" + fnum(p) + ",\"pass\":" +
            (p >= 0.01 ? "true" : "false") + "}";
  }
  json += "]}";
  write_output(out_path, json);
  return 0;
}

// ------------------------------------------------------------------- entropy

int run_entropy(double a_max, const std::string& target, int target_bits,
                const std::string& code_name, int n_b, const std::string& out_path) {
  int bits = target_bits;
  if (bits == 0) {
    if (target == "auth") bits = 20;
    else if (target == "crypto") bits = 128;
    else throw UsageError("--target must be auth or crypto, got '" + target + "'");
  }
  auto [n, k] = parse_code(code_name);
  BlockCode code = build_code(n, k);
  EntropyAccounting acc = entropy_accounting(a_max, bits, code, n_b);
  std::string json = "{\"type\":\"entropy_report\",\"a_max\":" + fnum(a_max) +
                     ",\"target_bits\":" + std::to_string(bits) + ",\"code\":\"" + code_name +
                     "\",\"n_b\":" + std::to_string(n_b) +
                     ",\"entropy_per_bit\":" + fnum(acc.entropy_per_bit) +
                     ",\"inflated_target_bits\":" + std::to_string(acc.inflated_target_bits) +
                     ",\"raw_bits\":" + std::to_string(acc.raw_bits_required) +
                     ",\"measurement_seconds\":" + fnum(acc.measurement_seconds) + "}";
  write_output(out_path, json);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power-line noise pairing toolkit: simulate, pair, attack, sweep, test"};
  app.require_subcommand(1);

  uint64_t seed = 1;
  std::string out_path;
  std::string format = "json";
  app.add_option("--seed", seed, "base seed; every run with the same seed is reproducible")
      ->envname("VOLTKEY_SEED");
  app.add_option("--out", out_path, "write the report/trace here instead of stdout");
  app.add_option("--format", format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "synthesize a noise trace and write it out");
  c_sim->fallthrough();
  c_sim->add_option("--samples", sim.samples, "device samples to record");
  c_sim->add_option("--nominal-rate", sim.nominal_rate, "device sample rate (SPS)");
  c_sim->add_option("--skew-ppm", sim.skew_ppm, "oscillator skew in ppm");
  c_sim->add_option("--local-noise", sim.local_noise, "device-private noise rms (V)");
  c_sim->add_option("--resolution-bits", sim.resolution_bits, "ADC bits (8-16)");
  c_sim->add_option("--breaker-hz", sim.breaker_hz, "observe through a breaker low-pass");
  c_sim->add_option("--offset", sim.start_offset, "capture start offset (s)");

  PairArgs pair;
  CLI::App* c_pair = app.add_subcommand("pair", "run one key-establishment session");
  c_pair->fallthrough();
  c_pair->add_option("--transport", pair.transport, "inproc or tcp")
      ->check(CLI::IsMember({"inproc", "tcp"}));
  auto* listen_opt = c_pair->add_option("--listen", pair.listen_port, "tcp: listen on this port");
  c_pair->add_option("--connect", pair.connect_to, "tcp: connect to host:port");
  c_pair->add_option("--role", pair.role, "tcp: initiator or responder");
  c_pair->add_option("--n-b", pair.n_b, "bits per mains period");
  c_pair->add_option("--code", pair.code, "reconciliation code: h31 or h74");
  c_pair->add_option("--key-len", pair.key_len, "raw key length in bits");
  c_pair->add_option("--attempts", pair.attempts, "maximum pairing attempts");
  c_pair->add_option("--skew-ppm", pair.skew_ppm, "responder oscillator skew");
  c_pair->add_option("--local-noise", pair.local_noise, "device-private noise rms (V)");
  c_pair->add_option("--breaker-hz", pair.breaker_hz, "responder behind a breaker low-pass");
  c_pair->add_option("--domain-seed", pair.domain_seed,
                     "electrical domain identity (default: derived from --seed)");

  std::string attack_scenario;
  int attack_trials = 1000;
  CLI::App* c_attack = app.add_subcommand("attack", "run an adversary scenario");
  c_attack->fallthrough();
  c_attack->add_option("--scenario", attack_scenario,
                       "near_time, daily_pattern, dominant_noise or passive")
      ->required();
  c_attack->add_option("--trials", attack_trials, "attack trials (>= 100)");

  std::vector<int> sweep_bins{6, 8, 10};
  std::vector<std::string> sweep_codes{"h31", "h74"};
  std::vector<double> sweep_noise{0.002, 0.02};
  std::vector<double> sweep_skew{0.0, 1000.0};
  int sweep_trials = 20;
  CLI::App* c_sweep = app.add_subcommand("sweep", "success-rate table across parameters (csv)");
  c_sweep->fallthrough();
  c_sweep->add_option("--n-b", sweep_bins, "bin counts to sweep");
  c_sweep->add_option("--code", sweep_codes, "codes to sweep");
  c_sweep->add_option("--local-noise", sweep_noise, "device noise levels to sweep");
  c_sweep->add_option("--skew-ppm", sweep_skew, "responder skews to sweep");
  c_sweep->add_option("--trials", sweep_trials, "sessions per cell");

  std::string nist_source = "keys";
  std::string nist_in;
  size_t nist_bits = 100000;
  CLI::App* c_nist = app.add_subcommand("nist", "run the six-test randomness suite");
  c_nist->fallthrough();
  c_nist->add_option("--source", nist_source, "keys (simulated pairings) or reference");
  c_nist->add_option("--in", nist_in, "read an ascii 0/1 bitstream instead of generating");
  c_nist->add_option("--bits", nist_bits, "bits to generate (>= 100000)");

  double ent_a_max = 0.0;
  std::string ent_target = "auth";
  int ent_target_bits = 0;
  std::string ent_code = "h31";
  int ent_n_b = 6;
  CLI::App* c_ent = app.add_subcommand("entropy", "raw-measurement budget for a key target");
  c_ent->fallthrough();
  c_ent->add_option("--a-max", ent_a_max, "worst adversary agreement rate")->required();
  c_ent->add_option("--target", ent_target, "auth (20 bits) or crypto (128 bits)");
  c_ent->add_option("--target-bits", ent_target_bits, "explicit entropy target, overrides --target");
  c_ent->add_option("--code", ent_code, "reconciliation code: h31 or h74");
  c_ent->add_option("--n-b", ent_n_b, "bits per mains period");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion")
      return rc;
    return 2;
  }
  pair.listen_set = listen_opt->count() > 0;

  try {
    if (app.got_subcommand(c_sim)) return run_simulate(sim, seed, out_path, format);
    if (app.got_subcommand(c_pair)) {
      if (pair.transport == "tcp") return run_pair_tcp(pair, seed, out_path);
      if (pair.listen_set || !pair.connect_to.empty())
        throw UsageError("--listen/--connect require --transport tcp");
      return run_pair_inproc(pair, seed, out_path);
    }
    if (app.got_subcommand(c_attack))
      return run_attack_cmd(attack_scenario, attack_trials, seed, out_path);
    if (app.got_subcommand(c_sweep)) {
      if (format == "json") {
        bool explicit_json = app.count("--format") > 0;
        if (explicit_json) throw UsageError("sweep emits csv; drop --format json");
      }
      return run_sweep(sweep_bins, sweep_codes, sweep_noise, sweep_skew, sweep_trials, seed,
                       out_path);
    }
    if (app.got_subcommand(c_nist))
      return run_nist(nist_source, nist_in, nist_bits, seed, out_path);
    if (app.got_subcommand(c_ent))
      return run_entropy(ent_a_max, ent_target, ent_target_bits, ent_code, ent_n_b, out_path);
  } catch (const UsageError& e) {
    fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
