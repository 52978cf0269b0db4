#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "voltkey/signal.hpp"
#include "voltkey/wire.hpp"

namespace voltkey {

struct ChannelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SessionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SessionParams {
  double nominal_rate = 85400.0;
  int n_p = 22;
  int n_b = 6;
  int key_len = 128;
  int code_n = 3;
  int code_k = 1;
  int sweep_radius = 30;
  int max_attempts = 5;
  // local knobs, not negotiated on the wire
  double mains_hz = 60.0;
  int search_span_periods = 2;

  void validate() const;
  // session geometry for a given bin count: n_p = ceil(key_len / n_b)
  static SessionParams for_bins(int n_b, int key_len = 128);
};

// Ordered, reliable, blocking message pipe between the two endpoints.
class Channel {
public:
  virtual ~Channel() = default;
  virtual void send(const WireMessage& msg) = 0;
  virtual WireMessage recv() = 0;
  // unblocks the peer; further sends/receives fail with ChannelError
  virtual void close() = 0;
};

// Paired in-memory queues carrying encoded frames, so the in-process path
// exercises the same codec as TCP.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_channel_pair();

class TcpChannel : public Channel {
public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send(const WireMessage& msg) override;
  WireMessage recv() override;
  void close() override;

  static std::unique_ptr<TcpChannel> connect(const std::string& host, uint16_t port);

private:
  int fd_;
};

class TcpListener {
public:
  explicit TcpListener(uint16_t port);  // 0 picks an ephemeral port
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  std::unique_ptr<TcpChannel> accept_one();

private:
  int fd_;
  uint16_t port_ = 0;
};

// Where an endpoint's measurements come from; one capture per attempt.
class TraceSource {
public:
  virtual ~TraceSource() = default;
  virtual SignalTrace capture(int attempt, size_t n_samples) = 0;
};

// Synthesizes a fresh master window per attempt. Both endpoints of a session
// construct their source with the same session_seed; sources sharing a
// domain config then observe the same master, while each device keeps its
// own ADC noise. The initiator starts its capture a small random network
// latency after the responder.
class SimTraceSource : public TraceSource {
public:
  SimTraceSource(DomainNoiseConfig domain, AdcConfig adc, uint64_t session_seed,
                 bool is_initiator);

  SignalTrace capture(int attempt, size_t n_samples) override;

  double latency_lo = 0.0005;  // seconds
  double latency_hi = 0.0035;
  // when > 0, this endpoint sees the master through a breaker-panel low-pass
  double breaker_cutoff_hz = 0.0;
  double last_signal_seconds = 0.0;  // duration of the most recent capture

private:
  DomainNoiseConfig domain_;
  AdcConfig adc_;
  uint64_t session_seed_;
  bool is_initiator_;
};

// Replays a prerecorded trace; capture returns its first n_samples.
class FixedTraceSource : public TraceSource {
public:
  explicit FixedTraceSource(SignalTrace trace) : trace_(std::move(trace)) {}
  SignalTrace capture(int attempt, size_t n_samples) override;

private:
  SignalTrace trace_;
};

struct TranscriptEntry {
  bool sent = false;
  WireMessage msg;
};

struct PairingTimings {
  double measure_seconds_per_attempt = 0.0;  // simulated signal time
  double measure_seconds_total = 0.0;
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;
};

struct PairingReport {
  std::string role;
  bool success = false;
  int attempts_used = 0;
  std::optional<double> pre_reconciliation_agreement;
  std::vector<uint8_t> final_key_bits;  // empty on failure
  std::vector<TranscriptEntry> transcript;
  PairingTimings timings;
  // CONFIRM/RESULT are plumbing added on top of the six-step exchange;
  // the method string flags that addition in every report.
  std::string confirmation_method = "sha256-key-digest";
};

// Device A: leads the session, supplies preamble, index schedule, and helper
// data. Blocks until the session concludes or throws on protocol violations.
// When extracted is non-null it receives the last attempt's key bits before
// reconciliation (a harness convenience; nothing on the wire).
PairingReport run_initiator(Channel& channel, TraceSource& source, const SessionParams& params,
                            BitSequence* extracted = nullptr);

// Device B: opens the session with INIT, time-syncs to A's preamble, follows
// A's schedule, reconciles, and reports the key digest back.
PairingReport run_responder(Channel& channel, TraceSource& source, const SessionParams& params,
                            BitSequence* extracted = nullptr);

// expected capture sizes (samples) for each role
size_t initiator_capture_samples(const SessionParams& params);
size_t responder_capture_samples(const SessionParams& params);

struct PairOutcome {
  PairingReport initiator;
  PairingReport responder;
  bool success = false;
  // exact bit agreement between the two pre-reconciliation sequences,
  // computed by the harness (it can see both sides)
  double pre_reconciliation_agreement = 0.0;
};

// Runs a full two-endpoint session on two threads over an in-process channel.
// A nonzero responder_breaker_cutoff_hz puts the responder behind a breaker
// low-pass while the initiator sees the raw master.
PairOutcome run_pair_inprocess(const DomainNoiseConfig& domain_a,
                               const DomainNoiseConfig& domain_b, const AdcConfig& adc_a,
                               const AdcConfig& adc_b, const SessionParams& params,
                               uint64_t session_seed, double responder_breaker_cutoff_hz = 0.0);

}  // namespace voltkey
