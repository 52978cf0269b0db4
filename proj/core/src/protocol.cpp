#include "voltkey/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <future>
#include <mutex>
#include <thread>

#include "voltkey/alignment.hpp"
#include "voltkey/digest.hpp"
#include "voltkey/rng.hpp"

namespace voltkey {

namespace {

constexpr int kAvgPeriods = 20;       // periods averaged in the rate sweep
constexpr double kCaptureMargin = 1.03;  // headroom over worst-case oscillator skew
constexpr uint64_t kWindowStream = 11;
constexpr uint64_t kLatencyStream = 12;
constexpr uint64_t kAdcStream = 13;
constexpr uint64_t kLoadStream = 14;

size_t capture_samples(const SessionParams& p, int periods) {
  return size_t(std::ceil(double(periods) * p.nominal_rate / p.mains_hz * kCaptureMargin));
}

int initiator_periods(const SessionParams& p) {
  return std::max(p.n_p + 2, kAvgPeriods + 1) + 1;
}

// endpoint bookkeeping shared by both roles
struct Endpoint {
  Channel& channel;
  PairingReport report;

  void send(const WireMessage& msg) {
    channel.send(msg);
    report.transcript.push_back({true, msg});
    report.timings.bytes_sent += 5 + msg.payload.size();
  }

  WireMessage expect(MsgType want) {
    WireMessage msg = channel.recv();
    report.transcript.push_back({false, msg});
    report.timings.bytes_received += 5 + msg.payload.size();
    if (msg.type != want)
      throw ProtocolError(std::string("expected ") + msg_type_name(want) + ", got " +
                          msg_type_name(msg.type));
    return msg;
  }
};

InitParams to_init_params(const SessionParams& p) {
  InitParams w;
  w.nominal_rate_hz = uint32_t(std::llround(p.nominal_rate));
  w.n_p = uint16_t(p.n_p);
  w.n_b = uint16_t(p.n_b);
  w.key_len = uint16_t(p.key_len);
  w.code_n = uint8_t(p.code_n);
  w.code_k = uint8_t(p.code_k);
  w.sweep_radius = uint16_t(p.sweep_radius);
  w.max_attempts = uint8_t(p.max_attempts);
  return w;
}

double agreement(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  size_t n = std::min(a.size(), b.size());
  if (n == 0) return 0.0;
  size_t match = 0;
  for (size_t i = 0; i < n; ++i)
    if ((a[i] & 1) == (b[i] & 1)) ++match;
  return double(match) / double(n);
}

void truncate_to_blocks(BitSequence& seq, const BlockCode& code) {
  size_t keep = seq.bits.size() / size_t(code.n) * size_t(code.n);
  seq.bits.resize(keep);
  if (seq.provenance.size() > keep) seq.provenance.resize(keep);
}

}  // namespace

void SessionParams::validate() const {
  if (nominal_rate <= 0 || mains_hz <= 0)
    throw std::invalid_argument("SessionParams: rates must be > 0");
  if (n_p < 1 || n_b < 1 || key_len < 1)
    throw std::invalid_argument("SessionParams: sizes must be >= 1");
  if (n_p * n_b < key_len)
    throw std::invalid_argument("SessionParams: n_p * n_b must cover key_len");
  if (max_attempts < 1) throw std::invalid_argument("SessionParams: max_attempts must be >= 1");
  if (!((code_n == 3 && code_k == 1) || (code_n == 7 && code_k == 4)))
    throw std::invalid_argument("SessionParams: unsupported code");
  if (sweep_radius < 0 || search_span_periods < 1)
    throw std::invalid_argument("SessionParams: bad search parameters");
}

SessionParams SessionParams::for_bins(int n_b, int key_len) {
  SessionParams p;
  p.n_b = n_b;
  p.key_len = key_len;
  p.n_p = int((key_len + n_b - 1) / n_b);
  p.validate();
  return p;
}

size_t initiator_capture_samples(const SessionParams& p) {
  return capture_samples(p, initiator_periods(p));
}

size_t responder_capture_samples(const SessionParams& p) {
  return capture_samples(p, initiator_periods(p) + p.search_span_periods + 1);
}

// ---- channels ----

namespace {

// one direction of the in-process pipe
struct ByteQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<uint8_t>> frames;
  bool closed = false;

  void push(std::vector<uint8_t> frame) {
    {
      std::lock_guard lock(mu);
      if (closed) throw ChannelError("channel closed");
      frames.push_back(std::move(frame));
    }
    cv.notify_one();
  }

  std::vector<uint8_t> pop() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !frames.empty() || closed; });
    if (frames.empty()) throw ChannelError("channel closed");
    auto frame = std::move(frames.front());
    frames.pop_front();
    return frame;
  }

  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class InProcChannel : public Channel {
public:
  InProcChannel(std::shared_ptr<ByteQueue> out, std::shared_ptr<ByteQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  ~InProcChannel() override { close(); }

  void send(const WireMessage& msg) override { out_->push(encode_message(msg)); }

  WireMessage recv() override { return decode_message(in_->pop()); }

  void close() override {
    out_->close();
    in_->close();
  }

private:
  std::shared_ptr<ByteQueue> out_;
  std::shared_ptr<ByteQueue> in_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_channel_pair() {
  auto ab = std::make_shared<ByteQueue>();
  auto ba = std::make_shared<ByteQueue>();
  return {std::make_unique<InProcChannel>(ab, ba), std::make_unique<InProcChannel>(ba, ab)};
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send(const WireMessage& msg) {
  auto frame = encode_message(msg);
  size_t off = 0;
  while (off < frame.size()) {
    ssize_t n = ::write(fd_, frame.data() + off, frame.size() - off);
    if (n <= 0) throw ChannelError("tcp send failed");
    off += size_t(n);
  }
}

void TcpChannel::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

WireMessage TcpChannel::recv() {
  auto read_exact = [&](uint8_t* buf, size_t len) {
    size_t off = 0;
    while (off < len) {
      ssize_t n = ::read(fd_, buf + off, len - off);
      if (n == 0) throw ChannelError("tcp peer closed");
      if (n < 0) throw ChannelError("tcp recv failed");
      off += size_t(n);
    }
  };
  uint8_t head[4];
  read_exact(head, 4);
  uint32_t len = uint32_t(head[0]) << 24 | uint32_t(head[1]) << 16 | uint32_t(head[2]) << 8 |
                 uint32_t(head[3]);
  if (len < 1 || len > (1u << 24)) throw FramingError("tcp frame length out of range");
  std::vector<uint8_t> frame(4 + len);
  std::memcpy(frame.data(), head, 4);
  read_exact(frame.data() + 4, len);
  return decode_message(frame);
}

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& host, uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw ChannelError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw ChannelError("bad host address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    throw ChannelError("connect failed");
  }
  return std::make_unique<TcpChannel>(fd);
}

TcpListener::TcpListener(uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw ChannelError("socket() failed");
  int one = 1;
  setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 1) != 0) {
    ::close(fd_);
    throw ChannelError("bind/listen failed");
  }
  socklen_t len = sizeof addr;
  if (getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpChannel> TcpListener::accept_one() {
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw ChannelError("accept failed");
  return std::make_unique<TcpChannel>(fd);
}

// ---- trace sources ----

SimTraceSource::SimTraceSource(DomainNoiseConfig domain, AdcConfig adc, uint64_t session_seed,
                               bool is_initiator)
    : domain_(std::move(domain)), adc_(adc), session_seed_(session_seed),
      is_initiator_(is_initiator) {}

SignalTrace SimTraceSource::capture(int attempt, size_t n_samples) {
  uint64_t w = mix_seed(session_seed_, mix_seed(kWindowStream, uint64_t(attempt)));

  DomainNoiseConfig domain = domain_;
  domain.seed = mix_seed(domain_.seed, w);
  // appliance identity stays put across attempts; its modulation moves on
  if (domain_.load_seed != 0)
    domain.load_window_seed = mix_seed(domain_.load_seed, mix_seed(kLoadStream, w));

  AdcConfig adc = adc_;
  adc.seed = mix_seed(adc_.seed, mix_seed(kAdcStream, w));

  double offset = 0.0;
  if (is_initiator_) {
    Rng lat(mix_seed(w, kLatencyStream));
    offset = lat.uniform(latency_lo, latency_hi);
  }
  double actual_rate = adc.nominal_rate * (1.0 + adc.skew_ppm / 1e6);
  double duration = offset + double(n_samples) / actual_rate + 0.001;
  MasterSignal master = synth_master(domain, duration);
  if (breaker_cutoff_hz > 0.0) master = apply_breaker_filter(master, breaker_cutoff_hz);
  last_signal_seconds = double(n_samples) / actual_rate;
  return observe(master, adc, offset, n_samples);
}

SignalTrace FixedTraceSource::capture(int, size_t n_samples) {
  if (trace_.samples.size() < n_samples)
    throw std::invalid_argument("FixedTraceSource: trace shorter than requested capture");
  SignalTrace out = trace_;
  out.samples.resize(n_samples);
  return out;
}

// ---- session state machines ----

PairingReport run_initiator(Channel& channel, TraceSource& source, const SessionParams& params,
                            BitSequence* extracted) {
  params.validate();
  Endpoint ep{channel, {}};
  ep.report.role = "initiator";

  InitParams init = parse_init(ep.expect(MsgType::init));
  if (init != to_init_params(params))
    throw ProtocolError("INIT: peer session parameters disagree with ours");

  const BlockCode code = build_code(params.code_n, params.code_k);
  const size_t n_samples = initiator_capture_samples(params);

  for (int attempt = 1; attempt <= params.max_attempts; ++attempt) {
    ep.report.attempts_used = attempt;
    SignalTrace trace = source.capture(attempt, n_samples);
    ep.report.timings.measure_seconds_per_attempt =
        double(n_samples) / trace.actual_rate;
    ep.report.timings.measure_seconds_total += ep.report.timings.measure_seconds_per_attempt;

    SppEstimate est = estimate_spp(trace, params.nominal_rate, params.sweep_radius,
                                   params.mains_hz, kAvgPeriods);
    ep.send(make_rate(uint32_t(est.spp)));
    auto rate_b = int(parse_rate(ep.expect(MsgType::rate)));
    int c_l = negotiate_rate(est.spp, rate_b);

    SignalTrace aligned = resample(trace, est.spp, c_l);
    std::span<const uint16_t> preamble(aligned.samples.data(), size_t(c_l));
    ep.send(make_preamble(preamble));

    auto rows = slice_periods(aligned, size_t(c_l), size_t(params.n_p) + 2, 0);
    auto [bits, schedule] =
        generate_sequence(rows, params.n_p, params.n_b, params.key_len, ExtractRole::indexer);
    ep.send(make_indices(schedule));

    HelperData helper = helper_data(code, bits);
    ep.send(make_helper(helper));
    if (extracted) *extracted = bits;

    BitSequence final_bits = bits;
    truncate_to_blocks(final_bits, code);
    auto digest = sha256(pack_bits(final_bits.bits));

    auto confirm = parse_confirm(ep.expect(MsgType::confirm));
    bool ok = confirm == digest;
    ep.send(make_result(ok));
    if (ok) {
      ep.report.success = true;
      ep.report.final_key_bits = final_bits.bits;
      break;
    }
  }
  return std::move(ep.report);
}

PairingReport run_responder(Channel& channel, TraceSource& source, const SessionParams& params,
                            BitSequence* extracted) {
  params.validate();
  Endpoint ep{channel, {}};
  ep.report.role = "responder";

  ep.send(make_init(to_init_params(params)));

  const BlockCode code = build_code(params.code_n, params.code_k);
  const size_t n_samples = responder_capture_samples(params);
  const size_t blocks = size_t(params.key_len) / size_t(params.code_n);

  for (int attempt = 1; attempt <= params.max_attempts; ++attempt) {
    ep.report.attempts_used = attempt;
    SignalTrace trace = source.capture(attempt, n_samples);
    ep.report.timings.measure_seconds_per_attempt = double(n_samples) / trace.actual_rate;
    ep.report.timings.measure_seconds_total += ep.report.timings.measure_seconds_per_attempt;

    SppEstimate est = estimate_spp(trace, params.nominal_rate, params.sweep_radius,
                                   params.mains_hz, kAvgPeriods);
    auto rate_a = int(parse_rate(ep.expect(MsgType::rate)));
    ep.send(make_rate(uint32_t(est.spp)));
    int c_l = negotiate_rate(rate_a, est.spp);

    SignalTrace aligned = resample(trace, est.spp, c_l);
    auto preamble = parse_preamble(ep.expect(MsgType::preamble));
    if (preamble.size() != size_t(c_l))
      throw ProtocolError("PREAMBLE: length disagrees with negotiated rate");

    SyncResult sync = sync_offset(preamble, aligned, size_t(params.search_span_periods) * size_t(c_l));
    auto rows =
        slice_periods(aligned, size_t(c_l), size_t(params.n_p) + 2, sync.offset_samples);

    IndexSchedule schedule =
        parse_indices(ep.expect(MsgType::indices), size_t(params.n_p), size_t(params.n_b));
    auto [bits, echoed] = generate_sequence(rows, params.n_p, params.n_b, params.key_len,
                                            ExtractRole::follower, &schedule);
    (void)echoed;
    if (extracted) *extracted = bits;

    HelperData helper = parse_helper(ep.expect(MsgType::helper), params.code_n, blocks);
    BitSequence final_bits = reconcile(code, bits, helper);
    ep.send(make_confirm(sha256(pack_bits(final_bits.bits))));

    bool ok = parse_result(ep.expect(MsgType::result));
    if (ok) {
      ep.report.success = true;
      ep.report.final_key_bits = final_bits.bits;
      ep.report.pre_reconciliation_agreement =
          agreement(std::span(bits.bits).first(final_bits.bits.size()), final_bits.bits);
      break;
    }
  }
  return std::move(ep.report);
}

PairOutcome run_pair_inprocess(const DomainNoiseConfig& domain_a,
                               const DomainNoiseConfig& domain_b, const AdcConfig& adc_a,
                               const AdcConfig& adc_b, const SessionParams& params,
                               uint64_t session_seed, double responder_breaker_cutoff_hz) {
  auto [chan_a, chan_b] = make_channel_pair();
  SimTraceSource source_a(domain_a, adc_a, session_seed, true);
  SimTraceSource source_b(domain_b, adc_b, session_seed, false);
  source_b.breaker_cutoff_hz = responder_breaker_cutoff_hz;

  BitSequence bits_a, bits_b;
  // a throwing endpoint closes its channel so the peer unblocks too
  auto fut_a = std::async(std::launch::async, [&] {
    try {
      return run_initiator(*chan_a, source_a, params, &bits_a);
    } catch (...) {
      chan_a->close();
      throw;
    }
  });
  auto fut_b = std::async(std::launch::async, [&] {
    try {
      return run_responder(*chan_b, source_b, params, &bits_b);
    } catch (...) {
      chan_b->close();
      throw;
    }
  });

  PairOutcome out;
  out.initiator = fut_a.get();
  out.responder = fut_b.get();
  out.success = out.initiator.success && out.responder.success;
  size_t n = std::min(bits_a.bits.size(), bits_b.bits.size());
  out.pre_reconciliation_agreement =
      agreement(std::span(bits_a.bits).first(n), std::span(bits_b.bits).first(n));
  return out;
}

}  // namespace voltkey
