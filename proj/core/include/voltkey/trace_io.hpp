#pragma once

// Trace persistence (binary and CSV) and JSON report serialization.
// Binary layout, little-endian: magic "VKTRACE1", u32 sample rate, u8
// resolution bits, u64 sample count, then u16 samples.  CSV carries
// "# rate=<int>" and "# bits=<int>" comment lines followed by one decimal
// sample per line.
//
// JSON serializers emit a fixed field order with fixed numeric formatting,
// so serialize(parse(s)) == s holds byte for byte for any s they produced.

#include <stdexcept>
#include <string>

#include "voltkey/eval.hpp"
#include "voltkey/protocol.hpp"
#include "voltkey/signal.hpp"

namespace voltkey {

enum class TraceIoErrorKind {
  malformed_header,
  malformed_sample,
  sample_out_of_range,
  truncated_payload,
  trailing_data,
  io,
};

class TraceIoError : public std::runtime_error {
 public:
  TraceIoError(TraceIoErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  TraceIoErrorKind kind() const { return kind_; }

 private:
  TraceIoErrorKind kind_;
};

enum class TraceFormat { binary, csv };

// Picks binary when the file starts with the magic, csv otherwise.
TraceFormat detect_trace_format(const std::string& path);

// Persists samples, rate and resolution.  Alignment metadata (actual rate,
// start offset, gain) is session state and is not stored; read_trace fills
// those fields with neutral defaults.
void write_trace(const std::string& path, const SignalTrace& trace, TraceFormat format);
SignalTrace read_trace(const std::string& path, TraceFormat format);
SignalTrace read_trace(const std::string& path);

std::string to_json(const PairingReport& report);
std::string to_json(const AttackReport& report);
PairingReport pairing_report_from_json(const std::string& text);
AttackReport attack_report_from_json(const std::string& text);

}  // namespace voltkey
