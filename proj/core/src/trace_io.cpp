#include "voltkey/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voltkey/digest.hpp"
#include "voltkey/wire.hpp"

namespace voltkey {

namespace {

constexpr char kMagic[8] = {'V', 'K', 'T', 'R', 'A', 'C', 'E', '1'};
constexpr size_t kHeaderSize = 8 + 4 + 1 + 8;

[[noreturn]] void fail(TraceIoErrorKind kind, const std::string& what) {
  throw TraceIoError(kind, what);
}

void check_resolution(int bits) {
  if (bits < 8 || bits > 16)
    fail(TraceIoErrorKind::malformed_header,
         "resolution must be 8..16 bits, got " + std::to_string(bits));
}

void check_sample(uint32_t value, int bits) {
  if (value >> bits)
    fail(TraceIoErrorKind::sample_out_of_range,
         "sample " + std::to_string(value) + " exceeds " + std::to_string(bits) + " bits");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(TraceIoErrorKind::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(TraceIoErrorKind::io, "read error on " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(TraceIoErrorKind::io, "cannot create " + path);
  out.write(data.data(), std::streamsize(data.size()));
  if (!out) fail(TraceIoErrorKind::io, "write error on " + path);
}

void write_binary(const std::string& path, const SignalTrace& trace) {
  std::string out;
  out.reserve(kHeaderSize + trace.samples.size() * 2);
  out.append(kMagic, sizeof(kMagic));
  uint32_t rate = uint32_t(std::llround(trace.nominal_rate));
  for (int i = 0; i < 4; ++i) out.push_back(char(rate >> (8 * i)));
  out.push_back(char(trace.resolution_bits));
  uint64_t count = trace.samples.size();
  for (int i = 0; i < 8; ++i) out.push_back(char(count >> (8 * i)));
  for (uint16_t s : trace.samples) {
    check_sample(s, trace.resolution_bits);
    out.push_back(char(s & 0xff));
    out.push_back(char(s >> 8));
  }
  write_file(path, out);
}

SignalTrace read_binary(const std::string& path) {
  std::string data = read_file(path);
  if (data.size() < kHeaderSize)
    fail(TraceIoErrorKind::malformed_header, "file shorter than header");
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    fail(TraceIoErrorKind::malformed_header, "bad magic");
  const auto* p = reinterpret_cast<const uint8_t*>(data.data());
  uint32_t rate = 0;
  for (int i = 0; i < 4; ++i) rate |= uint32_t(p[8 + i]) << (8 * i);
  int bits = p[12];
  check_resolution(bits);
  if (rate == 0) fail(TraceIoErrorKind::malformed_header, "zero sample rate");
  uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= uint64_t(p[13 + i]) << (8 * i);
  uint64_t want = kHeaderSize + count * 2;
  if (data.size() < want)
    fail(TraceIoErrorKind::truncated_payload,
         "header promises " + std::to_string(count) + " samples, payload holds " +
             std::to_string((data.size() - kHeaderSize) / 2));
  if (data.size() > want) fail(TraceIoErrorKind::trailing_data, "bytes past declared payload");

  SignalTrace trace;
  trace.nominal_rate = rate;
  trace.actual_rate = rate;
  trace.start_offset = 0.0;
  trace.gain_used = 1.0;
  trace.resolution_bits = bits;
  trace.samples.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint16_t s = uint16_t(p[kHeaderSize + 2 * i] | (uint16_t(p[kHeaderSize + 2 * i + 1]) << 8));
    check_sample(s, bits);
    trace.samples.push_back(s);
  }
  return trace;
}

void write_csv(const std::string& path, const SignalTrace& trace) {
  std::string out;
  out.reserve(trace.samples.size() * 6 + 32);
  out += "# rate=" + std::to_string(int64_t(std::llround(trace.nominal_rate))) + "\n";
  out += "# bits=" + std::to_string(trace.resolution_bits) + "\n";
  for (uint16_t s : trace.samples) {
    check_sample(s, trace.resolution_bits);
    out += std::to_string(s);
    out += '\n';
  }
  write_file(path, out);
}

SignalTrace read_csv(const std::string& path) {
  std::string data = read_file(path);
  SignalTrace trace;
  trace.start_offset = 0.0;
  trace.gain_used = 1.0;
  trace.resolution_bits = 16;
  bool have_rate = false;
  bool have_bits = false;

  size_t pos = 0;
  int line_no = 0;
  while (pos < data.size()) {
    size_t eol = data.find('\n', pos);
    if (eol == std::string::npos) eol = data.size();
    std::string line = data.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      long long v = 0;
      if (std::sscanf(line.c_str(), "# rate=%lld", &v) == 1) {
        if (v <= 0) fail(TraceIoErrorKind::malformed_header, "non-positive rate");
        trace.nominal_rate = double(v);
        trace.actual_rate = double(v);
        have_rate = true;
      } else if (std::sscanf(line.c_str(), "# bits=%lld", &v) == 1) {
        check_resolution(int(v));
        trace.resolution_bits = int(v);
        have_bits = true;
      }
      // other comment lines pass through unrecognized
      continue;
    }
    char* end = nullptr;
    long long v = std::strtoll(line.c_str(), &end, 10);
    if (end == line.c_str() || *end != '\0' || v < 0)
      fail(TraceIoErrorKind::malformed_sample,
           "line " + std::to_string(line_no) + ": not a sample value: \"" + line + "\"");
    if (v > 0xffff || (have_bits && (v >> trace.resolution_bits)))
      fail(TraceIoErrorKind::sample_out_of_range,
           "line " + std::to_string(line_no) + ": sample " + std::to_string(v) +
               " exceeds resolution");
    trace.samples.push_back(uint16_t(v));
  }
  if (!have_rate) fail(TraceIoErrorKind::malformed_header, "missing \"# rate=\" line");
  for (uint16_t s : trace.samples) check_sample(s, trace.resolution_bits);
  return trace;
}

// fixed-format JSON emission keeps serialization deterministic
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (uint8_t(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string bits_to_hex(const std::vector<uint8_t>& bits) {
  return to_hex(pack_bits(bits));
}

std::vector<uint8_t> hex_to_bits(const std::string& hex, size_t n_bits) {
  auto bytes = from_hex(hex);
  if (bytes.size() * 8 < n_bits)
    throw std::invalid_argument("key_hex shorter than key_bits promises");
  std::vector<uint8_t> bits;
  bits.reserve(n_bits);
  for (size_t i = 0; i < n_bits; ++i) bits.push_back((bytes[i / 8] >> (7 - i % 8)) & 1);
  return bits;
}

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end())
    throw std::invalid_argument(std::string("report is missing field \"") + name + "\"");
  return *it;
}

}  // namespace

TraceFormat detect_trace_format(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(TraceIoErrorKind::io, "cannot open " + path);
  char head[8] = {};
  in.read(head, sizeof(head));
  if (in.gcount() == 8 && std::memcmp(head, kMagic, 8) == 0) return TraceFormat::binary;
  return TraceFormat::csv;
}

void write_trace(const std::string& path, const SignalTrace& trace, TraceFormat format) {
  check_resolution(trace.resolution_bits);
  if (trace.nominal_rate <= 0) fail(TraceIoErrorKind::malformed_header, "non-positive rate");
  if (format == TraceFormat::binary)
    write_binary(path, trace);
  else
    write_csv(path, trace);
}

SignalTrace read_trace(const std::string& path, TraceFormat format) {
  return format == TraceFormat::binary ? read_binary(path) : read_csv(path);
}

SignalTrace read_trace(const std::string& path) {
  return read_trace(path, detect_trace_format(path));
}

std::string to_json(const PairingReport& report) {
  std::string out = "{";
  out += "\"type\":\"pairing\"";
  out += ",\"role\":" + quote(report.role);
  out += ",\"success\":";
  out += report.success ? "true" : "false";
  out += ",\"attempts_used\":" + std::to_string(report.attempts_used);
  out += ",\"pre_reconciliation_agreement\":";
  out += report.pre_reconciliation_agreement ? fmt(*report.pre_reconciliation_agreement) : "null";
  out += ",\"key_bits\":" + std::to_string(report.final_key_bits.size());
  out += ",\"final_key_hex\":" + quote(bits_to_hex(report.final_key_bits));
  out += ",\"confirmation_method\":" + quote(report.confirmation_method);
  out += ",\"timings\":{";
  out += "\"measure_seconds_per_attempt\":" + fmt(report.timings.measure_seconds_per_attempt);
  out += ",\"measure_seconds_total\":" + fmt(report.timings.measure_seconds_total);
  out += ",\"bytes_sent\":" + std::to_string(report.timings.bytes_sent);
  out += ",\"bytes_received\":" + std::to_string(report.timings.bytes_received);
  out += "}";
  out += ",\"transcript\":[";
  for (size_t i = 0; i < report.transcript.size(); ++i) {
    const auto& entry = report.transcript[i];
    if (i) out += ',';
    out += "{\"dir\":";
    out += entry.sent ? "\"send\"" : "\"recv\"";
    out += ",\"msg\":" + quote(msg_type_name(entry.msg.type));
    out += ",\"frame_hex\":" + quote(to_hex(encode_message(entry.msg)));
    out += "}";
  }
  out += "]}";
  return out;
}

std::string to_json(const AttackReport& report) {
  std::string out = "{";
  out += "\"type\":\"attack\"";
  out += ",\"scenario\":" + quote(report.scenario);
  out += ",\"trials\":" + std::to_string(report.trials);
  out += ",\"mean_agreement\":" + fmt(report.mean_agreement);
  out += ",\"max_agreement\":" + fmt(report.max_agreement);
  out += ",\"any_success\":";
  out += report.any_success ? "true" : "false";
  out += ",\"histogram\":[";
  for (size_t i = 0; i < report.histogram.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(report.histogram[i]);
  }
  out += "],\"rates\":[";
  for (size_t i = 0; i < report.rates.size(); ++i) {
    if (i) out += ',';
    out += fmt(report.rates[i]);
  }
  out += "]}";
  return out;
}

PairingReport pairing_report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (field(j, "type").get<std::string>() != "pairing")
    throw std::invalid_argument("not a pairing report");
  PairingReport report;
  report.role = field(j, "role").get<std::string>();
  report.success = field(j, "success").get<bool>();
  report.attempts_used = field(j, "attempts_used").get<int>();
  const auto& pre = field(j, "pre_reconciliation_agreement");
  if (!pre.is_null()) report.pre_reconciliation_agreement = pre.get<double>();
  size_t key_bits = field(j, "key_bits").get<size_t>();
  report.final_key_bits = hex_to_bits(field(j, "final_key_hex").get<std::string>(), key_bits);
  report.confirmation_method = field(j, "confirmation_method").get<std::string>();
  const auto& t = field(j, "timings");
  report.timings.measure_seconds_per_attempt =
      field(t, "measure_seconds_per_attempt").get<double>();
  report.timings.measure_seconds_total = field(t, "measure_seconds_total").get<double>();
  report.timings.bytes_sent = field(t, "bytes_sent").get<uint64_t>();
  report.timings.bytes_received = field(t, "bytes_received").get<uint64_t>();
  for (const auto& e : field(j, "transcript")) {
    TranscriptEntry entry;
    std::string dir = field(e, "dir").get<std::string>();
    if (dir != "send" && dir != "recv")
      throw std::invalid_argument("transcript dir must be send or recv");
    entry.sent = dir == "send";
    entry.msg = decode_message(from_hex(field(e, "frame_hex").get<std::string>()));
    if (field(e, "msg").get<std::string>() != msg_type_name(entry.msg.type))
      throw std::invalid_argument("transcript msg label disagrees with frame contents");
    report.transcript.push_back(std::move(entry));
  }
  return report;
}

AttackReport attack_report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (field(j, "type").get<std::string>() != "attack")
    throw std::invalid_argument("not an attack report");
  AttackReport report;
  report.scenario = field(j, "scenario").get<std::string>();
  report.trials = field(j, "trials").get<int>();
  report.mean_agreement = field(j, "mean_agreement").get<double>();
  report.max_agreement = field(j, "max_agreement").get<double>();
  report.any_success = field(j, "any_success").get<bool>();
  report.histogram = field(j, "histogram").get<std::vector<int>>();
  report.rates = field(j, "rates").get<std::vector<double>>();
  return report;
}

}  // namespace voltkey
