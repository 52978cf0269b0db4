#include "voltkey/wire.hpp"

#include <cstring>

namespace voltkey {

namespace {

void put_u16be(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

uint16_t get_u16be(const uint8_t* p) { return uint16_t(p[0] << 8 | p[1]); }

uint32_t get_u32be(const uint8_t* p) {
  return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | uint32_t(p[3]);
}

void put_u16le(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

uint16_t get_u16le(const uint8_t* p) { return uint16_t(p[1] << 8 | p[0]); }

void require_payload(const WireMessage& msg, size_t want, const char* what) {
  if (msg.payload.size() != want)
    throw ProtocolError(std::string(what) + ": bad payload size");
}

constexpr size_t kInitBytes = 15;

}  // namespace

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::init: return "INIT";
    case MsgType::rate: return "RATE";
    case MsgType::preamble: return "PREAMBLE";
    case MsgType::indices: return "INDICES";
    case MsgType::helper: return "HELPER";
    case MsgType::confirm: return "CONFIRM";
    case MsgType::result: return "RESULT";
  }
  return "UNKNOWN";
}

std::vector<uint8_t> encode_message(const WireMessage& msg) {
  std::vector<uint8_t> out;
  out.reserve(5 + msg.payload.size());
  put_u32be(out, uint32_t(1 + msg.payload.size()));
  out.push_back(uint8_t(msg.type));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

WireMessage decode_message(std::span<const uint8_t> bytes) {
  if (bytes.size() < 5) throw FramingError("decode_message: frame shorter than header");
  uint32_t len = get_u32be(bytes.data());
  if (len < 1) throw FramingError("decode_message: zero-length frame");
  if (bytes.size() != size_t(4) + len)
    throw FramingError("decode_message: length field does not match buffer");
  uint8_t tag = bytes[4];
  if (tag < uint8_t(MsgType::init) || tag > uint8_t(MsgType::result))
    throw ProtocolError("decode_message: unknown message type");
  WireMessage msg;
  msg.type = MsgType(tag);
  msg.payload.assign(bytes.begin() + 5, bytes.end());
  return msg;
}

WireMessage make_init(const InitParams& p) {
  WireMessage msg{MsgType::init, {}};
  msg.payload.reserve(kInitBytes);
  put_u32be(msg.payload, p.nominal_rate_hz);
  put_u16be(msg.payload, p.n_p);
  put_u16be(msg.payload, p.n_b);
  put_u16be(msg.payload, p.key_len);
  msg.payload.push_back(p.code_n);
  msg.payload.push_back(p.code_k);
  put_u16be(msg.payload, p.sweep_radius);
  msg.payload.push_back(p.max_attempts);
  return msg;
}

InitParams parse_init(const WireMessage& msg) {
  require_payload(msg, kInitBytes, "INIT");
  const uint8_t* p = msg.payload.data();
  InitParams out;
  out.nominal_rate_hz = get_u32be(p);
  out.n_p = get_u16be(p + 4);
  out.n_b = get_u16be(p + 6);
  out.key_len = get_u16be(p + 8);
  out.code_n = p[10];
  out.code_k = p[11];
  out.sweep_radius = get_u16be(p + 12);
  out.max_attempts = p[14];
  return out;
}

WireMessage make_rate(uint32_t spp) {
  WireMessage msg{MsgType::rate, {}};
  put_u32be(msg.payload, spp);
  return msg;
}

uint32_t parse_rate(const WireMessage& msg) {
  require_payload(msg, 4, "RATE");
  return get_u32be(msg.payload.data());
}

WireMessage make_preamble(std::span<const uint16_t> samples) {
  WireMessage msg{MsgType::preamble, {}};
  msg.payload.reserve(samples.size() * 2);
  for (uint16_t s : samples) put_u16le(msg.payload, s);
  return msg;
}

std::vector<uint16_t> parse_preamble(const WireMessage& msg) {
  if (msg.payload.empty() || msg.payload.size() % 2)
    throw ProtocolError("PREAMBLE: payload must be a nonempty run of 16-bit samples");
  std::vector<uint16_t> out(msg.payload.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) out[i] = get_u16le(msg.payload.data() + 2 * i);
  return out;
}

WireMessage make_indices(const IndexSchedule& schedule) {
  WireMessage msg{MsgType::indices, {}};
  msg.payload.reserve(schedule.entries.size() * 2);
  for (uint16_t e : schedule.entries) put_u16le(msg.payload, e);
  return msg;
}

IndexSchedule parse_indices(const WireMessage& msg, size_t n_p, size_t n_b) {
  if (msg.payload.size() != n_p * n_b * 2)
    throw ProtocolError("INDICES: payload size does not match n_p * n_b");
  IndexSchedule out;
  out.n_p = n_p;
  out.n_b = n_b;
  out.entries.resize(n_p * n_b);
  for (size_t i = 0; i < out.entries.size(); ++i)
    out.entries[i] = get_u16le(msg.payload.data() + 2 * i);
  return out;
}

WireMessage make_helper(const HelperData& helper) {
  WireMessage msg{MsgType::helper, {}};
  size_t total_bits = helper.blocks.size() * size_t(helper.n);
  msg.payload.assign((total_bits + 7) / 8, 0);
  size_t bit = 0;
  for (uint8_t block : helper.blocks) {
    for (int i = helper.n - 1; i >= 0; --i, ++bit) {
      if ((block >> i) & 1) msg.payload[bit / 8] |= uint8_t(0x80u >> (bit % 8));
    }
  }
  return msg;
}

HelperData parse_helper(const WireMessage& msg, int code_n, size_t blocks) {
  size_t total_bits = blocks * size_t(code_n);
  if (msg.payload.size() != (total_bits + 7) / 8)
    throw ProtocolError("HELPER: payload size does not match block count");
  HelperData out;
  out.n = code_n;
  out.blocks.resize(blocks);
  size_t bit = 0;
  for (size_t b = 0; b < blocks; ++b) {
    uint8_t word = 0;
    for (int i = 0; i < code_n; ++i, ++bit) {
      uint8_t v = (msg.payload[bit / 8] >> (7 - bit % 8)) & 1;
      word = uint8_t(word << 1 | v);
    }
    out.blocks[b] = word;
  }
  for (; bit < msg.payload.size() * 8; ++bit)
    if ((msg.payload[bit / 8] >> (7 - bit % 8)) & 1)
      throw ProtocolError("HELPER: nonzero padding bits");
  return out;
}

WireMessage make_confirm(const std::array<uint8_t, 32>& digest) {
  WireMessage msg{MsgType::confirm, {}};
  msg.payload.assign(digest.begin(), digest.end());
  return msg;
}

std::array<uint8_t, 32> parse_confirm(const WireMessage& msg) {
  require_payload(msg, 32, "CONFIRM");
  std::array<uint8_t, 32> out{};
  std::memcpy(out.data(), msg.payload.data(), 32);
  return out;
}

WireMessage make_result(bool success) {
  WireMessage msg{MsgType::result, {}};
  msg.payload.push_back(success ? 1 : 0);
  return msg;
}

bool parse_result(const WireMessage& msg) {
  require_payload(msg, 1, "RESULT");
  if (msg.payload[0] > 1) throw ProtocolError("RESULT: flag must be 0 or 1");
  return msg.payload[0] == 1;
}

}  // namespace voltkey
