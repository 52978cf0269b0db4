#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "voltkey/bitext.hpp"
#include "voltkey/recon.hpp"

namespace voltkey {

// Frame truncated or length field inconsistent with the buffer.
struct FramingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-framed but semantically invalid: unknown type, wrong payload size,
// or a message arriving out of protocol order.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MsgType : uint8_t {
  init = 0x01,
  rate = 0x02,
  preamble = 0x03,
  indices = 0x04,
  helper = 0x05,
  confirm = 0x06,
  result = 0x07,
};

const char* msg_type_name(MsgType t);

struct WireMessage {
  MsgType type;
  std::vector<uint8_t> payload;

  bool operator==(const WireMessage&) const = default;
};

// Frame: 4-byte big-endian length of (type tag + payload), 1-byte type tag,
// payload bytes.
std::vector<uint8_t> encode_message(const WireMessage& msg);

// Decodes one complete frame; the buffer must hold exactly one message.
WireMessage decode_message(std::span<const uint8_t> bytes);

// Session parameters carried by INIT, fixed 15-byte big-endian layout:
// u32 nominal rate (Hz), u16 n_p, u16 n_b, u16 key_len, u8 code n, u8 code k,
// u16 sweep radius, u8 max attempts.
struct InitParams {
  uint32_t nominal_rate_hz = 0;
  uint16_t n_p = 0;
  uint16_t n_b = 0;
  uint16_t key_len = 0;
  uint8_t code_n = 0;
  uint8_t code_k = 0;
  uint16_t sweep_radius = 0;
  uint8_t max_attempts = 0;

  bool operator==(const InitParams&) const = default;
};

WireMessage make_init(const InitParams& params);
InitParams parse_init(const WireMessage& msg);

WireMessage make_rate(uint32_t spp);
uint32_t parse_rate(const WireMessage& msg);

WireMessage make_preamble(std::span<const uint16_t> samples);
std::vector<uint16_t> parse_preamble(const WireMessage& msg);

WireMessage make_indices(const IndexSchedule& schedule);
IndexSchedule parse_indices(const WireMessage& msg, size_t n_p, size_t n_b);

// HELPER payload is the block offsets as a packed bit stream, first bit in
// the MSB; pad bits must be zero. The receiver knows the block count from
// its session parameters.
WireMessage make_helper(const HelperData& helper);
HelperData parse_helper(const WireMessage& msg, int code_n, size_t blocks);

WireMessage make_confirm(const std::array<uint8_t, 32>& digest);
std::array<uint8_t, 32> parse_confirm(const WireMessage& msg);

WireMessage make_result(bool success);
bool parse_result(const WireMessage& msg);

}  // namespace voltkey
