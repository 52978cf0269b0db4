#include <doctest.h>

#include <stdexcept>
#include <voltkey/digest.hpp>

using namespace voltkey;

TEST_CASE("sha256 known answers") {
  std::vector<uint8_t> abc = {'a', 'b', 'c'};
  CHECK(to_hex(sha256(abc)) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::vector<uint8_t> empty;
  CHECK(to_hex(sha256(empty)) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  std::vector<uint8_t> msg(1000, uint8_t('a'));
  // a thousand 'a's, cross-checked with a second implementation
  CHECK(to_hex(sha256(msg)) ==
        "41edece42d63e8d9bf515a9ba6932e1c20cbc9f5a5d134645adb5db1b9737ea3");
}

TEST_CASE("bit packing is msb first with zero padding") {
  std::vector<uint8_t> bits = {1, 0, 1, 1, 0, 0, 1, 0, 1, 1};
  CHECK(pack_bits(bits) == std::vector<uint8_t>{0xB2, 0xC0});
  std::vector<uint8_t> one = {1};
  CHECK(pack_bits(one) == std::vector<uint8_t>{0x80});
  std::vector<uint8_t> none;
  CHECK(pack_bits(none).empty());
}

TEST_CASE("hex round trip") {
  std::vector<uint8_t> bytes = {0x00, 0xff, 0x5a, 0x0c};
  CHECK(to_hex(bytes) == "00ff5a0c");
  CHECK(from_hex("00ff5a0c") == bytes);
  CHECK(from_hex("00FF5A0C") == bytes);
  CHECK(from_hex("").empty());
  CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
}
