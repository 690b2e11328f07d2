#include <random>

#include "doctest.h"
#include "donorchain/crypto/crypto.hpp"

using namespace donorchain;

TEST_CASE("sha256 matches published vectors") {
  CHECK(to_hex(crypto::sha256(std::string_view("abc"))) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(crypto::sha256(std::string_view(""))) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("sign then verify") {
  auto alice = crypto::KeyPair::generate();
  auto bob = crypto::KeyPair::generate();
  auto msg = as_bytes("organ offer 42");
  auto sig = crypto::sign(alice.signing_key, msg);
  CHECK(sig.size() == crypto::kSignatureSize);
  CHECK(crypto::verify(alice.public_key, msg, sig));
  CHECK_FALSE(crypto::verify(bob.public_key, msg, sig));
  CHECK(alice.signing_key.public_key() == alice.public_key);
}

TEST_CASE("seed round-trip reproduces the key pair") {
  auto pair = crypto::KeyPair::generate();
  auto restored = crypto::SigningKey::from_seed_hex(pair.signing_key.seed_hex());
  CHECK(restored.public_key() == pair.public_key);
  auto msg = as_bytes("x");
  CHECK(crypto::verify(pair.public_key, msg, crypto::sign(restored, msg)));
}

TEST_CASE("single bit flips in the message are rejected") {
  std::mt19937 rng(2024);
  auto pair = crypto::KeyPair::generate();
  int accepted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Bytes msg(1 + rng() % 200);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
    auto sig = crypto::sign(pair.signing_key, msg);
    REQUIRE(crypto::verify(pair.public_key, msg, sig));
    auto bit = rng() % (msg.size() * 8);
    msg[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    accepted += crypto::verify(pair.public_key, msg, sig) ? 1 : 0;
  }
  CHECK(accepted == 0);
}

TEST_CASE("forgery acceptance over 10^4 random flips is zero") {
  std::mt19937 rng(99);
  auto pair = crypto::KeyPair::generate();
  Bytes msg(64);
  for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
  auto sig = crypto::sign(pair.signing_key, msg);
  int accepted = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    auto tampered_msg = msg;
    auto tampered_sig = sig;
    if (trial % 2 == 0) {
      auto bit = rng() % (tampered_msg.size() * 8);
      tampered_msg[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    } else {
      auto bit = rng() % (tampered_sig.size() * 8);
      tampered_sig[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
    accepted += crypto::verify(pair.public_key, tampered_msg, tampered_sig) ? 1 : 0;
  }
  CHECK(accepted == 0);
}

TEST_CASE("malformed signature length is rejected") {
  auto pair = crypto::KeyPair::generate();
  CHECK_FALSE(crypto::verify(pair.public_key, as_bytes("m"), Bytes(10)));
}
