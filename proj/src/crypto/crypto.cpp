#include "donorchain/crypto/crypto.hpp"

#include <sodium.h>

#include <cstring>

#include "donorchain/common/error.hpp"

namespace donorchain::crypto {

namespace {

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

}  // namespace

Digest sha256(ByteView data) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

PublicKey PublicKey::from_hex(std::string_view hex) {
  auto raw = donorchain::from_hex(hex);
  if (raw.size() != 32) throw Error(Errc::Decode, "public key must be 32 bytes");
  PublicKey key;
  std::memcpy(key.bytes.data(), raw.data(), 32);
  return key;
}

SigningKey::SigningKey(SigningKey&& other) noexcept : secret_(other.secret_) {
  sodium_memzero(other.secret_.data(), other.secret_.size());
}

SigningKey& SigningKey::operator=(SigningKey&& other) noexcept {
  if (this != &other) {
    secret_ = other.secret_;
    sodium_memzero(other.secret_.data(), other.secret_.size());
  }
  return *this;
}

SigningKey::~SigningKey() { sodium_memzero(secret_.data(), secret_.size()); }

std::string SigningKey::seed_hex() const {
  std::array<std::uint8_t, 32> seed{};
  crypto_sign_ed25519_sk_to_seed(seed.data(), secret_.data());
  auto out = to_hex(seed);
  sodium_memzero(seed.data(), seed.size());
  return out;
}

SigningKey SigningKey::from_seed_hex(std::string_view hex) {
  auto raw = donorchain::from_hex(hex);
  if (raw.size() != 32) throw Error(Errc::Decode, "signing key seed must be 32 bytes");
  auto pair = KeyPair::from_seed(std::span<const std::uint8_t, 32>(raw.data(), 32));
  sodium_memzero(raw.data(), raw.size());
  return std::move(pair.signing_key);
}

PublicKey SigningKey::public_key() const {
  PublicKey pk;
  crypto_sign_ed25519_sk_to_pk(pk.bytes.data(), secret_.data());
  return pk;
}

KeyPair KeyPair::generate() {
  ensure_sodium();
  KeyPair pair{PublicKey{}, SigningKey{}};
  crypto_sign_keypair(pair.public_key.bytes.data(), pair.signing_key.secret_.data());
  return pair;
}

KeyPair KeyPair::from_seed(std::span<const std::uint8_t, 32> seed) {
  ensure_sodium();
  KeyPair pair{PublicKey{}, SigningKey{}};
  crypto_sign_seed_keypair(pair.public_key.bytes.data(), pair.signing_key.secret_.data(),
                           seed.data());
  return pair;
}

Bytes sign(const SigningKey& key, ByteView message) {
  ensure_sodium();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.secret_.data());
  return sig;
}

bool verify(const PublicKey& key, ByteView message, ByteView signature) {
  ensure_sodium();
  if (signature.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                     key.bytes.data()) == 0;
}

void random_fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

std::string random_hex(std::size_t bytes) {
  Bytes buf(bytes);
  random_fill(buf);
  return to_hex(buf);
}

}  // namespace donorchain::crypto
