#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

#include "donorchain/common/bytes.hpp"

// SHA-256 and Ed25519 over libsodium. Keys are 32 bytes on the wire; the
// expanded 64-byte secret never leaves SigningKey.
namespace donorchain::crypto {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
inline Digest sha256(std::string_view s) { return sha256(as_bytes(s)); }

inline constexpr Digest kZeroDigest{};

struct PublicKey {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const { return to_hex(bytes); }
  static PublicKey from_hex(std::string_view hex);

  auto operator<=>(const PublicKey&) const = default;
};

class SigningKey {
 public:
  SigningKey(const SigningKey&) = delete;
  SigningKey& operator=(const SigningKey&) = delete;
  SigningKey(SigningKey&& other) noexcept;
  SigningKey& operator=(SigningKey&& other) noexcept;
  ~SigningKey();

  // 32-byte seed, hex encoded. Only the key holder calls this (key files).
  std::string seed_hex() const;
  static SigningKey from_seed_hex(std::string_view hex);

  PublicKey public_key() const;

 private:
  friend struct KeyPair;
  friend Bytes sign(const SigningKey&, ByteView);
  SigningKey() = default;

  std::array<std::uint8_t, 64> secret_{};
};

struct KeyPair {
  PublicKey public_key;
  SigningKey signing_key;

  static KeyPair generate();
  static KeyPair from_seed(std::span<const std::uint8_t, 32> seed);
};

inline constexpr std::size_t kSignatureSize = 64;

Bytes sign(const SigningKey& key, ByteView message);
bool verify(const PublicKey& key, ByteView message, ByteView signature);

void random_fill(std::span<std::uint8_t> out);
std::string random_hex(std::size_t bytes);

}  // namespace donorchain::crypto
