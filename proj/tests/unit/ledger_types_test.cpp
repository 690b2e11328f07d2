#include <random>

#include "doctest.h"
#include "donorchain/ledger/types.hpp"
#include "ledger_fixtures.hpp"

using namespace donorchain;
using namespace donorchain::ledger;

TEST_CASE("header hash equals SHA-256 of the 72-byte layout") {
  BlockHeader genesis;
  for (int i = 0; i < 32; ++i) genesis.data_hash[i] = static_cast<std::uint8_t>(i);
  // Frozen from Python hashlib over struct.pack('>Q', 0) + 32 zero bytes + bytes(range(32)).
  CHECK(to_hex(compute_block_hash(genesis)) == "fbe040e6b6775756cc534ef8f88fb252e2a4b2cb1abeedaccdb935199ef14a51");

  BlockHeader h7;
  h7.number = 7;
  h7.prev_hash.fill(0xab);
  h7.data_hash.fill(0x11);
  CHECK(to_hex(compute_block_hash(h7)) == "37bc6085beba79246b769ec09e06f34d8157879485af80cd5c5b07300ce4c24e");
  CHECK(compute_block_hash(h7) == compute_block_hash(h7));
}

TEST_CASE("empty transaction list hashes the u32 count") {
  // sha256(00 00 00 00), frozen from hashlib.
  CHECK(to_hex(compute_data_hash({})) == "df3f619804a92fdb4057192dc43dd748ea778adc52bc498ce80524c014b81119");
}

TEST_CASE("any single bit flip of data_hash changes the header digest") {
  std::mt19937 rng(17);
  BlockHeader h;
  h.number = 3;
  for (auto& b : h.data_hash) b = static_cast<std::uint8_t>(rng());
  const auto base = compute_block_hash(h);
  for (int i = 0; i < 100; ++i) {
    auto flipped = h;
    auto bit = rng() % 256;
    flipped.data_hash[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK(compute_block_hash(flipped) != base);
  }
}

TEST_CASE("transaction and block encodings round-trip") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Transaction> txs;
    for (int t = 0; t < 1 + static_cast<int>(rng() % 4); ++t) {
      auto tx = fixtures::make_tx("tx" + std::to_string(rng()),
                                  {fixtures::read("a", StateVersion{rng() % 9, rng() % 3}), fixtures::read("b", std::nullopt)},
                                  {fixtures::put("c", std::to_string(rng())), fixtures::del("d")},
                                  {"x", std::string(rng() % 5, 'y')});
      if (rng() % 2) tx.event = ChaincodeEvent{"RecordAdded", "{\"k\":1}"};
      tx.endorsements.push_back({"gov", identity::Signature{"peer0", Bytes(64, 7)}});
      tx.client_signature = identity::Signature{"client", Bytes(64, 9)};
      CHECK(Transaction::from_bytes(tx.to_bytes()) == tx);
      txs.push_back(tx);
    }
    auto block = Block::assemble(rng() % 100, crypto::sha256(std::string_view("p")), txs, 12345);
    block.metadata.validation_flags.assign(txs.size(), ValidationFlag::MVCCConflict);
    CHECK(Block::from_bytes(block.to_bytes()) == block);
  }
}

TEST_CASE("canonical rwset bytes ignore insertion order") {
  ReadWriteSet a;
  a.reads = {{"k2", std::nullopt}, {"k1", StateVersion{1, 0}}};
  a.writes = {{"w2", "v"}, {"w1", std::nullopt}};
  ReadWriteSet b;
  b.reads = {{"k1", StateVersion{1, 0}}, {"k2", std::nullopt}};
  b.writes = {{"w1", std::nullopt}, {"w2", "v"}};
  CHECK(a.canonical_bytes() == b.canonical_bytes());
  b.writes[1].value = "other";
  CHECK(a.canonical_bytes() != b.canonical_bytes());
}

TEST_CASE("state versions order lexicographically") {
  CHECK(StateVersion{3, 0} < StateVersion{5, 2});
  CHECK(StateVersion{5, 1} < StateVersion{5, 2});
  CHECK(StateVersion{4, 9} < StateVersion{5, 0});
}
