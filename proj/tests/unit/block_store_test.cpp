#include <filesystem>

#include "doctest.h"
#include "donorchain/common/error.hpp"
#include "donorchain/ledger/block_store.hpp"
#include "ledger_fixtures.hpp"

using namespace donorchain;
using namespace donorchain::ledger;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "donorchain-tests";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

void build_chain(BlockStore& store, int blocks) {
  for (int n = 0; n < blocks; ++n) {
    auto tx = fixtures::make_tx("tx-" + std::to_string(n), {}, {fixtures::put("k" + std::to_string(n), "v")},
                                {"arg-" + std::to_string(n)});
    auto b = Block::assemble(store.height(), store.tip_hash(), {tx}, 1000 + n);
    b.metadata.validation_flags = {ValidationFlag::Valid};
    store.append(std::move(b));
  }
}

Errc append_error(BlockStore& store, Block b) {
  try {
    store.append(std::move(b));
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("append should have failed");
  return Errc::Decode;
}

}  // namespace

TEST_CASE("append genesis to an empty store") {
  BlockStore store;
  store.append(Block::assemble(0, crypto::kZeroDigest, {}, 0));
  CHECK(store.height() == 1);
  CHECK(store.tip_hash() == compute_block_hash(store.block(0).header));
}

TEST_CASE("append rejects gaps and wrong prev_hash") {
  BlockStore store;
  build_chain(store, 2);
  CHECK(append_error(store, Block::assemble(store.height() + 1, store.tip_hash(), {}, 0)) == Errc::ChainGap);
  auto bad_prev = store.tip_hash();
  bad_prev[0] ^= 1;
  CHECK(append_error(store, Block::assemble(store.height(), bad_prev, {}, 0)) == Errc::HashMismatch);
  CHECK(store.height() == 2);
}

TEST_CASE("verify_chain on an untampered ten-block chain") {
  BlockStore store;
  build_chain(store, 10);
  CHECK_FALSE(store.verify_chain().has_value());
}

TEST_CASE("tampering on disk is located by verify_chain") {
  auto path = temp_file("tamper.blocks");
  {
    BlockStore store(path);
    build_chain(store, 10);
  }
  SUBCASE("transaction argument in block 4") {
    auto blocks = BlockStore::read_file(path);
    blocks[4].transactions[0].args[0] = "forged";
    BlockStore::write_file(path, blocks);
    BlockStore reopened(path);
    CHECK(reopened.verify_chain() == std::optional<std::uint64_t>(4));
  }
  SUBCASE("stored prev_hash of block 7") {
    auto blocks = BlockStore::read_file(path);
    blocks[7].header.prev_hash[5] ^= 0x40;
    BlockStore::write_file(path, blocks);
    BlockStore reopened(path);
    CHECK(reopened.verify_chain() == std::optional<std::uint64_t>(7));
  }
  SUBCASE("untouched file reloads intact") {
    BlockStore reopened(path);
    CHECK(reopened.height() == 10);
    CHECK_FALSE(reopened.verify_chain().has_value());
    CHECK(reopened.find_tx("tx-3")->block == 3);
  }
}

TEST_CASE("appends after reopen continue the same file") {
  auto path = temp_file("reopen.blocks");
  {
    BlockStore store(path);
    build_chain(store, 3);
  }
  {
    BlockStore store(path);
    build_chain(store, 2);
    CHECK(store.height() == 5);
  }
  BlockStore again(path);
  CHECK(again.height() == 5);
  CHECK_FALSE(again.verify_chain().has_value());
}
