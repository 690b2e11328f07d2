#include "donorchain/ledger/world_state.hpp"

#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "donorchain/common/error.hpp"

namespace donorchain::ledger {

namespace {

Bytes encode_update(const WorldState::Update& u) {
  ByteWriter w;
  w.u64(u.version.block).u64(u.version.tx).u32(static_cast<std::uint32_t>(u.writes.size()));
  for (const auto& wr : u.writes) {
    w.str(wr.key).boolean(wr.is_delete());
    if (wr.value) w.str(*wr.value);
  }
  return w.take();
}

WorldState::Update decode_update(ByteView data) {
  ByteReader r(data);
  WorldState::Update u;
  u.version.block = r.u64();
  u.version.tx = r.u64();
  auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    KVWrite wr;
    wr.key = r.str();
    if (!r.boolean()) wr.value = r.str();
    u.writes.push_back(std::move(wr));
  }
  r.expect_done();
  return u;
}

}  // namespace

std::optional<std::string> WorldState::Snapshot::get(std::string_view key) const {
  auto it = entries_->find(key);
  if (it == entries_->end() || it->second.deleted) return std::nullopt;
  return it->second.value;
}

std::optional<StateVersion> WorldState::Snapshot::version(std::string_view key) const {
  auto it = entries_->find(key);
  if (it == entries_->end()) return std::nullopt;
  return it->second.version;
}

std::vector<VersionedValue> WorldState::Snapshot::live_with_prefix(std::string_view prefix) const {
  std::vector<VersionedValue> out;
  for (auto it = entries_->lower_bound(prefix); it != entries_->end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    if (!it->second.deleted) out.push_back(it->second);
  }
  return out;
}

WorldState::WorldState(const std::filesystem::path& wal_path) {
  if (std::filesystem::exists(wal_path)) replay_wal(wal_path);
  wal_.emplace(wal_path, std::ios::binary | std::ios::app);
  if (!*wal_) throw Error(Errc::Io, "cannot open world-state log " + wal_path.string());
}

void WorldState::replay_wal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read world-state log " + path.string());
  while (true) {
    std::uint8_t len_bytes[4];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 4)) break;
    std::uint32_t len = (std::uint32_t{len_bytes[0]} << 24) | (std::uint32_t{len_bytes[1]} << 16) |
                        (std::uint32_t{len_bytes[2]} << 8) | std::uint32_t{len_bytes[3]};
    Bytes record(len);
    // A torn trailing record is the tail of an interrupted append; drop it.
    if (!in.read(reinterpret_cast<char*>(record.data()), len)) break;
    apply_locked(decode_update(record));
  }
}

std::optional<std::string> WorldState::get(std::string_view key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.deleted) return std::nullopt;
  return it->second.value;
}

std::optional<VersionedValue> WorldState::entry(std::string_view key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<StateVersion> WorldState::version(std::string_view key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.version;
}

void WorldState::apply_locked(const Update& update) {
  for (const auto& wr : update.writes) {
    auto it = entries_.find(wr.key);
    if (it != entries_.end() && !(it->second.version < update.version)) {
      throw std::logic_error("non-monotonic version for key '" + wr.key + "'");
    }
    VersionedValue v{wr.key, wr.value.value_or(std::string{}), update.version, wr.is_delete()};
    if (it == entries_.end()) {
      entries_.emplace(wr.key, std::move(v));
    } else {
      it->second = std::move(v);
    }
  }
}

void WorldState::apply(std::span<const Update> updates) {
  std::unique_lock lock(mu_);
  for (const auto& u : updates) {
    apply_locked(u);
    if (wal_) {
      auto rec = encode_update(u);
      ByteWriter len;
      len.u32(static_cast<std::uint32_t>(rec.size()));
      wal_->write(reinterpret_cast<const char*>(len.view().data()), 4);
      wal_->write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size()));
    }
  }
  if (wal_) {
    wal_->flush();
    if (!*wal_) throw Error(Errc::Io, "world-state log write failed");
  }
}

std::size_t WorldState::live_count() const {
  std::shared_lock lock(mu_);
  std::size_t n = 0;
  for (const auto& [k, v] : entries_) n += v.deleted ? 0 : 1;
  return n;
}

std::string WorldState::export_json() const {
  std::shared_lock lock(mu_);
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [key, v] : entries_) {
    nlohmann::json entry{{"block", v.version.block}, {"tx", v.version.tx}, {"deleted", v.deleted}};
    if (!v.deleted) entry["value"] = v.value;
    doc[key] = std::move(entry);
  }
  return doc.dump();
}

void WorldState::corrupt_for_testing(const std::string& key, const std::string& value) {
  std::unique_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    entries_.emplace(key, VersionedValue{key, value, StateVersion{}, false});
  } else {
    it->second.value = value;
    it->second.deleted = false;
  }
}

}  // namespace donorchain::ledger
