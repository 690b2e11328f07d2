#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "donorchain/ledger/types.hpp"

namespace donorchain::ledger {

// Current value of every key ever written, tagged with the version of the
// write. Deletes leave a tombstone that keeps its version.
//
// One writer (the committer) and any number of readers. apply() is atomic
// with respect to Snapshot, so a reader never observes half a block.
class WorldState {
 public:
  struct Update {
    StateVersion version;
    std::vector<KVWrite> writes;
  };

  // Read view pinned for its lifetime; commits wait until it is released.
  class Snapshot {
   public:
    std::optional<std::string> get(std::string_view key) const;
    std::optional<StateVersion> version(std::string_view key) const;
    std::vector<VersionedValue> live_with_prefix(std::string_view prefix) const;

   private:
    friend class WorldState;
    explicit Snapshot(const WorldState& ws) : lock_(ws.mu_), entries_(&ws.entries_) {}

    std::shared_lock<std::shared_mutex> lock_;
    const std::map<std::string, VersionedValue, std::less<>>* entries_;
  };

  WorldState() = default;
  // Replays an existing write-ahead log and appends to it from then on.
  explicit WorldState(const std::filesystem::path& wal_path);

  WorldState(const WorldState&) = delete;
  WorldState& operator=(const WorldState&) = delete;

  Snapshot snapshot() const { return Snapshot(*this); }

  std::optional<std::string> get(std::string_view key) const;
  std::optional<VersionedValue> entry(std::string_view key) const;
  std::optional<StateVersion> version(std::string_view key) const;

  // Versions must strictly increase per key; violating that is a logic error.
  void apply(std::span<const Update> updates);

  std::size_t live_count() const;

  // Canonical dump: keys sorted, compact JSON, tombstones included.
  std::string export_json() const;

  // Overwrites a value in place without a version bump. Only used to
  // simulate a compromised peer.
  void corrupt_for_testing(const std::string& key, const std::string& value);

 private:
  void apply_locked(const Update& update);
  void replay_wal(const std::filesystem::path& path);

  mutable std::shared_mutex mu_;
  std::map<std::string, VersionedValue, std::less<>> entries_;
  std::optional<std::ofstream> wal_;
};

}  // namespace donorchain::ledger
