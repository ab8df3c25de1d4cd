#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>

#include "ragmem/memory_store.hpp"

namespace ragmem {

/// Serving slot for one immutable database snapshot.
///
/// Readers take a shared_ptr to the current snapshot and keep it for the
/// whole operation; swap and insert build a new snapshot and publish it in
/// one pointer store. Writers serialize on a separate mutex, so a slow
/// copy-on-write insert never holds readers up.
class DatabaseHandle {
 public:
  /// With `fixed_dim`, every installed database must have that dim.
  explicit DatabaseHandle(std::optional<std::size_t> fixed_dim = std::nullopt)
      : fixed_dim_(fixed_dim) {}

  /// Null until a database is installed.
  std::shared_ptr<const MemoryDatabase> snapshot() const;

  /// Validates `db`, stamps it with the next version and publishes it.
  /// Throws ValidationFailed; the previous snapshot stays live on failure.
  std::uint64_t swap(MemoryDatabase db);

  /// Copy-on-write insert into the live snapshot. Throws EmptyDatabase when
  /// nothing is installed, plus any MemoryDatabase::insert error.
  std::uint64_t insert(MemoryRecord record);

  std::optional<std::size_t> fixed_dim() const noexcept { return fixed_dim_; }

 private:
  void publish(std::shared_ptr<const MemoryDatabase> db);

  std::optional<std::size_t> fixed_dim_;
  std::mutex writer_;
  mutable std::shared_mutex slot_;
  std::shared_ptr<const MemoryDatabase> current_;
  std::uint64_t last_version_ = 0;
};

}  // namespace ragmem
