#include "ragmem/database_handle.hpp"

#include "ragmem/error.hpp"

namespace ragmem {

std::shared_ptr<const MemoryDatabase> DatabaseHandle::snapshot() const {
  std::shared_lock lock(slot_);
  return current_;
}

void DatabaseHandle::publish(std::shared_ptr<const MemoryDatabase> db) {
  std::unique_lock lock(slot_);
  current_ = std::move(db);
}

std::uint64_t DatabaseHandle::swap(MemoryDatabase db) {
  std::lock_guard writer(writer_);
  if (fixed_dim_ && db.dim() != *fixed_dim_) {
    throw Error(ErrorCode::ValidationFailed,
                "database dim " + std::to_string(db.dim()) + " does not match service dim " +
                    std::to_string(*fixed_dim_));
  }
  db.validate();
  db.set_version(++last_version_);
  publish(std::make_shared<const MemoryDatabase>(std::move(db)));
  return last_version_;
}

std::uint64_t DatabaseHandle::insert(MemoryRecord record) {
  std::lock_guard writer(writer_);
  const auto live = snapshot();
  if (!live) throw Error(ErrorCode::EmptyDatabase, "no database loaded");
  MemoryDatabase next = *live;
  next.insert(std::move(record));
  next.set_version(++last_version_);
  publish(std::make_shared<const MemoryDatabase>(std::move(next)));
  return last_version_;
}

}  // namespace ragmem
