#include <algorithm>
#include <numeric>

#include "ragmem/error.hpp"
#include "ragmem/memory_store.hpp"

namespace ragmem {

double cosine_similarity(const StructureEmbedding& a, const StructureEmbedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimMismatch, "cosine similarity of dims " + std::to_string(a.dim()) +
                                            " and " + std::to_string(b.dim()));
  }
  return std::clamp(dot(a.values(), b.values()), -1.0, 1.0);
}

MemoryDatabase::MemoryDatabase(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "database dim must be positive");
}

const std::string& MemoryDatabase::insert(MemoryRecord record) {
  if (record.id.empty()) throw Error(ErrorCode::InvalidArgument, "record id is empty");
  if (record.embedding.dim() != dim_) {
    throw Error(ErrorCode::DimMismatch, "record '" + record.id + "' has dim " +
                                            std::to_string(record.embedding.dim()) +
                                            ", database dim is " + std::to_string(dim_));
  }
  if (ids_.contains(record.id)) {
    throw Error(ErrorCode::DuplicateId, "duplicate record id '" + record.id + "'");
  }
  if (record.landmark.empty()) {
    throw Error(ErrorCode::EmptyMask, "record '" + record.id + "' has an empty landmark");
  }
  if (record.category.empty() && record.attributes) {
    record.category = record.attributes->category();
  }
  record.embedding = record.embedding.quantized();
  for (double x : record.embedding.values()) index_.push_back(static_cast<float>(x));
  ids_.emplace(record.id, records_.size());
  records_.push_back(std::make_shared<const MemoryRecord>(std::move(record)));
  ++version_;
  return records_.back()->id;
}

const MemoryRecord* MemoryDatabase::find(std::string_view id) const {
  const auto i = index_of(id);
  return i ? records_[*i].get() : nullptr;
}

std::optional<std::size_t> MemoryDatabase::index_of(std::string_view id) const {
  const auto it = ids_.find(std::string(id));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> MemoryDatabase::row(std::size_t index) const {
  if (index >= count()) throw Error(ErrorCode::NotFound, "row index out of range");
  return std::span<const float>(index_).subspan(index * dim_, dim_);
}

std::vector<Neighbor> MemoryDatabase::knn(const StructureEmbedding& query,
                                          std::size_t k) const {
  if (empty()) throw Error(ErrorCode::EmptyDatabase, "database is empty");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (k > count()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds database size " +
                                          std::to_string(count()));
  }
  if (query.dim() != dim_) {
    throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(query.dim()) +
                                            " != database dim " + std::to_string(dim_));
  }

  const auto q = query.values();
  std::vector<double> sims(count());
  for (std::size_t r = 0; r < count(); ++r) {
    const float* row_ptr = index_.data() + r * dim_;
    double s = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) s += q[c] * static_cast<double>(row_ptr[c]);
    sims[r] = std::clamp(s, -1.0, 1.0);
  }

  std::vector<std::size_t> order(count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return records_[a]->id < records_[b]->id;
                    });

  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = order[i];
    out.push_back(Neighbor{records_[r]->id, sims[r], i + 1, r});
  }
  return out;
}

void MemoryDatabase::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::ValidationFailed, why); };
  if (empty()) fail("database has no records");
  if (index_.size() != count() * dim_) fail("index size does not match record count");
  for (std::size_t r = 0; r < count(); ++r) {
    const auto& rec = *records_[r];
    if (rec.embedding.dim() != dim_) fail("record '" + rec.id + "' has wrong dim");
    if (rec.landmark.empty()) fail("record '" + rec.id + "' has an empty landmark");
    for (std::size_t c = 0; c < dim_; ++c) {
      if (static_cast<float>(rec.embedding[c]) != index_[r * dim_ + c]) {
        fail("index row " + std::to_string(r) + " diverges from its record");
      }
    }
  }
}

}  // namespace ragmem
