#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ragmem/codec.hpp"
#include "ragmem/error.hpp"
#include "ragmem/landmark_io.hpp"
#include "ragmem/memory_store.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ragmem {

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kEmbeddings = "embeddings.f32";
constexpr const char* kRecords = "records.jsonl";
constexpr const char* kLandmarks = "landmarks";

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_bytes(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string encode_floats_le(std::span<const float> values) {
  std::string out(values.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) out[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return out;
}

float decode_float_le(const char* p) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  return std::bit_cast<float>(bits);
}

std::string landmark_file_name(std::size_t index) { return fmt::format("{:06}.png", index); }

}  // namespace

void save_database(const MemoryDatabase& db, const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir) && !fs::is_empty(dir) && !fs::exists(dir / kManifest)) {
    throw Error(ErrorCode::Io, dir.string() + " exists and is not a database directory");
  }

  // Stage next to the target so the final rename stays on one filesystem.
  std::random_device rd;
  fs::path staging = dir;
  staging += fmt::format(".staging-{:08x}", rd());
  fs::create_directories(staging / kLandmarks, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + staging.string() + ": " + ec.message());

  try {
    const std::string embeddings = encode_floats_le(db.matrix());
    write_bytes(staging / kEmbeddings, embeddings);

    std::string records;
    for (std::size_t i = 0; i < db.count(); ++i) {
      const MemoryRecord& rec = db.record(i);
      json line = {{"id", rec.id}, {"category", rec.category},
                   {"landmark", landmark_file_name(i)}};
      if (rec.attributes) line["attributes"] = rec.attributes->to_json();
      if (rec.source) line["source"] = *rec.source;
      records += line.dump();
      records += '\n';
      write_mask(rec.landmark, staging / kLandmarks / landmark_file_name(i), MaskFormat::Png);
    }
    write_bytes(staging / kRecords, records);

    const json manifest = {{"format_version", kDatabaseFormatVersion},
                           {"dim", db.dim()},
                           {"count", db.count()},
                           {"checksum", "sha256:" + sha256_hex(as_bytes(embeddings))}};
    write_bytes(staging / kManifest, manifest.dump(2) + "\n");

    if (fs::exists(dir)) fs::remove_all(dir);
    fs::rename(staging, dir);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

MemoryDatabase load_database(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, dir.string() + " is not a directory");
  if (!fs::exists(dir / kManifest)) {
    throw Error(ErrorCode::CorruptManifest, "missing " + (dir / kManifest).string());
  }

  std::size_t dim = 0, count = 0;
  std::string checksum;
  try {
    const json manifest = json::parse(read_bytes(dir / kManifest));
    const int version = manifest.at("format_version").get<int>();
    if (version != kDatabaseFormatVersion) {
      throw Error(ErrorCode::CorruptManifest,
                  "unsupported database format_version " + std::to_string(version));
    }
    dim = manifest.at("dim").get<std::size_t>();
    count = manifest.at("count").get<std::size_t>();
    checksum = manifest.at("checksum").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptManifest, std::string("malformed manifest: ") + e.what());
  }
  if (dim == 0) throw Error(ErrorCode::CorruptManifest, "manifest dim must be positive");

  const std::string embeddings = read_bytes(dir / kEmbeddings);
  if (embeddings.size() != count * dim * sizeof(float)) {
    throw Error(ErrorCode::ChecksumMismatch,
                fmt::format("embeddings.f32 holds {} bytes, manifest expects {}",
                            embeddings.size(), count * dim * sizeof(float)));
  }
  if (checksum != "sha256:" + sha256_hex(as_bytes(embeddings))) {
    throw Error(ErrorCode::ChecksumMismatch, "embeddings.f32 checksum mismatch");
  }

  std::istringstream lines(read_bytes(dir / kRecords));
  MemoryDatabase db(dim);
  std::string line;
  std::size_t row = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (row >= count) throw Error(ErrorCode::CorruptManifest, "records.jsonl has extra rows");
    try {
      const json j = json::parse(line);
      std::vector<double> values(dim);
      for (std::size_t c = 0; c < dim; ++c) {
        values[c] = decode_float_le(embeddings.data() + (row * dim + c) * sizeof(float));
      }
      std::optional<AttributeSet> attributes;
      if (j.contains("attributes")) attributes = AttributeSet::from_json(j.at("attributes"));
      std::optional<std::string> source;
      if (j.contains("source")) source = j.at("source").get<std::string>();
      db.insert(MemoryRecord{
          j.at("id").get<std::string>(),
          StructureEmbedding::from_unit(std::move(values), 1e-5),
          read_mask(dir / kLandmarks / j.at("landmark").get<std::string>()),
          j.value("category", std::string{}),
          std::move(attributes),
          std::move(source),
      });
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptManifest,
                  fmt::format("records.jsonl line {}: {}", row + 1, e.what()));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Io) throw;
      throw Error(ErrorCode::CorruptManifest,
                  fmt::format("records.jsonl line {}: {}", row + 1, e.what()));
    }
    ++row;
  }
  if (row != count) {
    throw Error(ErrorCode::CorruptManifest,
                fmt::format("records.jsonl has {} rows, manifest says {}", row, count));
  }
  return db;
}

}  // namespace ragmem
