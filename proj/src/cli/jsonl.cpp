#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>

#include "ragmem/error.hpp"
#include "ragmem/interchange.hpp"
#include "ragmem/landmark_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ragmem::io {

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::vector<double> number_array(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw Error(ErrorCode::ValidationFailed, fmt::format("missing array field '{}'", field));
  }
  return j.at(field).get<std::vector<double>>();
}

std::vector<double> as_vector(std::span<const double> v) { return {v.begin(), v.end()}; }

// Landmark reference stored in a JSONL line: relative to the file's directory.
std::string landmark_ref(const fs::path& jsonl, const fs::path& landmark) {
  const fs::path base = jsonl.has_parent_path() ? jsonl.parent_path() : fs::path(".");
  return fs::proximate(landmark, base).generic_string();
}

// Runs parse(json, line_number) over every non-blank line, prefixing errors
// with the location.
template <typename Parse>
void for_each_line(const fs::path& path, Parse&& parse) {
  auto in = open_input(path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id;
    try {
      const json j = json::parse(line);
      if (j.contains("id") && j.at("id").is_string()) id = j.at("id").get<std::string>();
      parse(j);
    } catch (const std::exception& e) {
      const std::string where =
          id.empty() ? fmt::format("{}:{}", path.string(), number)
                     : fmt::format("{}:{}: record '{}'", path.string(), number, id);
      throw Error(ErrorCode::ValidationFailed, where + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<MemoryRecord> read_records(const fs::path& path, const fs::path& landmark_dir) {
  std::vector<MemoryRecord> out;
  for_each_line(path, [&](const json& j) {
    std::optional<AttributeSet> attributes;
    if (j.contains("attributes")) attributes = AttributeSet::from_json(j.at("attributes"));
    std::optional<std::string> source;
    if (j.contains("source")) source = j.at("source").get<std::string>();
    const auto embedding = number_array(j, "embedding");
    out.push_back(MemoryRecord{
        j.at("id").get<std::string>(), StructureEmbedding::normalize(embedding),
        read_mask(landmark_dir / j.at("landmark").get<std::string>()),
        j.value("category", std::string{}), std::move(attributes), std::move(source)});
    if (out.back().category.empty() && out.back().attributes) {
      out.back().category = out.back().attributes->category();
    }
  });
  return out;
}

void write_records(std::span<const MemoryRecord> records, const fs::path& path,
                   const fs::path& landmark_dir) {
  fs::create_directories(landmark_dir);
  auto out = open_output(path);
  for (const auto& r : records) {
    const fs::path file = landmark_dir / (r.id + ".png");
    json j = {{"id", r.id},
              {"embedding", as_vector(r.embedding.values())},
              {"landmark", landmark_ref(path, file)},
              {"category", r.category}};
    if (r.attributes) j["attributes"] = r.attributes->to_json();
    if (r.source) j["source"] = *r.source;
    out << j.dump() << '\n';
    write_mask(r.landmark, file, MaskFormat::Png);
  }
}

std::vector<RetrievalQuery> read_queries(const fs::path& path, const fs::path& landmark_dir) {
  std::vector<RetrievalQuery> out;
  for_each_line(path, [&](const json& j) {
    const auto embedding = number_array(j, "embedding");
    out.push_back(RetrievalQuery{
        j.value("id", fmt::format("q{}", out.size())), StructureEmbedding::normalize(embedding),
        read_mask(landmark_dir / j.at("landmark").get<std::string>())});
  });
  return out;
}

void write_queries(std::span<const RetrievalQuery> queries, const fs::path& path,
                   const fs::path& landmark_dir) {
  fs::create_directories(landmark_dir);
  auto out = open_output(path);
  for (const auto& q : queries) {
    const fs::path file = landmark_dir / (q.id + ".png");
    out << json{{"id", q.id},
                {"embedding", as_vector(q.embedding.values())},
                {"landmark", landmark_ref(path, file)}}
               .dump()
        << '\n';
    write_mask(q.landmark, file, MaskFormat::Png);
  }
}

std::vector<EmbeddingPair> read_pairs(const fs::path& path) {
  std::vector<EmbeddingPair> out;
  for_each_line(path, [&](const json& j) {
    out.emplace_back(StructureEmbedding::normalize(number_array(j, "itw")),
                     StructureEmbedding::normalize(number_array(j, "std")));
  });
  return out;
}

void write_pairs(std::span<const EmbeddingPair> pairs, const fs::path& path) {
  auto out = open_output(path);
  for (const auto& [itw, std_] : pairs) {
    out << json{{"itw", as_vector(itw.values())}, {"std", as_vector(std_.values())}}.dump()
        << '\n';
  }
}

std::vector<double> read_embedding(const fs::path& path) {
  auto in = open_input(path);
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ValidationFailed, path.string() + ": not JSON");
  try {
    if (j.is_array()) return j.get<std::vector<double>>();
    return number_array(j, "embedding");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ValidationFailed, path.string() + ": " + e.what());
  }
}

}  // namespace ragmem::io
