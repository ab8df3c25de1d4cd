#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "ragmem/codec.hpp"
#include "ragmem/error.hpp"
#include "ragmem/landmark_io.hpp"
#include "ragmem/service.hpp"

using nlohmann::json;

namespace ragmem {

namespace {

constexpr std::size_t kLatencyWindow = 4096;

ServiceResponse reply(int status, const json& body) { return {status, body.dump()}; }

ServiceResponse error_reply(int status, std::string_view code, const std::string& message) {
  return reply(status, json{{"code", code}, {"message", message}});
}

// Request validation failure carrying its HTTP mapping.
struct BadRequest {
  int status;
  std::string code;
  std::string message;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::KTooLarge:
    case ErrorCode::DuplicateId:
      return 409;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::EmptyDatabase:
      return 503;
    case ErrorCode::DegenerateFusion:
    case ErrorCode::NumericalFailure:
      return 422;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

std::vector<double> parse_embedding(const json& j) {
  if (!j.is_array()) throw BadRequest{400, "bad_request", "embedding must be a number array"};
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw BadRequest{400, "bad_request", "embedding must be numeric"};
    v.push_back(x.get<double>());
  }
  return v;
}

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw BadRequest{400, "bad_request", "request body must be a JSON object"};
  }
  return j;
}

LandmarkMask parse_landmark(const json& j) {
  try {
    if (j.contains("landmark_png")) {
      return decode_png(base64_decode(j.at("landmark_png").get<std::string>()));
    }
    if (j.contains("landmark_pbm")) return decode_pbm(j.at("landmark_pbm").get<std::string>());
  } catch (const Error& e) {
    throw BadRequest{400, "bad_landmark", e.what()};
  }
  throw BadRequest{400, "bad_request", "record needs landmark_png (base64) or landmark_pbm"};
}

std::string soft_mask_png(const LandmarkMask& shape, const std::vector<double>& soft) {
  std::vector<std::uint8_t> gray(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i) {
    gray[i] = static_cast<std::uint8_t>(std::lround(std::clamp(soft[i], 0.0, 1.0) * 255.0));
  }
  return base64_encode(encode_gray_png(shape.width(), shape.height(), gray));
}

}  // namespace

RetrievalService::RetrievalService(ServiceConfig config, std::optional<MemoryDatabase> initial)
    : config_(config), handle_(config.dim) {
  SlleConfig probe{config_.default_k, config_.default_alpha, config_.reg_epsilon,
                   config_.soft_mask_threshold};
  probe.validate();
  if (config_.max_k < config_.default_k) {
    throw Error(ErrorCode::InvalidArgument, "max_k is below default_k");
  }
  if (initial) handle_.swap(std::move(*initial));
}

void RetrievalService::record_latency(double millis) {
  std::lock_guard lock(latency_mutex_);
  if (latencies_.size() < kLatencyWindow) {
    latencies_.push_back(millis);
  } else {
    latencies_[latency_next_] = millis;
  }
  latency_next_ = (latency_next_ + 1) % kLatencyWindow;
}

ServiceResponse RetrievalService::retrieve(std::string_view body) {
  const auto started = std::chrono::steady_clock::now();
  ++retrieve_requests_;
  ServiceResponse response;
  try {
    const json req = parse_body(body);
    if (!req.contains("embedding")) {
      throw BadRequest{400, "bad_request", "missing field 'embedding'"};
    }
    const auto raw = parse_embedding(req.at("embedding"));

    std::size_t k = config_.default_k;
    if (req.contains("k")) {
      const auto& jk = req.at("k");
      if (!jk.is_number_integer() || jk.get<long long>() < 1) {
        throw BadRequest{400, "bad_k", "k must be a positive integer"};
      }
      k = jk.get<std::size_t>();
      if (k > config_.max_k) {
        throw BadRequest{400, "k_exceeds_max",
                         "k=" + std::to_string(k) + " exceeds max_k=" +
                             std::to_string(config_.max_k)};
      }
    }
    double alpha = config_.default_alpha;
    if (req.contains("alpha")) {
      const auto& ja = req.at("alpha");
      if (!ja.is_number() || !(ja.get<double>() >= 0.0 && ja.get<double>() <= 1.0)) {
        throw BadRequest{400, "bad_alpha", "alpha must be a number in [0, 1]"};
      }
      alpha = ja.get<double>();
    }
    const bool include_masks = req.value("include_soft_mask", false);

    const auto db = handle_.snapshot();
    if (!db) throw BadRequest{503, "no_database", "no database loaded"};
    if (raw.size() != db->dim()) {
      throw BadRequest{400, "dim_mismatch",
                       "embedding dim " + std::to_string(raw.size()) + " != database dim " +
                           std::to_string(db->dim())};
    }
    const auto query = StructureEmbedding::normalize(raw);
    const SlleResult result = slle_retrieve(
        *db, query, SlleConfig{k, alpha, config_.reg_epsilon, config_.soft_mask_threshold});

    json neighbors = json::array();
    for (const auto& n : result.neighbors) {
      neighbors.push_back({{"id", n.id}, {"similarity", n.similarity}, {"rank", n.rank}});
    }
    json out = {{"fused_embedding", std::vector<double>(result.fused_embedding.values().begin(),
                                                       result.fused_embedding.values().end())},
                {"weights", result.weights},
                {"neighbors", std::move(neighbors)},
                {"landmark_id", result.landmark_id()},
                {"objective", result.objective},
                {"db_version", result.db_version}};
    if (include_masks) {
      out["landmark"] = base64_encode(encode_png(result.fused_landmark));
      out["soft_mask"] = soft_mask_png(result.fused_landmark, result.soft_mask);
    }
    response = reply(200, out);
    ++retrieve_ok_;
  } catch (const BadRequest& e) {
    response = error_reply(e.status, e.code, e.message);
  } catch (const Error& e) {
    response = error_reply(status_for(e.code()), code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    response = error_reply(500, "internal", e.what());
  }
  if (response.status >= 500) {
    ++retrieve_server_errors_;
  } else if (response.status >= 400) {
    ++retrieve_client_errors_;
  }
  record_latency(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           started)
                     .count());
  return response;
}

ServiceResponse RetrievalService::insert_record(std::string_view body) {
  try {
    const json req = parse_body(body);
    if (!req.contains("id") || !req.at("id").is_string()) {
      throw BadRequest{400, "bad_request", "record needs a string 'id'"};
    }
    if (!req.contains("embedding")) {
      throw BadRequest{400, "bad_request", "record needs an 'embedding'"};
    }
    const auto raw = parse_embedding(req.at("embedding"));
    if (const auto db = handle_.snapshot(); db && raw.size() != db->dim()) {
      throw BadRequest{400, "dim_mismatch",
                       "embedding dim " + std::to_string(raw.size()) + " != database dim " +
                           std::to_string(db->dim())};
    }
    std::optional<AttributeSet> attributes;
    if (req.contains("attributes")) attributes = AttributeSet::from_json(req.at("attributes"));
    std::optional<std::string> source;
    if (req.contains("source")) source = req.at("source").get<std::string>();

    MemoryRecord record{req.at("id").get<std::string>(), StructureEmbedding::normalize(raw),
                        parse_landmark(req), req.value("category", std::string{}),
                        std::move(attributes), std::move(source)};
    const std::string id = record.id;
    const std::uint64_t version = handle_.insert(std::move(record));
    ++inserts_;
    return reply(201, json{{"id", id}, {"db_version", version}});
  } catch (const BadRequest& e) {
    return error_reply(e.status, e.code, e.message);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyDatabase) {
      return error_reply(503, "no_database", "no database loaded");
    }
    return error_reply(status_for(e.code()), code_name(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_reply(400, "bad_request", e.what());
  }
}

ServiceResponse RetrievalService::get_record(std::string_view id) const {
  const auto db = handle_.snapshot();
  if (!db) return error_reply(503, "no_database", "no database loaded");
  const MemoryRecord* rec = db->find(id);
  if (!rec) return error_reply(404, "not_found", "no record '" + std::string(id) + "'");
  json out = {{"id", rec->id},
              {"category", rec->category},
              {"dim", rec->embedding.dim()},
              {"landmark",
               {{"width", rec->landmark.width()},
                {"height", rec->landmark.height()},
                {"foreground", rec->landmark.foreground_count()}}},
              {"db_version", db->version()}};
  if (rec->attributes) out["attributes"] = rec->attributes->to_json();
  if (rec->source) out["source"] = *rec->source;
  return reply(200, out);
}

ServiceResponse RetrievalService::swap(std::string_view body) {
  try {
    const json req = parse_body(body);
    if (!req.contains("path") || !req.at("path").is_string()) {
      throw BadRequest{400, "bad_request", "swap needs a string 'path'"};
    }
    const std::filesystem::path path = req.at("path").get<std::string>();
    if (!std::filesystem::exists(path)) {
      throw BadRequest{404, "not_found", "no database at " + path.string()};
    }
    MemoryDatabase next = [&] {
      try {
        return load_database(path);
      } catch (const Error& e) {
        throw BadRequest{400, "validation_failed", e.what()};
      }
    }();
    const std::size_t count = next.count();
    const std::size_t dim = next.dim();
    const std::uint64_t version = handle_.swap(std::move(next));
    ++swaps_;
    return reply(200, json{{"db_version", version}, {"count", count}, {"dim", dim}});
  } catch (const BadRequest& e) {
    return error_reply(e.status, e.code, e.message);
  } catch (const Error& e) {
    return error_reply(400, "validation_failed", e.what());
  }
}

ServiceResponse RetrievalService::health() const {
  const auto db = handle_.snapshot();
  if (!db) {
    return reply(200, json{{"status", "degraded"}, {"db_version", 0}, {"dim", nullptr},
                           {"count", 0}});
  }
  return reply(200, json{{"status", "ok"}, {"db_version", db->version()}, {"dim", db->dim()},
                         {"count", db->count()}});
}

ServiceResponse RetrievalService::stats() const {
  std::vector<double> window;
  {
    std::lock_guard lock(latency_mutex_);
    window = latencies_;
  }
  std::sort(window.begin(), window.end());
  auto percentile = [&window](double p) -> json {
    if (window.empty()) return nullptr;
    const auto i = static_cast<std::size_t>(
        std::ceil(p / 100.0 * static_cast<double>(window.size())));
    return window[std::clamp<std::size_t>(i, 1, window.size()) - 1];
  };
  const auto db = handle_.snapshot();
  return reply(200, json{
                        {"retrieve",
                         {{"requests", retrieve_requests_.load()},
                          {"ok", retrieve_ok_.load()},
                          {"client_errors", retrieve_client_errors_.load()},
                          {"server_errors", retrieve_server_errors_.load()}}},
                        {"inserts", inserts_.load()},
                        {"swaps", swaps_.load()},
                        {"db_version", db ? db->version() : 0},
                        {"latency_ms",
                         {{"samples", window.size()},
                          {"p50", percentile(50)},
                          {"p90", percentile(90)},
                          {"p99", percentile(99)},
                          {"max", window.empty() ? json(nullptr) : json(window.back())}}},
                    });
}

}  // namespace ragmem
