#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ragmem/database_handle.hpp"
#include "ragmem/slle.hpp"

namespace httplib {
class Server;
}

namespace ragmem {

struct ServiceConfig {
  std::size_t default_k = 4;
  double default_alpha = 0.5;
  std::size_t max_k = 64;
  /// When set, embeddings and swapped-in databases must have this dim.
  std::optional<std::size_t> dim;
  double reg_epsilon = 1e-3;
  double soft_mask_threshold = 0.5;
};

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Transport-independent request handlers for the retrieval API. Every
/// method is safe to call concurrently; retrievals run against the snapshot
/// that was live when they started.
class RetrievalService {
 public:
  explicit RetrievalService(ServiceConfig config,
                            std::optional<MemoryDatabase> initial = std::nullopt);

  /// POST /v1/retrieve
  ServiceResponse retrieve(std::string_view body);
  /// POST /v1/records
  ServiceResponse insert_record(std::string_view body);
  /// GET /v1/records/{id}
  ServiceResponse get_record(std::string_view id) const;
  /// POST /v1/db/swap
  ServiceResponse swap(std::string_view body);
  /// GET /v1/health
  ServiceResponse health() const;
  /// GET /v1/stats
  ServiceResponse stats() const;

  const ServiceConfig& config() const noexcept { return config_; }
  DatabaseHandle& handle() noexcept { return handle_; }

 private:
  void record_latency(double millis);

  ServiceConfig config_;
  DatabaseHandle handle_;

  std::atomic<std::uint64_t> retrieve_requests_{0};
  std::atomic<std::uint64_t> retrieve_ok_{0};
  std::atomic<std::uint64_t> retrieve_client_errors_{0};
  std::atomic<std::uint64_t> retrieve_server_errors_{0};
  std::atomic<std::uint64_t> inserts_{0};
  std::atomic<std::uint64_t> swaps_{0};

  mutable std::mutex latency_mutex_;
  std::vector<double> latencies_;  // ring buffer, milliseconds
  std::size_t latency_next_ = 0;
};

/// cpp-httplib front end for RetrievalService.
class HttpServer {
 public:
  HttpServer(RetrievalService& service, std::size_t worker_threads = 64);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or throws Io.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks the caller.
  void listen();
  /// Serves on a background thread.
  void start();
  /// Stops accepting, lets in-flight requests finish, joins the thread.
  void stop();

  int port() const noexcept { return port_; }

 private:
  RetrievalService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace ragmem
