#include <httplib.h>

#include "ragmem/error.hpp"
#include "ragmem/service.hpp"

namespace ragmem {

namespace {

void send(httplib::Response& res, const ServiceResponse& out) {
  res.status = out.status;
  res.set_content(out.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(RetrievalService& service, std::size_t worker_threads)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->new_task_queue = [worker_threads] { return new httplib::ThreadPool(worker_threads); };
  // Clients reuse connections for the whole session.
  server_->set_keep_alive_max_count(100000);

  server_->Post("/v1/retrieve", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.retrieve(req.body));
  });
  server_->Post("/v1/records", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.insert_record(req.body));
  });
  server_->Get(R"(/v1/records/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 send(res, service_.get_record(req.matches[1].str()));
               });
  server_->Post("/v1/db/swap", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.swap(req.body));
  });
  server_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.health());
  });
  server_->Get("/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
    send(res, service_.stats());
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port_;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace ragmem
