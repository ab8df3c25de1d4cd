#include <doctest.h>

#include <json.hpp>
#include <random>

#include "fixtures.hpp"
#include "ragmem/codec.hpp"
#include "ragmem/landmark_io.hpp"
#include "ragmem/service.hpp"
#include "ragmem/synthetic.hpp"

// After the Eigen users: <resolv.h> defines a _res macro.
#include <httplib.h>

using namespace ragmem;
using nlohmann::json;

namespace {

MemoryDatabase small_db(const std::string& prefix, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MemoryDatabase db(8);
  for (std::size_t i = 0; i < n; ++i) {
    LandmarkMask m(16, 16);
    m.fill_rect(i % 8, 0, 8 + i % 8, 12);
    db.insert(MemoryRecord{prefix + std::to_string(i), synthetic::random_unit(rng, 8), m, "Dress",
                           std::nullopt, std::nullopt});
  }
  return db;
}

json retrieve_body(std::uint64_t seed, std::size_t k = 4) {
  std::mt19937_64 rng(seed);
  const auto q = synthetic::random_unit(rng, 8);
  return {{"embedding", std::vector<double>(q.values().begin(), q.values().end())}, {"k", k}};
}

json parse(const ServiceResponse& r) { return json::parse(r.body); }

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("retrieve returns weights summing to one") {
    RetrievalService service(ServiceConfig{}, small_db("a", 20, 1));
    const auto r = service.retrieve(retrieve_body(5).dump());
    REQUIRE(r.status == 200);
    const auto j = parse(r);
    double sum = 0.0;
    for (double w : j.at("weights")) sum += w;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(j.at("neighbors").size() == 4);
    CHECK(j.at("fused_embedding").size() == 8);
    CHECK(j.at("db_version") == 1);
  }

  TEST_CASE("retrieve is deterministic per request and version") {
    RetrievalService service(ServiceConfig{}, small_db("a", 20, 1));
    const auto body = retrieve_body(9).dump();
    CHECK(service.retrieve(body).body == service.retrieve(body).body);
  }

  TEST_CASE("retrieve error statuses") {
    ServiceConfig cfg;
    cfg.max_k = 8;
    RetrievalService service(cfg, small_db("a", 5, 1));
    CHECK(service.retrieve("not json").status == 400);
    CHECK(service.retrieve(R"({"k": 2})").status == 400);
    CHECK(parse(service.retrieve(retrieve_body(1, 0).dump())).at("code") == "bad_k");
    CHECK(parse(service.retrieve(retrieve_body(1, 9).dump())).at("code") == "k_exceeds_max");
    const auto too_large = service.retrieve(retrieve_body(1, 6).dump());
    CHECK(too_large.status == 409);
    CHECK(parse(too_large).at("code") == "k_too_large");
    CHECK(parse(service.retrieve(R"({"embedding": [1, 0]})")).at("code") == "dim_mismatch");
    auto bad_alpha = retrieve_body(1);
    bad_alpha["alpha"] = 2.0;
    CHECK(parse(service.retrieve(bad_alpha.dump())).at("code") == "bad_alpha");
    CHECK(service.retrieve(R"({"embedding": [0,0,0,0,0,0,0,0]})").status == 400);
  }

  TEST_CASE("no database means 503 and degraded health") {
    RetrievalService service(ServiceConfig{});
    CHECK(service.retrieve(retrieve_body(1).dump()).status == 503);
    CHECK(parse(service.health()).at("status") == "degraded");
  }

  TEST_CASE("insert, fetch and duplicate detection") {
    RetrievalService service(ServiceConfig{}, small_db("a", 5, 1));
    const auto mask = fixtures::box_mask(16, 2, 2, 9, 9);
    json rec = {{"id", "fresh"},
                {"embedding", std::vector<double>(8, 1.0)},
                {"landmark_png", base64_encode(encode_png(mask))},
                {"category", "Shirt"}};
    const auto created = service.insert_record(rec.dump());
    CHECK(created.status == 201);
    CHECK(parse(created).at("db_version") == 2);
    CHECK(service.insert_record(rec.dump()).status == 409);
    const auto got = parse(service.get_record("fresh"));
    CHECK(got.at("category") == "Shirt");
    CHECK(got.at("landmark").at("foreground") == 49);
    CHECK(service.get_record("nope").status == 404);
    rec["id"] = "broken";
    rec["landmark_png"] = "AAAA";
    CHECK(parse(service.insert_record(rec.dump())).at("code") == "bad_landmark");
  }

  TEST_CASE("swap replaces the served database and survives bad paths") {
    fixtures::TempDir dir("svc");
    save_database(small_db("b", 6, 2), dir / "db2");
    RetrievalService service(ServiceConfig{}, small_db("a", 5, 1));
    CHECK(service.swap(json{{"path", (dir / "missing").string()}}.dump()).status == 404);
    CHECK(parse(service.health()).at("count") == 5);
    const auto r = service.swap(json{{"path", (dir / "db2").string()}}.dump());
    REQUIRE(r.status == 200);
    const auto j = parse(service.retrieve(retrieve_body(3).dump()));
    for (const auto& n : j.at("neighbors")) CHECK(n.at("id").get<std::string>()[0] == 'b');
    CHECK(j.at("db_version") == parse(r).at("db_version"));
  }

  TEST_CASE("fixed dim rejects a mismatched swap") {
    fixtures::TempDir dir("svc");
    MemoryDatabase wide(3);
    wide.insert(fixtures::make_record("w", {1, 0, 0}, fixtures::box_mask(4, 0, 0, 2, 2)));
    save_database(wide, dir / "wide");
    ServiceConfig cfg;
    cfg.dim = 8;
    RetrievalService service(cfg, small_db("a", 5, 1));
    const auto r = service.swap(json{{"path", (dir / "wide").string()}}.dump());
    CHECK(r.status == 400);
    CHECK(parse(r).at("code") == "validation_failed");
  }

  TEST_CASE("soft mask output is a decodable PNG") {
    RetrievalService service(ServiceConfig{}, small_db("a", 10, 1));
    auto body = retrieve_body(2);
    body["include_soft_mask"] = true;
    const auto j = parse(service.retrieve(body.dump()));
    const auto png = base64_decode(j.at("landmark").get<std::string>());
    CHECK(decode_png(png).width() == 16);
    CHECK(j.contains("soft_mask"));
  }

  TEST_CASE("stats count requests") {
    RetrievalService service(ServiceConfig{}, small_db("a", 10, 1));
    service.retrieve(retrieve_body(1).dump());
    service.retrieve("{}");
    const auto s = parse(service.stats());
    CHECK(s.at("retrieve").at("requests") == 2);
    CHECK(s.at("retrieve").at("ok") == 1);
    CHECK(s.at("retrieve").at("client_errors") == 1);
    CHECK(s.at("latency_ms").at("samples") == 2);
  }

  TEST_CASE("http round trip") {
    RetrievalService service(ServiceConfig{}, small_db("a", 10, 1));
    HttpServer server(service, 4);
    const int port = server.bind("127.0.0.1", 0);
    server.start();
    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body).at("count") == 10);
    auto r = client.Post("/v1/retrieve", retrieve_body(4).dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body).at("neighbors").size() == 4);
    auto rec = client.Get("/v1/records/a3");
    REQUIRE(rec);
    CHECK(json::parse(rec->body).at("id") == "a3");
    auto missing = client.Get("/v1/records/zz");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto stats = client.Get("/v1/stats");
    REQUIRE(stats);
    CHECK(stats->status == 200);
    server.stop();
  }
}
