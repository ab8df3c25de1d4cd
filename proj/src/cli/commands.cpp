#include "ragmem/cli.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ragmem/curation.hpp"
#include "ragmem/error.hpp"
#include "ragmem/interchange.hpp"
#include "ragmem/landmark_io.hpp"
#include "ragmem/metrics.hpp"
#include "ragmem/service.hpp"
#include "ragmem/slle.hpp"
#include "ragmem/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ragmem::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::KTooLarge:
    case ErrorCode::EmptyDatabase:
    case ErrorCode::EmptyAfterCuration:
    case ErrorCode::DegenerateFusion:
    case ErrorCode::NumericalFailure:
    case ErrorCode::AllWeightsNonPositive:
      return kExitDomain;
    default:
      return kExitInput;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::vector<double> as_vector(std::span<const double> v) { return {v.begin(), v.end()}; }

fs::path default_landmark_dir(const fs::path& input, const std::string& flag) {
  if (!flag.empty()) return flag;
  return input.has_parent_path() ? input.parent_path() : fs::path(".");
}

// ---- build-db -------------------------------------------------------------

struct BuildDbOptions {
  std::string input, landmarks, out, report;
  std::size_t target_size = kUnlimited;
  std::size_t cap = kUnlimited;
  double eps = 0.1;
  std::size_t min_pts = 4;
  double radius = 0.0;
  std::uint64_t seed = 0;
};

int build_db(const BuildDbOptions& o, std::ostream& out) {
  const auto records = io::read_records(o.input, default_landmark_dir(o.input, o.landmarks));
  if (records.empty()) throw Error(ErrorCode::ValidationFailed, o.input + " holds no records");
  const std::size_t dim = records.front().embedding.dim();
  for (const auto& r : records) {
    if (r.embedding.dim() != dim) {
      throw Error(ErrorCode::ValidationFailed,
                  fmt::format("record '{}' has dim {}, expected {}", r.id, r.embedding.dim(), dim));
    }
  }

  CurationConfig config;
  config.per_category_cap = o.cap;
  config.dbscan_eps = o.eps;
  config.dbscan_min_pts = o.min_pts;
  config.downsample_radius = o.radius;
  config.target_size = o.target_size;
  config.seed = o.seed;
  const CurationResult result = build_database(records, config);
  save_database(result.database, o.out);

  fs::path report_path = o.report;
  if (report_path.empty()) {
    fs::path target = fs::path(o.out).lexically_normal();
    if (!target.has_filename()) target = target.parent_path();
    report_path = target;
    report_path += ".curation.json";
  }
  const json report = result.report.to_json();
  write_text(report_path, report.dump(2) + "\n");
  out << report.dump() << '\n';
  return kExitOk;
}

// ---- query ----------------------------------------------------------------

struct QueryOptions {
  std::string db, embedding, out, save_landmark;
  std::size_t k = 4;
  double alpha = 0.5;
  double reg = 1e-3;
  double threshold = 0.5;
};

int query(const QueryOptions& o, std::ostream& out) {
  const MemoryDatabase db = load_database(o.db);
  const auto raw = io::read_embedding(o.embedding);
  if (raw.size() != db.dim()) {
    throw Error(ErrorCode::DimMismatch,
                fmt::format("embedding dim {} != database dim {}", raw.size(), db.dim()));
  }
  const auto result =
      slle_retrieve(db, StructureEmbedding::normalize(raw), SlleConfig{o.k, o.alpha, o.reg, o.threshold});

  json neighbors = json::array();
  for (const auto& n : result.neighbors) {
    neighbors.push_back({{"id", n.id}, {"similarity", n.similarity}, {"rank", n.rank}});
  }
  const json body = {{"neighbors", std::move(neighbors)},
                     {"weights", result.weights},
                     {"reconstructed", result.reconstructed},
                     {"fused_embedding", as_vector(result.fused_embedding.values())},
                     {"landmark_id", result.landmark_id()},
                     {"landmark_index", result.landmark_index},
                     {"objective", result.objective},
                     {"db_version", result.db_version},
                     {"k", o.k},
                     {"alpha", o.alpha}};
  if (o.out.empty()) {
    out << body.dump(2) << '\n';
  } else {
    write_text(o.out, body.dump(2) + "\n");
  }
  if (!o.save_landmark.empty()) write_mask(result.fused_landmark, o.save_landmark);
  return kExitOk;
}

// ---- eval-retrieval ---------------------------------------------------------

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ValidationFailed, "invalid k value '" + item + "'");
    }
  }
  if (ks.empty()) throw Error(ErrorCode::ValidationFailed, "empty k list");
  return ks;
}

struct EvalRetrievalOptions {
  std::vector<std::string> dbs;
  std::string queries, landmarks, out, table;
  std::string k = "1,5";
  double iou_threshold = kDefaultIouThreshold;
};

int eval_retrieval_cmd(const EvalRetrievalOptions& o, std::ostream& out) {
  const auto queries = io::read_queries(o.queries, default_landmark_dir(o.queries, o.landmarks));
  if (queries.empty()) throw Error(ErrorCode::ValidationFailed, o.queries + " holds no queries");
  const auto ks = parse_k_list(o.k);

  std::vector<RetrievalEvalReport> rows;
  json reports = json::array();
  for (const auto& path : o.dbs) {
    const MemoryDatabase db = load_database(path);
    for (const auto& q : queries) {
      if (q.embedding.dim() != db.dim()) {
        throw Error(ErrorCode::ValidationFailed,
                    fmt::format("query '{}' has dim {}, database {} has dim {}", q.id,
                                q.embedding.dim(), path, db.dim()));
      }
    }
    rows.push_back(eval_retrieval(db, queries, ks, o.iou_threshold));
    json r = rows.back().to_json();
    r["db"] = path;
    reports.push_back(std::move(r));
  }
  const std::string table = format_retrieval_table(rows);
  out << table;
  if (!o.out.empty()) write_text(o.out, json{{"reports", reports}}.dump(2) + "\n");
  if (!o.table.empty()) write_text(o.table, table);
  return kExitOk;
}

// ---- eval-infonce -----------------------------------------------------------

struct EvalInfoNceOptions {
  std::string pairs, out;
  double tau = kDefaultTau;
};

int eval_infonce(const EvalInfoNceOptions& o, std::ostream& out) {
  if (!(o.tau > 0.0)) throw Error(ErrorCode::NonPositiveTau, "--tau must be positive");
  const auto pairs = io::read_pairs(o.pairs);
  if (pairs.empty()) throw Error(ErrorCode::CountMismatch, o.pairs + " holds no pairs");
  std::vector<StructureEmbedding> itw, std_;
  for (const auto& [a, b] : pairs) {
    if (a.dim() != b.dim() || a.dim() != pairs.front().first.dim()) {
      throw Error(ErrorCode::DimMismatch, "pair embeddings differ in dim");
    }
    itw.push_back(a);
    std_.push_back(b);
  }
  const Eigen::MatrixXd sim = similarity_matrix(itw, std_);
  const InfoNceResult result = infonce_loss(sim, o.tau);

  json rows = json::array();
  std::size_t top1 = 0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto rank = result.positive_rank[i];
    top1 += rank == 1;
    rank_sum += static_cast<double>(rank);
    rows.push_back({{"index", i},
                    {"positive_rank", rank},
                    {"positive_similarity", sim(static_cast<Eigen::Index>(i),
                                                static_cast<Eigen::Index>(i))}});
  }
  const double n = static_cast<double>(pairs.size());
  const json body = {{"loss", result.loss},
                     {"n", pairs.size()},
                     {"tau", o.tau},
                     {"top1_fraction", static_cast<double>(top1) / n},
                     {"mean_positive_rank", rank_sum / n},
                     {"rows", std::move(rows)}};
  if (!o.out.empty()) write_text(o.out, body.dump(2) + "\n");
  out << fmt::format("loss={:.7f} n={} tau={}\n", result.loss, pairs.size(), o.tau);
  return kExitOk;
}

// ---- sweep-k ----------------------------------------------------------------

struct SweepKOptions {
  std::string db, queries, landmarks, out;
  std::string k = "1,2,4,8";
  double alpha = 0.5;
  double iou_threshold = kDefaultIouThreshold;
};

int sweep_k(const SweepKOptions& o, std::ostream& out) {
  const MemoryDatabase db = load_database(o.db);
  const auto queries = io::read_queries(o.queries, default_landmark_dir(o.queries, o.landmarks));
  if (queries.empty()) throw Error(ErrorCode::ValidationFailed, o.queries + " holds no queries");
  const auto ks = parse_k_list(o.k);
  const std::vector<std::size_t> retrieval_ks = {1, 5};
  const RetrievalEvalReport baseline = eval_retrieval(db, queries, retrieval_ks, o.iou_threshold);

  std::string csv = "k,mean_objective,mean_top1_iou,top1_acc,top5_acc\n";
  for (std::size_t k : ks) {
    SlleConfig config;
    config.k = k;
    config.alpha = o.alpha;
    double objective_sum = 0.0, iou_sum = 0.0;
    std::size_t hits = 0;
    for (const auto& q : queries) {
      const auto result = slle_retrieve(db, q.embedding, config);
      objective_sum += result.objective;
      const double iou = aligned_iou(result.fused_landmark, q.landmark);
      iou_sum += iou;
      hits += iou > o.iou_threshold;
    }
    const double m = static_cast<double>(queries.size());
    csv += fmt::format("{},{:.9f},{:.9f},{:.9f},{:.9f}\n", k, objective_sum / m, iou_sum / m,
                       static_cast<double>(hits) / m, baseline.top5_accuracy);
  }
  if (o.out.empty()) {
    out << csv;
  } else {
    write_text(o.out, csv);
    out << csv;
  }
  return kExitOk;
}

// ---- serve ------------------------------------------------------------------

struct ServeOptions {
  std::string db;
  std::string bind = "127.0.0.1:8080";
  std::size_t default_k = 4;
  double default_alpha = 0.5;
  std::size_t max_k = 64;
  std::size_t dim = 0;
  std::size_t threads = 64;
};

int serve(const ServeOptions& o, std::ostream& out) {
  const auto colon = o.bind.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::ValidationFailed, "--bind expects host:port");
  }
  const std::string host = o.bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ValidationFailed, "--bind has an invalid port");
  }

  MemoryDatabase db = load_database(o.db);
  ServiceConfig config;
  config.default_k = o.default_k;
  config.default_alpha = o.default_alpha;
  config.max_k = o.max_k;
  if (o.dim > 0) config.dim = o.dim;
  RetrievalService service(config, std::move(db));

  // Block termination signals before any server thread exists; this thread
  // collects them with sigwait.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  HttpServer server(service, o.threads);
  const int bound = server.bind(host, port);
  server.start();
  out << fmt::format("listening on {}:{}", host, bound) << std::endl;

  int received = 0;
  sigwait(&signals, &received);
  server.stop();
  out << "shutdown on signal " << received << std::endl;
  return kExitOk;
}

// ---- synth ------------------------------------------------------------------

struct SynthOptions {
  std::string kind = "garment";
  std::string out_dir;
  std::size_t count = 1000;
  std::size_t queries = 200;
  std::size_t dim = 32;
  std::size_t side = 64;
  double noise = 0.03;
  double outlier_fraction = 0.0;
  std::uint64_t seed = 7;
};

int synth(const SynthOptions& o, std::ostream& out) {
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);
  if (o.kind == "garment") {
    synthetic::GarmentWorldConfig config;
    config.dim = o.dim;
    config.side = o.side;
    config.query_noise = o.noise;
    config.outlier_fraction = o.outlier_fraction;
    config.seed = o.seed;
    const synthetic::GarmentWorld world(config);
    io::write_records(world.pool(o.count, o.seed + 1), dir / "records.jsonl", dir / "landmarks");
    io::write_queries(world.queries(o.queries, o.seed + 2), dir / "queries.jsonl",
                      dir / "query_landmarks");
  } else if (o.kind == "pairs") {
    std::mt19937_64 rng(o.seed);
    std::vector<io::EmbeddingPair> pairs;
    for (std::size_t i = 0; i < o.count; ++i) {
      auto anchor = synthetic::random_unit(rng, o.dim);
      auto positive = synthetic::perturbed(anchor, o.noise, rng);
      pairs.emplace_back(std::move(positive), std::move(anchor));
    }
    io::write_pairs(pairs, dir / "pairs.jsonl");
  } else {
    throw Error(ErrorCode::ValidationFailed, "unknown --kind '" + o.kind + "'");
  }
  out << "wrote synthetic " << o.kind << " data to " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure-memory engine: curated embedding/landmark retrieval with SLLE"};
  app.name("ragmem");
  app.require_subcommand(1);

  BuildDbOptions build_opts;
  auto* build = app.add_subcommand("build-db", "Curate a record pool into a memory database");
  build->add_option("--input", build_opts.input, "records.jsonl")->required();
  build->add_option("--landmarks", build_opts.landmarks,
                    "Landmark directory (default: next to --input)");
  build->add_option("--out", build_opts.out, "Output database directory")->required();
  build->add_option("--report", build_opts.report,
                    "Curation report path (default: <out>.curation.json)");
  build->add_option("--target-size", build_opts.target_size, "Final database size cap")
      ->check(CLI::PositiveNumber);
  build->add_option("--eps", build_opts.eps, "DBSCAN radius (cosine distance)")
      ->check(CLI::Range(0.0, 2.0));
  build->add_option("--min-pts", build_opts.min_pts, "DBSCAN core threshold")
      ->check(CLI::PositiveNumber);
  build->add_option("--radius", build_opts.radius, "Downsampling radius (cosine distance)")
      ->check(CLI::NonNegativeNumber);
  build->add_option("--cap", build_opts.cap, "Records per category")->check(CLI::PositiveNumber);
  build->add_option("--seed", build_opts.seed, "Random seed");

  QueryOptions query_opts;
  auto* q = app.add_subcommand("query", "SLLE retrieval for one embedding");
  q->add_option("--db", query_opts.db, "Database directory")->required();
  q->add_option("--embedding", query_opts.embedding, "JSON embedding file")->required();
  q->add_option("--k", query_opts.k, "Neighbors")->check(CLI::PositiveNumber);
  q->add_option("--alpha", query_opts.alpha, "Fusion weight of the reconstruction")
      ->check(CLI::Range(0.0, 1.0));
  q->add_option("--reg", query_opts.reg, "Gram regularization")->check(CLI::PositiveNumber);
  q->add_option("--mask-threshold", query_opts.threshold, "Soft mask binarization threshold")
      ->check(CLI::Range(0.0, 1.0));
  q->add_option("--out", query_opts.out, "Result JSON (default: stdout)");
  q->add_option("--save-landmark", query_opts.save_landmark, "Write the fused landmark (.png/.pbm)");

  EvalRetrievalOptions eval_opts;
  auto* ev = app.add_subcommand("eval-retrieval", "Top-k landmark retrieval accuracy");
  ev->add_option("--db", eval_opts.dbs, "Database directory (repeatable)")->required();
  ev->add_option("--queries", eval_opts.queries, "queries.jsonl")->required();
  ev->add_option("--landmarks", eval_opts.landmarks,
                 "Ground-truth landmark directory (default: next to --queries)");
  ev->add_option("--k", eval_opts.k, "Comma-separated k values");
  ev->add_option("--iou-threshold", eval_opts.iou_threshold, "Hit threshold (strict)");
  ev->add_option("--out", eval_opts.out, "Report JSON");
  ev->add_option("--table", eval_opts.table, "Also write the text table here");

  EvalInfoNceOptions nce_opts;
  auto* nce = app.add_subcommand("eval-infonce", "InfoNCE loss over embedding pairs");
  nce->add_option("--pairs", nce_opts.pairs, "pairs.jsonl")->required();
  nce->add_option("--tau", nce_opts.tau, "Temperature");
  nce->add_option("--out", nce_opts.out, "Result JSON");

  SweepKOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep-k", "SLLE sensitivity to the neighbor count");
  sweep->add_option("--db", sweep_opts.db, "Database directory")->required();
  sweep->add_option("--queries", sweep_opts.queries, "queries.jsonl")->required();
  sweep->add_option("--landmarks", sweep_opts.landmarks, "Ground-truth landmark directory");
  sweep->add_option("--k", sweep_opts.k, "Comma-separated K values");
  sweep->add_option("--alpha", sweep_opts.alpha, "Fusion weight")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--iou-threshold", sweep_opts.iou_threshold, "Hit threshold (strict)");
  sweep->add_option("--out", sweep_opts.out, "CSV output");

  ServeOptions serve_opts;
  auto* srv = app.add_subcommand("serve", "HTTP retrieval service");
  srv->add_option("--db", serve_opts.db, "Database directory")->required();
  srv->add_option("--bind", serve_opts.bind, "host:port");
  srv->add_option("--default-k", serve_opts.default_k, "Default neighbors")
      ->check(CLI::PositiveNumber);
  srv->add_option("--default-alpha", serve_opts.default_alpha, "Default fusion weight")
      ->check(CLI::Range(0.0, 1.0));
  srv->add_option("--max-k", serve_opts.max_k, "Largest k a request may ask for")
      ->check(CLI::PositiveNumber);
  srv->add_option("--dim", serve_opts.dim, "Pin the embedding dim (0: unpinned)");
  srv->add_option("--threads", serve_opts.threads, "Worker threads")->check(CLI::PositiveNumber);

  SynthOptions synth_opts;
  auto* syn = app.add_subcommand("synth", "Write seeded synthetic records/queries or pairs");
  syn->add_option("--kind", synth_opts.kind, "garment | pairs")
      ->check(CLI::IsMember({"garment", "pairs"}));
  syn->add_option("--out-dir", synth_opts.out_dir, "Output directory")->required();
  syn->add_option("--count", synth_opts.count, "Records (or pairs)")->check(CLI::PositiveNumber);
  syn->add_option("--queries", synth_opts.queries, "Queries (garment)");
  syn->add_option("--dim", synth_opts.dim, "Embedding dim")->check(CLI::PositiveNumber);
  syn->add_option("--side", synth_opts.side, "Landmark side in pixels");
  syn->add_option("--noise", synth_opts.noise, "Query / pair noise sigma");
  syn->add_option("--outlier-fraction", synth_opts.outlier_fraction, "Planted outliers")
      ->check(CLI::Range(0.0, 1.0));
  syn->add_option("--seed", synth_opts.seed, "Random seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; anything else is a usage error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*build) return build_db(build_opts, out);
    if (*q) return query(query_opts, out);
    if (*ev) return eval_retrieval_cmd(eval_opts, out);
    if (*nce) return eval_infonce(nce_opts, out);
    if (*sweep) return sweep_k(sweep_opts, out);
    if (*srv) return serve(serve_opts, out);
    if (*syn) return synth(synth_opts, out);
  } catch (const Error& e) {
    err << "error [" << code_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace ragmem::cli
