#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "solembed/corpus_store.hpp"
#include "solembed/matrix_cache.hpp"
#include "solembed/report_json.hpp"
#include "solembed/similarity.hpp"

namespace solembed {

inline constexpr std::size_t kDefaultMaxSourceBytes = 1 << 20;
inline constexpr const char* kAdminTokenHeader = "X-Admin-Token";
inline constexpr const char* kAdminTokenEnv = "SOLEMBED_ADMIN_TOKEN";

struct ServiceConfig {
  Thresholds thresholds;
  std::size_t max_source_bytes = kDefaultMaxSourceBytes;
  std::size_t default_top_k = 5;
  /// Admin requests are refused unless a token is configured and presented.
  std::optional<std::string> admin_token;
  /// Where to save the store after an admin ingest, if anywhere.
  std::optional<std::filesystem::path> store_dir;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// The JSON API, independent of any transport.
///
///   POST /api/validate       {"source": "...", "top_k"?: n}  -> ValidationReport
///   GET  /api/stats                                          -> counts, version, d, thresholds
///   GET  /api/bugs                                           -> bug catalog
///   POST /api/corpus/ingest  {"dir": "...", "glob"?: "*.sol"} -> IngestDelta (admin)
///
/// Every non-2xx body is an ApiError.
class ApiService {
 public:
  ApiService(CorpusStore& store, MatrixCache& cache, ServiceConfig config);

  ApiResponse validate(std::string_view body) const;
  ApiResponse stats() const;
  ApiResponse bugs() const;
  ApiResponse ingest(std::string_view body, std::optional<std::string_view> token);

  const ServiceConfig& config() const { return config_; }

 private:
  CorpusStore& store_;
  MatrixCache& cache_;
  ServiceConfig config_;
  std::mutex ingest_mutex_;
};

/// HTTP/1.1 front end for an ApiService.
class HttpServer {
 public:
  explicit HttpServer(ApiService& api);
  ~HttpServer();

  /// Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  int bind_any_port(const std::string& host);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace solembed
