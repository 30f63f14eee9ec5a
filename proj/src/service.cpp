#include "solembed/service.hpp"

#include "httplib.h"
#include "solembed/detectors.hpp"
#include "solembed/ingestion.hpp"

namespace solembed {
namespace {

ApiResponse error(int status, std::string code, std::string message) {
  return {status, api_error(std::move(code), std::move(message))};
}

std::optional<Json> parse_object(std::string_view body) {
  auto j = Json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

}  // namespace

ApiService::ApiService(CorpusStore& store, MatrixCache& cache, ServiceConfig config)
    : store_(store), cache_(cache), config_(std::move(config)) {
  config_.thresholds.validate();
}

ApiResponse ApiService::validate(std::string_view body) const {
  auto req = parse_object(body);
  if (!req) return error(400, "bad_request", "request body must be a JSON object");
  auto source = req->find("source");
  if (source == req->end() || !source->is_string()) {
    return error(400, "bad_request", "\"source\" must be a string");
  }
  const auto& text = source->get_ref<const std::string&>();
  if (text.size() > config_.max_source_bytes) {
    return error(413, "too_large",
                 "source exceeds " + std::to_string(config_.max_source_bytes) + " bytes");
  }
  std::size_t top_k = config_.default_top_k;
  if (auto k = req->find("top_k"); k != req->end()) {
    if (!k->is_number_integer() || k->get<long long>() < 1) {
      return error(400, "bad_request", "\"top_k\" must be a positive integer");
    }
    top_k = k->get<std::size_t>();
  }
  auto snap = store_.snapshot();
  return {200, to_json(validate_contract(text, *snap, cache_, config_.thresholds, top_k))};
}

ApiResponse ApiService::stats() const {
  return {200, stats_json(*store_.snapshot(), config_.thresholds)};
}

ApiResponse ApiService::bugs() const { return {200, bugs_json(*store_.snapshot())}; }

ApiResponse ApiService::ingest(std::string_view body, std::optional<std::string_view> token) {
  if (!config_.admin_token || !token || *token != *config_.admin_token) {
    return error(401, "unauthorized", std::string("missing or wrong ") + kAdminTokenHeader + " header");
  }
  auto req = parse_object(body);
  if (!req) return error(400, "bad_request", "request body must be a JSON object");
  auto dir = req->find("dir");
  if (dir == req->end() || !dir->is_string()) return error(400, "bad_request", "\"dir\" must be a string");
  std::string glob = "*.sol";
  if (auto g = req->find("glob"); g != req->end()) {
    if (!g->is_string()) return error(400, "bad_request", "\"glob\" must be a string");
    glob = g->get<std::string>();
  }
  const std::filesystem::path root = dir->get<std::string>();
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    return error(400, "bad_request", "not a directory: " + root.string());
  }

  std::lock_guard lock(ingest_mutex_);
  auto update = update_model(FilesystemProvider(root, glob), store_);
  if (config_.store_dir && update.delta.added > 0) {
    try {
      save_snapshot(*store_.snapshot(), *config_.store_dir);
    } catch (const std::exception& e) {
      return error(500, "save_failed", e.what());
    }
  }
  return {200, to_json(update)};
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(ApiService& api) : impl_(std::make_unique<Impl>()) {
  auto& svr = impl_->server;
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  };
  // Bodies past this limit get a transport-level 413.
  svr.set_payload_max_length(api.config().max_source_bytes * 6 + (64 << 10));

  svr.Post("/api/validate", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.validate(req.body));
  });
  svr.Get("/api/stats", [&api, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, api.stats());
  });
  svr.Get("/api/bugs", [&api, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, api.bugs());
  });
  svr.Post("/api/corpus/ingest", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string_view> token;
    if (req.has_header(kAdminTokenHeader)) token = req.get_header_value(kAdminTokenHeader);
    reply(res, api.ingest(req.body, token));
  });

  svr.set_error_handler([reply](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    switch (res.status) {
      case 404: reply(res, error(404, "not_found", "no such endpoint")); break;
      case 405: reply(res, error(405, "method_not_allowed", "method not allowed")); break;
      case 413: reply(res, error(413, "too_large", "request body too large")); break;
      case 400: reply(res, error(400, "bad_request", "malformed request")); break;
      default: reply(res, error(res.status, "error", "request failed")); break;
    }
  });
  svr.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    reply(res, error(500, "internal", what));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace solembed
