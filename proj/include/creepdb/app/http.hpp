#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "creepdb/error.hpp"
#include "creepdb/store/store.hpp"

namespace creepdb::app {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Query parameters as received; repeated keys are joined with ','.
using QueryParams = std::multimap<std::string, std::string>;

/// Parses the record filter parameters (material, category, t_min_K,
/// t_max_K, s_min_MPa, s_max_MPa, verdict). Throws Precondition whose detail
/// starts with the offending parameter name.
store::RecordFilter filter_from_params(const QueryParams& params);

/// The read/review API over one store. `handle` is transport independent so
/// it can be exercised without sockets; `serve` binds it to a listener.
class ApiService {
 public:
  explicit ApiService(store::Store& store) : store_(store) {}

  HttpResponse handle(const std::string& method, const std::string& path, const QueryParams& params,
                      const std::string& body = {}) const;

 private:
  HttpResponse get_records(const QueryParams& params) const;
  HttpResponse get_curve(const std::string& id) const;
  HttpResponse get_paper(const std::string& doi) const;
  HttpResponse get_stats(const QueryParams& params) const;
  HttpResponse get_export(const std::string& format, const QueryParams& params) const;
  HttpResponse post_review(const std::string& body) const;

  store::Store& store_;
};

/// Maps a library error onto a status code: Precondition/ParseError 400,
/// NotFound/UnknownDoi 404, Conflict 409, otherwise 500.
int status_for(ErrorCode code);

class HttpServer {
 public:
  explicit HttpServer(store::Store& store);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace creepdb::app
