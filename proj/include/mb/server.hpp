#pragma once

#include <memory>
#include <string>

#include "mb/pipeline.hpp"

namespace mb {

/// JSON over HTTP for the corpus explorer. Training runs as background jobs.
class ApiServer {
 public:
  explicit ApiServer(Pipeline& pipeline);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until `stop()`. Requires a prior `bind`.
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits `host:port`; throws on a malformed address.
std::pair<std::string, int> parse_bind_address(std::string_view address);

}  // namespace mb
