#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "cbcast/kvs/node.hpp"

namespace httplib {
class Server;
}

namespace cbcast::kvs {

struct PeerAddress {
  ProcessId id = 0;
  std::string url;  // base URL, e.g. http://127.0.0.1:8101
};

struct NodeConfig {
  ProcessId self_id = 0;
  std::vector<PeerAddress> peers;
  std::string listen_host = "127.0.0.1";
  int listen_port = 0;  // 0 = pick any free port
  std::size_t batch_max = 8;

  std::size_t cluster_size() const { return peers.size() + 1; }

  /// The ids of self plus peers must be exactly {0..N-1}.
  void validate() const;
};

/// HTTP face of a NodeCore:
///   GET/PUT/DELETE /kv/{key}      client reads and writes
///   POST /internal/messages      peer ingress, {"msgs":[wire messages]}
///   GET /metrics                 delivery statistics
/// plus a drain thread that delivers queued peer messages and a sender
/// thread that POSTs outbound messages to every peer in batches (bounded
/// retry, fire-and-forget).
class KvsService {
 public:
  explicit KvsService(NodeConfig cfg);
  ~KvsService();

  KvsService(const KvsService&) = delete;
  KvsService& operator=(const KvsService&) = delete;

  /// Binds the listening socket; false on failure (e.g. port taken).
  bool bind();
  /// Resolved port, valid after a successful bind().
  int port() const { return port_; }

  /// Launches the server, drain, and sender threads. bind() must have
  /// succeeded.
  void start();
  void stop();

  /// Rewrites one peer's URL; only sensible between bind() and start(),
  /// when ports picked by the OS become known.
  void set_peer_url(ProcessId id, std::string url);

  NodeCore& core() { return core_; }
  const NodeConfig& config() const { return cfg_; }

 private:
  void setup_routes();
  void drain_main();
  void sender_main();

  NodeConfig cfg_;
  NodeCore core_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::thread drain_thread_;
  std::thread sender_thread_;
  std::atomic<bool> stopping_{false};
  std::atomic<bool> ready_{false};
  int port_ = -1;
};

}  // namespace cbcast::kvs
