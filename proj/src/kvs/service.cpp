#include "cbcast/kvs/service.hpp"

#include <algorithm>
#include <stdexcept>

#include <httplib.h>

#include "cbcast/trace.hpp"

namespace cbcast::kvs {

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

NodeConfig validated(NodeConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

void NodeConfig::validate() const {
  const std::size_t n = cluster_size();
  std::vector<bool> seen(n, false);
  auto mark = [&](ProcessId id) {
    if (id >= n || seen[id]) {
      throw std::invalid_argument(
          "node ids must form exactly {0.." + std::to_string(n - 1) +
          "}; bad or duplicate id " + std::to_string(id));
    }
    seen[id] = true;
  };
  mark(self_id);
  for (const PeerAddress& p : peers) {
    mark(p.id);
    if (p.url.empty()) {
      throw std::invalid_argument("peer " + std::to_string(p.id) +
                                  " has an empty URL");
    }
  }
  if (batch_max == 0) {
    throw std::invalid_argument("batch_max must be at least 1");
  }
}

KvsService::KvsService(NodeConfig cfg)
    : cfg_(validated(std::move(cfg))),
      core_(cfg_.cluster_size(), cfg_.self_id),
      server_(std::make_unique<httplib::Server>()) {
  setup_routes();
}

KvsService::~KvsService() { stop(); }

void KvsService::setup_routes() {
  auto guard = [this](httplib::Response& res) {
    if (!ready_.load()) {
      reply_json(res, 503, Json{{"error", "node not ready"}});
      return false;
    }
    return true;
  };

  server_->Get("/kv/:key", [this, guard](const httplib::Request& req,
                                         httplib::Response& res) {
    if (!guard(res)) return;
    const std::string key = req.path_params.at("key");
    auto value = core_.get(key);
    if (!value) {
      reply_json(res, 404, Json{{"error", "key not found"}});
      return;
    }
    reply_json(res, 200, *value);
  });

  server_->Put("/kv/:key", [this, guard](const httplib::Request& req,
                                         httplib::Response& res) {
    if (!guard(res)) return;
    const std::string key = req.path_params.at("key");
    Json value = Json::parse(req.body, nullptr, false);
    if (value.is_discarded()) {
      reply_json(res, 400, Json{{"error", "body is not valid JSON"}});
      return;
    }
    const VectorClock vc = core_.put(key, std::move(value));
    reply_json(res, 200, Json{{"vc", vc.entries()}});
  });

  server_->Delete("/kv/:key", [this, guard](const httplib::Request& req,
                                            httplib::Response& res) {
    if (!guard(res)) return;
    const std::string key = req.path_params.at("key");
    const VectorClock vc = core_.erase(key);
    reply_json(res, 200, Json{{"vc", vc.entries()}});
  });

  server_->Post("/internal/messages", [this, guard](const httplib::Request& req,
                                                    httplib::Response& res) {
    if (!guard(res)) return;
    Json body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("msgs") ||
        !body.at("msgs").is_array()) {
      reply_json(res, 400, Json{{"error", "expected {\"msgs\":[...]}"}});
      return;
    }
    std::vector<Message<Json>> msgs;
    for (const Json& wire : body.at("msgs")) {
      Message<Json> m;
      try {
        m = message_from_wire(wire);
      } catch (const std::invalid_argument& e) {
        reply_json(res, 400, Json{{"error", e.what()}});
        return;
      }
      if (m.vc.size() != core_.cluster_size()) {
        reply_json(res, 422,
                   Json{{"error", "clock length " + std::to_string(m.vc.size()) +
                                      " does not match cluster size " +
                                      std::to_string(core_.cluster_size())}});
        return;
      }
      msgs.push_back(std::move(m));
    }
    // Acceptance, not delivery: enqueue and let the drain thread deliver.
    for (const Message<Json>& m : msgs) {
      core_.receive_message(m);
    }
    reply_json(res, 200, Json{{"accepted", msgs.size()}});
  });

  server_->Get("/metrics", [this, guard](const httplib::Request&,
                                         httplib::Response& res) {
    if (!guard(res)) return;
    reply_json(res, 200, core_.metrics().to_json());
  });
}

bool KvsService::bind() {
  if (cfg_.listen_port == 0) {
    port_ = server_->bind_to_any_port(cfg_.listen_host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(cfg_.listen_host, cfg_.listen_port)) {
    return false;
  }
  port_ = cfg_.listen_port;
  return true;
}

void KvsService::start() {
  if (port_ < 0) {
    throw std::logic_error("start() before a successful bind()");
  }
  ready_.store(true);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  drain_thread_ = std::thread([this] { drain_main(); });
  sender_thread_ = std::thread([this] { sender_main(); });
}

void KvsService::set_peer_url(ProcessId id, std::string url) {
  for (PeerAddress& peer : cfg_.peers) {
    if (peer.id == id) {
      peer.url = std::move(url);
      return;
    }
  }
  throw std::invalid_argument("no peer with id " + std::to_string(id));
}

void KvsService::stop() {
  if (stopping_.exchange(true)) {
    return;
  }
  ready_.store(false);
  server_->stop();
  core_.poke();
  if (server_thread_.joinable()) server_thread_.join();
  if (drain_thread_.joinable()) drain_thread_.join();
  if (sender_thread_.joinable()) sender_thread_.join();
}

void KvsService::drain_main() {
  using namespace std::chrono_literals;
  while (!stopping_.load()) {
    if (!core_.deliver_apply_one()) {
      core_.wait_for_change(50ms);
    }
  }
}

void KvsService::sender_main() {
  using namespace std::chrono_literals;
  while (!stopping_.load()) {
    auto batch = core_.take_outbound(cfg_.batch_max);
    if (batch.empty()) {
      core_.wait_for_change(50ms);
      continue;
    }
    Json msgs = Json::array();
    for (const Message<Json>& m : batch) {
      msgs.push_back(message_to_wire(m));
    }
    const std::string body = Json{{"msgs", msgs}}.dump();
    for (const PeerAddress& peer : cfg_.peers) {
      for (int attempt = 0; attempt < 3; ++attempt) {
        httplib::Client client(peer.url);
        client.set_connection_timeout(2, 0);
        client.set_read_timeout(2, 0);
        auto res = client.Post("/internal/messages", body, "application/json");
        if (res && res->status == 200) break;
        std::this_thread::sleep_for(25ms);
        // Fire-and-forget past the last attempt; the transport is assumed
        // reliable (TCP) for liveness, and safety never depends on it.
      }
    }
  }
}

}  // namespace cbcast::kvs
