#include <doctest.h>

#include <chrono>
#include <functional>
#include <memory>
#include <thread>

#include <httplib.h>

#include "cbcast/kvs/command.hpp"
#include "cbcast/kvs/service.hpp"
#include "cbcast/trace.hpp"

using namespace cbcast;
using namespace cbcast::kvs;

namespace {

// Binds n services on loopback, wires their peer tables, and starts them.
struct HttpCluster {
  explicit HttpCluster(std::size_t n) {
    std::vector<NodeConfig> cfgs(n);
    for (std::size_t i = 0; i < n; ++i) {
      cfgs[i].self_id = static_cast<ProcessId>(i);
      // placeholder peers so validate() passes; URLs are patched after bind
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
          cfgs[i].peers.push_back(
              PeerAddress{static_cast<ProcessId>(j), "pending"});
        }
      }
    }
    // Two passes: bind everyone first to learn the ports, then start.
    for (std::size_t i = 0; i < n; ++i) {
      services.push_back(std::make_unique<KvsService>(cfgs[i]));
      REQUIRE(services[i]->bind());
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) {
          services[i]->set_peer_url(
              static_cast<ProcessId>(j),
              "http://127.0.0.1:" + std::to_string(services[j]->port()));
        }
      }
      services[i]->start();
    }
  }

  ~HttpCluster() {
    for (auto& s : services) s->stop();
  }

  httplib::Client client(std::size_t i) {
    httplib::Client c("127.0.0.1", services[i]->port());
    c.set_connection_timeout(2, 0);
    c.set_read_timeout(2, 0);
    return c;
  }

  std::vector<std::unique_ptr<KvsService>> services;
};

bool poll_until(const std::function<bool()>& pred,
                std::chrono::milliseconds budget = std::chrono::seconds(5)) {
  const auto deadline = std::chrono::steady_clock::now() + budget;
  while (std::chrono::steady_clock::now() < deadline) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return pred();
}

}  // namespace

TEST_CASE("three-node cluster over HTTP") {
  HttpCluster cluster(3);
  auto c0 = cluster.client(0);
  auto c1 = cluster.client(1);

  // write through node 0; the response carries the message clock
  auto put = c0.Put("/kv/a", Json(1).dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  CHECK(Json::parse(put->body).at("vc") == Json::array({1, 0, 0}));

  // local read is immediate
  auto got = c0.Get("/kv/a");
  REQUIRE(got);
  CHECK(got->status == 200);
  CHECK(Json::parse(got->body) == Json(1));

  // the write propagates to node 1
  CHECK(poll_until([&] {
    auto r = cluster.client(1).Get("/kv/a");
    return r && r->status == 200 && Json::parse(r->body) == Json(1);
  }));

  // missing keys are 404
  auto missing = c1.Get("/kv/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  // a malformed PUT body is 400
  auto bad = c0.Put("/kv/a", "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  // deleting on one node removes everywhere
  auto del = c1.Delete("/kv/a");
  REQUIRE(del);
  CHECK(del->status == 200);
  CHECK(poll_until([&] {
    auto r = cluster.client(0).Get("/kv/a");
    return r && r->status == 404;
  }));

  // metrics are served and finite
  auto metrics = c1.Get("/metrics");
  REQUIRE(metrics);
  CHECK(metrics->status == 200);
  const Json m = Json::parse(metrics->body);
  CHECK(m.at("delivered_count").get<std::uint64_t>() >= 1);
  CHECK(m.at("mean_dq_after_delivery").get<double>() >= 0.0);
  CHECK(m.contains("queued_count"));
}

TEST_CASE("peer ingress endpoint validates and buffers") {
  // one real node (id 2); its peers are unreachable, which only the sender
  // thread notices
  NodeConfig cfg;
  cfg.self_id = 2;
  cfg.peers = {PeerAddress{0, "http://127.0.0.1:1"},
               PeerAddress{1, "http://127.0.0.1:1"}};
  KvsService service(cfg);
  REQUIRE(service.bind());
  service.start();

  httplib::Client client("127.0.0.1", service.port());
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);

  auto wire = [](ProcessId sender, std::vector<std::uint64_t> clock,
                 const KvCommand& cmd) {
    return message_to_wire(Message<Json>{VectorClock(std::move(clock)), sender,
                                         cmd.to_json()});
  };

  // malformed body and malformed message
  CHECK(client.Post("/internal/messages", "{oops", "application/json")->status ==
        400);
  CHECK(client
            .Post("/internal/messages", Json{{"msgs", {Json{{"vc", {1, 0, 0}}}}}}.dump(),
                  "application/json")
            ->status == 400);

  // wrong clock length
  const Json short_msg =
      Json{{"msgs", {wire(0, {1, 0}, KvCommand::put("x", Json(1)))}}};
  CHECK(client.Post("/internal/messages", short_msg.dump(),
                    "application/json")
            ->status == 422);

  // a message from the future is accepted but stays buffered
  const Json future =
      Json{{"msgs", {wire(0, {2, 0, 0}, KvCommand::put("x", Json("v2")))}}};
  auto accepted = client.Post("/internal/messages", future.dump(),
                              "application/json");
  REQUIRE(accepted);
  CHECK(accepted->status == 200);
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(client.Get("/kv/x")->status == 404);
  CHECK(poll_until([&] {
    return Json::parse(client.Get("/metrics")->body).at("queued_count") == 1;
  }));

  // posting the same message again is idempotent
  client.Post("/internal/messages", future.dump(), "application/json");
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(Json::parse(client.Get("/metrics")->body).at("queued_count") == 1);

  // once the dependency arrives, both deliver in causal order
  const Json dependency =
      Json{{"msgs", {wire(0, {1, 0, 0}, KvCommand::put("x", Json("v1")))}}};
  CHECK(client.Post("/internal/messages", dependency.dump(),
                    "application/json")
            ->status == 200);
  CHECK(poll_until([&] {
    auto r = client.Get("/kv/x");
    return r && r->status == 200 && Json::parse(r->body) == Json("v2");
  }));
  CHECK(Json::parse(client.Get("/metrics")->body).at("queued_count") == 0);

  service.stop();
}
