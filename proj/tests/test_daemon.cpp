/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include <httplib.h>

#include <chrono>
#include <thread>

#include "support.hpp"

#include <waku/daemon.hpp>

using namespace waku;
using waku::test::make_message;
using waku::test::TempDir;

namespace {
  NodeConfig daemon_config(const TempDir &dir, std::vector<std::string> args) {
    args.push_back("--listen-port:0");
    args.push_back("--data-dir:" + dir.path.string());
    return parse_config(args);
  }

  bool wait_for(const std::function<bool()> &cond,
                std::chrono::milliseconds limit = std::chrono::seconds(10)) {
    auto deadline = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < deadline) {
      if (cond()) {
        return true;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return cond();
  }

  std::size_t peer_count(Daemon &d) {
    std::size_t n = 0;
    d.with_node([&](Node &node) { n = node.peers().size(); });
    return n;
  }

  Multiaddr loopback(Daemon &d) {
    return parse_multiaddr("/ip4/127.0.0.1/tcp/" + std::to_string(d.listen_port()) + "/p2p/"
                           + d.id().str());
  }
}  // namespace

TEST_CASE("identity persists in the data directory") {
  TempDir dir;
  auto cfg = daemon_config(dir, {});
  auto first = load_or_create_identity(cfg);
  CHECK(std::filesystem::exists(dir.path / "nodekey"));
  auto second = load_or_create_identity(cfg);
  CHECK(first.public_key() == second.public_key());

  cfg.nodekey = std::string(64, '1');
  CHECK(load_or_create_identity(cfg).public_key()
        == SigningKey::from_seed(from_hex(std::string(64, '1'))).public_key());

  cfg.data_dir.clear();
  cfg.nodekey.reset();
  CHECK(load_or_create_identity(cfg).public_key() != first.public_key());
}

TEST_CASE("two daemons relay a message over tcp") {
  TempDir da, db;
  Daemon a(daemon_config(da, {"--relay:true", "--topics:pub1"}));
  a.start();
  auto bcfg = daemon_config(db, {"--relay:true", "--topics:pub1"});
  bcfg.staticnode.push_back(loopback(a));
  Daemon b(bcfg);

  std::mutex mu;
  std::vector<WakuMessage> got;
  b.start();
  b.with_node([&](Node &n) {
    n.on_delivery([&](const PubsubTopic &, const WakuMessage &m, const MessageDigest &) {
      std::lock_guard lock(mu);
      got.push_back(m);
    });
  });
  REQUIRE(wait_for([&] { return peer_count(a) == 1 && peer_count(b) == 1; }));
  // subscriptions travel after the handshake
  REQUIRE(wait_for([&] {
    bool ready = false;
    a.with_node([&](Node &n) {
      auto *t = n.relay()->topic(PubsubTopic("pub1"));
      ready = t && !t->mesh_peers.empty();
    });
    return ready;
  }));

  auto msg = make_message("content1", "over tcp");
  a.with_node([&](Node &n) { n.publish(PubsubTopic("pub1"), msg); });
  REQUIRE(wait_for([&] {
    std::lock_guard lock(mu);
    return !got.empty();
  }));
  {
    std::lock_guard lock(mu);
    CHECK(got == std::vector<WakuMessage>{msg});
  }
  b.stop();
  REQUIRE(wait_for([&] { return peer_count(a) == 0; }));
  a.stop();
}

TEST_CASE("a dial to the wrong peer id is dropped") {
  TempDir da, db;
  Daemon a(daemon_config(da, {"--relay:true"}));
  a.start();
  Daemon b(daemon_config(db, {"--relay:true"}));
  b.start();
  auto addr = loopback(a);
  addr.peer = b.id();
  b.dial(addr);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  CHECK(peer_count(b) == 0);
  b.stop();
  a.stop();
}

TEST_CASE("the archive snapshot survives a restart") {
  TempDir dir;
  auto cfg = daemon_config(dir, {"--relay:true", "--topics:pub1", "--store:true",
                                 "--persist-messages:true", "--store-capacity:10"});
  std::vector<StoredMessage> before;
  {
    Daemon d(cfg);
    d.start();
    d.with_node([&](Node &n) {
      n.publish(PubsubTopic("pub1"), make_message("content1", "kept", 1));
      before = n.archive()->contents();
    });
    d.stop();
  }
  REQUIRE(before.size() == 1);
  Daemon again(cfg);
  again.start();
  again.with_node([&](Node &n) { CHECK(n.archive()->contents() == before); });
  again.stop();
}

TEST_CASE("stop is prompt and idempotent") {
  TempDir dir;
  Daemon d(daemon_config(dir, {}));
  d.start();
  auto t0 = std::chrono::steady_clock::now();
  d.stop();
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));
  d.stop();
}

TEST_CASE("start errors are startup errors") {
  TempDir dir;
  Daemon bad(daemon_config(dir, {"--filter:true"}));
  CHECK_THROWS_AS(bad.start(), StartupError);

  TempDir d1, d2;
  Daemon first(daemon_config(d1, {}));
  first.start();
  auto cfg = daemon_config(d2, {});
  cfg.listen_port = first.listen_port();
  Daemon clash(cfg);
  CHECK_THROWS_AS(clash.start(), StartupError);
  first.stop();
}

TEST_CASE("rpc is served over http when enabled") {
  TempDir dir;
  auto cfg = daemon_config(dir, {"--relay:true", "--topics:pub1", "--rpc:true"});
  // ephemeral, so parallel test runs do not collide
  cfg.rpc_port = 0;
  Daemon d(cfg);
  d.start();
  REQUIRE(d.rpc_port() != 0);
  httplib::Client client("127.0.0.1", d.rpc_port());
  auto post = [&](const Json &body) {
    auto res = client.Post("/", body.dump(), "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    return Json::parse(res->body);
  };
  auto info = post({{"jsonrpc", "2.0"}, {"id", 1}, {"method", "get_waku_v2_debug_v1_info"}});
  CHECK(info.at("result").at("peerId") == d.id().str());
  auto msg = message_to_json(make_message("content1", "rpc"));
  CHECK(post({{"jsonrpc", "2.0"}, {"id", 2}, {"method", "post_waku_v2_relay_v1_message"},
              {"params", {"pub1", msg}}})
            .at("result")
        == true);
  auto got = post({{"jsonrpc", "2.0"}, {"id", 3}, {"method", "get_waku_v2_relay_v1_messages"},
                   {"params", {"pub1"}}});
  CHECK(got.at("result") == Json::array({msg}));
  d.stop();
}
