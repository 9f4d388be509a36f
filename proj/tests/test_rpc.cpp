/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include <httplib.h>

#include <mutex>

#include "support.hpp"

#include <waku/rpc.hpp>

using namespace waku;
using waku::test::make_message;
using waku::test::relay_config;

namespace {
  Json call(RpcService &rpc, const std::string &method, Json params = Json::array(),
            Json id = 1) {
    Json req = {{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}};
    std::optional<Json> out;
    rpc.handle(req, [&](Json r) { out = std::move(r); });
    REQUIRE(out);
    return *out;
  }

  Json message_json(const std::string &content, const std::string &text) {
    return message_to_json(make_message(content, text));
  }

  NodeConfig full_node() {
    auto c = relay_config({"pub1"});
    c.store = true;
    c.persist_messages = true;
    c.filter = true;
    c.lightpush = true;
    return c;
  }
}  // namespace

TEST_CASE("debug info reports identity and capabilities") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(full_node(), "A");
  RpcService rpc(sim.node(a), {"/ip4/0.0.0.0/tcp/60000/p2p/" + a.str()});
  auto r = call(rpc, "get_waku_v2_debug_v1_info");
  CHECK(r.at("jsonrpc") == "2.0");
  CHECK(r.at("id") == 1);
  auto &info = r.at("result");
  CHECK(info.at("peerId") == a.str());
  CHECK(info.at("capabilities")
        == Json{{"relay", "full"}, {"store", "full"}, {"filter", "full"}, {"lightpush", "full"}});
  CHECK(info.at("listenAddresses").size() == 1);
  CHECK(info.at("peers").empty());
}

TEST_CASE("only methods of mounted protocols are registered") {
  Sim sim(SimConfig{});
  auto bare = sim.add_node(NodeConfig{}, "bare");
  RpcService rpc(sim.node(bare));
  CHECK(rpc.methods() == std::vector<std::string>{"get_waku_v2_debug_v1_info"});
  auto r = call(rpc, "post_waku_v2_relay_v1_message", {"pub1", message_json("c", "x")});
  CHECK(r.at("error").at("code") == rpc_error::method_not_found);

  auto full = sim.add_node(full_node(), "full");
  RpcService all(sim.node(full));
  CHECK(all.methods().size() == 6);
}

TEST_CASE("json-rpc envelope errors") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(relay_config({"pub1"}), "A");
  RpcService rpc(sim.node(a));
  auto text = [&](std::string body) {
    std::optional<Json> out;
    rpc.handle_text(body, [&](Json r) { out = std::move(r); });
    REQUIRE(out);
    return *out;
  };
  CHECK(text("{nope").at("error").at("code") == rpc_error::parse_error);
  CHECK(text("[]").at("error").at("code") == rpc_error::invalid_request);
  CHECK(text(R"({"jsonrpc":"1.0","id":1,"method":"x"})").at("error").at("code")
        == rpc_error::invalid_request);
  CHECK(text(R"({"jsonrpc":"2.0","id":1,"method":"nope"})").at("error").at("code")
        == rpc_error::method_not_found);
  CHECK(text(R"({"jsonrpc":"2.0","method":"nope"})").is_null());
  CHECK(text(R"({"jsonrpc":"2.0","id":"s","method":"get_waku_v2_relay_v1_messages","params":[]})")
            .at("error")
            .at("code")
        == rpc_error::invalid_params);
  auto bad_msg = call(rpc, "post_waku_v2_relay_v1_message", {"pub1", {{"payload", "!!"}}}, "x");
  CHECK(bad_msg.at("id") == "x");
  CHECK(bad_msg.at("error").at("code") == rpc_error::invalid_params);
}

TEST_CASE("loopback publish then poll returns the message once") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(relay_config({"pub1"}), "A");
  RpcService rpc(sim.node(a));
  auto msg = message_json("content1", "hello");
  CHECK(call(rpc, "post_waku_v2_relay_v1_message", {"pub1", msg}).at("result") == true);
  auto got = call(rpc, "get_waku_v2_relay_v1_messages", {"pub1"}).at("result");
  REQUIRE(got.size() == 1);
  CHECK(message_from_json(got[0]) == make_message("content1", "hello"));
  CHECK(call(rpc, "get_waku_v2_relay_v1_messages", {"pub1"}).at("result") == Json::array());
}

TEST_CASE("the poll buffer drains exactly once in delivery order") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(relay_config({"pub1"}), "A");
  auto b = sim.add_node(relay_config({"pub1"}), "B");
  sim.connect(a, b);
  sim.run_until_idle();
  RpcService rpc(sim.node(b));
  std::vector<WakuMessage> delivered;
  sim.node(b).on_delivery([&](const PubsubTopic &, const WakuMessage &m, const MessageDigest &) {
    delivered.push_back(m);
  });
  std::vector<WakuMessage> polled;
  for (int round = 0; round < 5; ++round) {
    for (int i = 0; i <= round; ++i) {
      sim.publish(a, PubsubTopic("pub1"),
                  make_message("c", std::to_string(round) + "-" + std::to_string(i)));
    }
    sim.run_until_idle();
    auto page = call(rpc, "get_waku_v2_relay_v1_messages", {"pub1"});
    for (const auto &j : page.at("result")) {
      polled.push_back(message_from_json(j));
    }
  }
  CHECK(delivered.size() == 15);
  CHECK(polled == delivered);
}

TEST_CASE("the poll buffer keeps the newest entries") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(relay_config({"pub1"}), "A");
  RpcService rpc(sim.node(a));
  for (std::size_t i = 0; i < kPollBufferCap + 6; ++i) {
    sim.node(a).publish(PubsubTopic("pub1"), make_message("c", std::to_string(i)));
  }
  auto got = call(rpc, "get_waku_v2_relay_v1_messages", {"pub1"}).at("result");
  REQUIRE(got.size() == kPollBufferCap);
  CHECK(message_from_json(got[0]).payload == to_bytes("6"));
}

TEST_CASE("publishing over rpc matches publishing in process") {
  auto run = [](bool via_rpc) {
    Sim sim(SimConfig{});
    auto a = sim.add_node(relay_config({"pub1"}), "A");
    auto b = sim.add_node(relay_config({"pub1"}), "B");
    auto c = sim.add_node(relay_config({"pub1"}), "C");
    sim.connect(a, b);
    sim.connect(b, c);
    sim.run_until_idle();
    RpcService rpc(sim.node(a));
    auto msg = make_message("content1", "same");
    if (via_rpc) {
      call(rpc, "post_waku_v2_relay_v1_message", {"pub1", message_to_json(msg)});
    } else {
      sim.node(a).publish(PubsubTopic("pub1"), msg);
    }
    return sim.run_until_idle().text();
  };
  CHECK(run(true) == run(false));
}

TEST_CASE("store queries answer locally or from a remote peer") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(full_node(), "A");
  NodeConfig lc;
  lc.store = true;
  auto c = sim.add_node(lc, "C");
  sim.connect(a, c);
  sim.run_until_idle();
  sim.publish(a, PubsubTopic("pub1"), make_message("content1", "m1", 1));
  sim.publish(a, PubsubTopic("pub1"), make_message("content2", "m2", 2));
  sim.run_until_idle();

  Json query = {{"pubsubTopic", "pub1"}, {"contentFilters", {"content1"}}};
  RpcService local(sim.node(a));
  auto r = call(local, "get_waku_v2_store_v1_messages", {query}).at("result");
  REQUIRE(r.at("messages").size() == 1);
  CHECK(r.at("cursor").is_null());
  auto in_process = sim.node(a).query_local(query_from_json(query));
  CHECK(r == response_to_json(in_process));

  RpcService remote(sim.node(c));
  std::optional<Json> out;
  remote.handle({{"jsonrpc", "2.0"}, {"id", 3}, {"method", "get_waku_v2_store_v1_messages"},
                 {"params", {query}}},
                [&](Json j) { out = std::move(j); });
  CHECK_FALSE(out);
  sim.run_until_idle();
  REQUIRE(out);
  CHECK(out->at("result") == r);

  NodeConfig lonely;
  lonely.store = true;
  auto d = sim.add_node(lonely, "D");
  RpcService none(sim.node(d));
  CHECK(call(none, "get_waku_v2_store_v1_messages", {query}).at("error").at("code")
        == rpc_error::server_error);
}

TEST_CASE("filter subscriptions over rpc feed the poll buffer") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(full_node(), "A");
  NodeConfig lc;
  lc.filter_light = true;
  auto c = sim.add_node(lc, "C");
  sim.connect(a, c);
  sim.run_until_idle();
  RpcService rpc(sim.node(c));

  std::optional<Json> sub;
  rpc.handle({{"jsonrpc", "2.0"}, {"id", 1}, {"method", "post_waku_v2_filter_v1_subscription"},
              {"params", {Json::array({{{"contentTopic", "content1"}}}), "pub1"}}},
             [&](Json j) { sub = std::move(j); });
  sim.run_until_idle();
  REQUIRE(sub);
  auto id = sub->at("result").get<std::string>();
  CHECK(id.size() == 16);

  sim.publish(a, PubsubTopic("pub1"), make_message("content1", "pushed"));
  sim.publish(a, PubsubTopic("pub1"), make_message("content2", "not pushed"));
  sim.run_until_idle();
  auto methods = rpc.methods();
  CHECK(std::find(methods.begin(), methods.end(), "get_waku_v2_relay_v1_messages")
        == methods.end());

  std::optional<Json> del;
  rpc.handle({{"jsonrpc", "2.0"}, {"id", 2}, {"method", "delete_waku_v2_filter_v1_subscription"},
              {"params", {id}}},
             [&](Json j) { del = std::move(j); });
  sim.run_until_idle();
  REQUIRE(del);
  CHECK(del->at("result") == true);
  CHECK(sim.node(a).filter_server()->size() == 0);
  CHECK(call(rpc, "delete_waku_v2_filter_v1_subscription", {id}).at("error").at("code")
        == rpc_error::server_error);
}

TEST_CASE("the http front end serves json-rpc") {
  Sim sim(SimConfig{});
  auto a = sim.add_node(relay_config({"pub1"}), "A");
  RpcService rpc(sim.node(a));
  std::mutex loop;
  RpcHttpServer http(rpc, [&](std::function<void()> fn) {
    std::lock_guard lock(loop);
    fn();
  });
  http.start(*Ipv4::parse("127.0.0.1"), 0);
  REQUIRE(http.port() != 0);

  httplib::Client client("127.0.0.1", http.port());
  auto res = client.Post("/", R"({"jsonrpc":"2.0","id":7,"method":"get_waku_v2_debug_v1_info"})",
                         "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  auto body = Json::parse(res->body);
  CHECK(body.at("id") == 7);
  CHECK(body.at("result").at("peerId") == a.str());

  auto note = client.Post("/", R"({"jsonrpc":"2.0","method":"get_waku_v2_debug_v1_info"})",
                          "application/json");
  REQUIRE(note);
  CHECK(note->status == 204);

  RpcHttpServer clash(rpc, [](std::function<void()> fn) { fn(); });
  CHECK_THROWS_AS(clash.start(*Ipv4::parse("127.0.0.1"), http.port()), StartupError);
  http.stop();
  http.stop();
}
