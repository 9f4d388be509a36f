/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/rpc.hpp>

#include <httplib.h>

#include <chrono>
#include <future>
#include <thread>

#include <waku/log.hpp>

namespace waku {

  namespace {
    constexpr auto kHttpReplyTimeout = std::chrono::seconds(30);

    std::string_view mode_name(Mode m) {
      return m == Mode::full ? "full" : "light";
    }

    const Json &param(const Json &params, std::size_t i, const char *name) {
      if (!params.is_array() || params.size() <= i) {
        throw InvalidArgument(std::string("missing parameter '") + name + "'");
      }
      return params[i];
    }

    PubsubTopic topic_param(const Json &params, std::size_t i) {
      const auto &t = param(params, i, "topic");
      if (!t.is_string()) {
        throw InvalidArgument("topic must be a string");
      }
      return PubsubTopic(t.get<std::string>());
    }

    ContentFilter filter_param(const Json &params, std::size_t i) {
      const auto &cf = param(params, i, "contentFilters");
      if (!cf.is_array()) {
        throw InvalidArgument("contentFilters must be an array");
      }
      ContentFilter f;
      for (const auto &e : cf) {
        if (e.is_string()) {
          f.content_topics.push_back(e.get<std::string>());
        } else if (e.is_object() && e.contains("contentTopic")
                   && e.at("contentTopic").is_string()) {
          f.content_topics.push_back(e.at("contentTopic").get<std::string>());
        } else {
          throw InvalidArgument(
              "contentFilters entries must be strings or {contentTopic} objects");
        }
      }
      return f;
    }
  }  // namespace

  Json rpc_error_response(const Json &id, int code, const std::string &message) {
    return {{"jsonrpc", "2.0"}, {"id", id}, {"error", {{"code", code}, {"message", message}}}};
  }

  RpcService::RpcService(Node &node, std::vector<std::string> listen_addresses)
      : node_(node), listen_addresses_(std::move(listen_addresses)) {
    const auto &caps = node_.capabilities();

    node_.on_delivery([this](const PubsubTopic &t, const WakuMessage &m, const MessageDigest &) {
      buffer(t, m);
    });
    node_.on_filter_push(
        [this](const std::string &, const PubsubTopic &t, const WakuMessage &m) { buffer(t, m); });

    methods_["get_waku_v2_debug_v1_info"] = [this](const Json &, const Reply &result,
                                                   const auto &) {
      Json protocols = Json::object();
      for (const auto &[p, m] : node_.capabilities().protocols) {
        protocols[std::string(protocol_name(p))] = mode_name(m);
      }
      Json peers = Json::array();
      for (const auto &p : node_.peers()) {
        peers.push_back(p.str());
      }
      result({{"peerId", node_.id().str()},
              {"capabilities", protocols},
              {"listenAddresses", listen_addresses_},
              {"peers", peers}});
    };

    if (caps.has(Protocol::relay)) {
      methods_["post_waku_v2_relay_v1_message"] = [this](const Json &params, const Reply &result,
                                                         const auto &) {
        auto topic = topic_param(params, 0);
        auto msg = message_from_json(param(params, 1, "message"));
        node_.publish(topic, msg);
        result(true);
      };
      methods_["get_waku_v2_relay_v1_messages"] = [this](const Json &params, const Reply &result,
                                                         const auto &) {
        auto topic = topic_param(params, 0);
        Json out = Json::array();
        auto it = poll_.find(topic);
        if (it != poll_.end()) {
          for (const auto &m : it->second) {
            out.push_back(message_to_json(m));
          }
          poll_.erase(it);
        }
        result(out);
      };
    }

    if (caps.has(Protocol::store)) {
      methods_["get_waku_v2_store_v1_messages"] = [this](const Json &params, const Reply &result,
                                                         const auto &fail) {
        auto q = query_from_json(param(params, 0, "query"));
        bool explicit_peer = params.is_array() && params.size() > 1;
        if (node_.archive() && !explicit_peer) {
          result(response_to_json(node_.query_local(q)));
          return;
        }
        auto server = pick_server(Protocol::store, params, 1);
        if (!server) {
          fail(rpc_error::server_error, "no connected store peer");
          return;
        }
        node_.store_query(*server, q, [result, fail](Result<HistoryResponse> r) {
          if (r.ok()) {
            result(response_to_json(r.value()));
          } else {
            fail(rpc_error::server_error, r.error());
          }
        });
      };
    }

    if (caps.has(Protocol::filter)) {
      methods_["post_waku_v2_filter_v1_subscription"] =
          [this](const Json &params, const Reply &result, const auto &fail) {
            auto filter = filter_param(params, 0);
            auto topic = topic_param(params, 1);
            auto server = pick_server(Protocol::filter, params, 2);
            if (!server) {
              fail(rpc_error::server_error, "no connected filter peer");
              return;
            }
            auto peer = *server;
            node_.filter_subscribe(peer, topic, filter,
                                   [this, peer, result, fail](Result<std::string> r) {
                                     if (!r.ok()) {
                                       fail(rpc_error::server_error, r.error());
                                       return;
                                     }
                                     filter_servers_.insert_or_assign(r.value(), peer);
                                     result(r.value());
                                   });
          };
      methods_["delete_waku_v2_filter_v1_subscription"] =
          [this](const Json &params, const Reply &result, const auto &fail) {
            const auto &idj = param(params, 0, "id");
            if (!idj.is_string()) {
              throw InvalidArgument("id must be a string");
            }
            auto id = idj.get<std::string>();
            auto it = filter_servers_.find(id);
            if (it == filter_servers_.end()) {
              fail(rpc_error::server_error, "no such subscription");
              return;
            }
            auto peer = it->second;
            node_.filter_unsubscribe(peer, id, [this, id, result, fail](Result<Ack> r) {
              if (!r.ok()) {
                fail(rpc_error::server_error, r.error());
                return;
              }
              filter_servers_.erase(id);
              result(true);
            });
          };
    }
  }

  std::vector<std::string> RpcService::methods() const {
    std::vector<std::string> out;
    for (const auto &[name, m] : methods_) {
      out.push_back(name);
    }
    return out;
  }

  void RpcService::buffer(const PubsubTopic &topic, const WakuMessage &msg) {
    auto &q = poll_[topic];
    q.push_back(msg);
    while (q.size() > kPollBufferCap) {
      q.pop_front();
    }
  }

  std::optional<PeerId> RpcService::pick_server(Protocol p, const Json &params,
                                                std::size_t index) const {
    if (params.is_array() && params.size() > index) {
      const auto &v = params[index];
      if (!v.is_string()) {
        throw InvalidArgument("peer must be a string");
      }
      PeerId peer(v.get<std::string>());
      auto caps = node_.remote_capabilities(peer);
      if (!caps || !caps->serves(p)) {
        return std::nullopt;
      }
      return peer;
    }
    for (const auto &peer : node_.peers()) {
      auto caps = node_.remote_capabilities(peer);
      if (caps && caps->serves(p)) {
        return peer;
      }
    }
    return std::nullopt;
  }

  void RpcService::handle_text(std::string_view body, const Reply &reply) {
    Json req;
    try {
      req = Json::parse(body);
    } catch (const Json::exception &e) {
      reply(rpc_error_response(nullptr, rpc_error::parse_error,
                               std::string("parse error: ") + e.what()));
      return;
    }
    handle(req, reply);
  }

  void RpcService::handle(const Json &req, const Reply &reply) {
    if (!req.is_object() || req.value("jsonrpc", Json()) != "2.0" || !req.contains("method")
        || !req.at("method").is_string()) {
      Json id = req.is_object() && req.contains("id") ? req.at("id") : Json(nullptr);
      reply(rpc_error_response(id, rpc_error::invalid_request, "invalid request"));
      return;
    }
    const bool notification = !req.contains("id");
    Json id = notification ? Json(nullptr) : req.at("id");
    if (!id.is_null() && !id.is_string() && !id.is_number_integer()) {
      reply(rpc_error_response(nullptr, rpc_error::invalid_request, "invalid id"));
      return;
    }
    Json params = req.value("params", Json::array());
    if (!params.is_array() && !params.is_object()) {
      reply(rpc_error_response(id, rpc_error::invalid_request, "params must be structured"));
      return;
    }
    if (params.is_object()) {
      // Positional only; a single object is treated as the first argument.
      params = Json::array({params});
    }

    auto method = req.at("method").get<std::string>();
    auto it = methods_.find(method);
    if (it == methods_.end()) {
      reply(notification ? Json(nullptr)
                         : rpc_error_response(id, rpc_error::method_not_found,
                                              "method not found: " + method));
      return;
    }

    // Guards against a method answering twice.
    auto answered = std::make_shared<bool>(false);
    auto result = [reply, id, notification, answered](Json value) {
      if (std::exchange(*answered, true)) {
        return;
      }
      reply(notification ? Json(nullptr)
                         : Json{{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(value)}});
    };
    auto fail = [reply, id, notification, answered](int code, std::string message) {
      if (std::exchange(*answered, true)) {
        return;
      }
      reply(notification ? Json(nullptr) : rpc_error_response(id, code, message));
    };
    try {
      it->second(params, result, fail);
    } catch (const InvalidArgument &e) {
      fail(rpc_error::invalid_params, e.what());
    } catch (const Json::exception &e) {
      fail(rpc_error::invalid_params, e.what());
    } catch (const Error &e) {
      fail(rpc_error::server_error, e.what());
    }
  }

  // ---------------------------------------------------------------------------

  struct RpcHttpServer::Impl {
    Impl(RpcService &service, Post post) : service(service), post(std::move(post)) {}

    RpcService &service;
    Post post;
    httplib::Server server;
    std::thread thread;
  };

  RpcHttpServer::RpcHttpServer(RpcService &service, Post post)
      : impl_(std::make_unique<Impl>(service, std::move(post))) {
    // SO_REUSEADDR only; the library default also sets SO_REUSEPORT, which
    // would let a second server silently share an occupied port.
    impl_->server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char *>(&yes),
                   sizeof(yes));
    });
    impl_->server.Post("/", [this](const httplib::Request &req, httplib::Response &res) {
      auto promise = std::make_shared<std::promise<Json>>();
      auto future = promise->get_future();
      auto body = req.body;
      impl_->post([this, promise, body] {
        auto once = std::make_shared<bool>(false);
        impl_->service.handle_text(body, [promise, once](Json reply) {
          if (!std::exchange(*once, true)) {
            promise->set_value(std::move(reply));
          }
        });
      });
      if (future.wait_for(kHttpReplyTimeout) != std::future_status::ready) {
        res.status = 504;
        res.set_content(
            rpc_error_response(nullptr, rpc_error::server_error, "timed out").dump(),
            "application/json");
        return;
      }
      auto reply = future.get();
      if (reply.is_null()) {
        res.status = 204;
        return;
      }
      res.set_content(reply.dump(), "application/json");
    });
  }

  RpcHttpServer::~RpcHttpServer() {
    stop();
  }

  void RpcHttpServer::start(const Ipv4 &address, std::uint16_t port) {
    auto host = address.str();
    bool ok = port == 0 ? (port_ = static_cast<std::uint16_t>(
                               impl_->server.bind_to_any_port(host)),
                           port_ > 0)
                        : impl_->server.bind_to_port(host, port);
    if (!ok) {
      throw StartupError("cannot bind RPC server to " + host + ":" + std::to_string(port));
    }
    if (port != 0) {
      port_ = port;
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    log().info("event=rpc-listening address={}:{}", host, port_);
  }

  void RpcHttpServer::stop() {
    if (impl_->thread.joinable()) {
      impl_->server.stop();
      impl_->thread.join();
    }
  }

}  // namespace waku
