/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <waku/json_codec.hpp>
#include <waku/node.hpp>

namespace waku {

  namespace rpc_error {
    constexpr int parse_error = -32700;
    constexpr int invalid_request = -32600;
    constexpr int method_not_found = -32601;
    constexpr int invalid_params = -32602;
    constexpr int server_error = -32000;
  }  // namespace rpc_error

  constexpr std::size_t kPollBufferCap = 1024;

  /**
   * JSON-RPC 2.0 method registry bound to one node. Runs on the node's event
   * loop: handle() must be called there and `reply` fires there, possibly
   * later for methods that wait on a remote peer. Only methods of mounted
   * protocols are registered; the debug method always is. See docs/rpc.md.
   */
  class RpcService {
   public:
    using Reply = std::function<void(Json)>;

    /// Registers delivery and push handlers on `node`, which must outlive
    /// the service.
    RpcService(Node &node, std::vector<std::string> listen_addresses = {});

    /// Handles one request body. Notifications (no id) reply with null.
    void handle_text(std::string_view body, const Reply &reply);
    void handle(const Json &request, const Reply &reply);

    std::vector<std::string> methods() const;

   private:
    using Method = std::function<void(const Json &params, const Reply &result,
                                      const std::function<void(int, std::string)> &fail)>;

    void buffer(const PubsubTopic &topic, const WakuMessage &msg);
    std::optional<PeerId> pick_server(Protocol p, const Json &params, std::size_t index) const;

    Node &node_;
    std::vector<std::string> listen_addresses_;
    std::map<std::string, Method> methods_;
    std::map<PubsubTopic, std::deque<WakuMessage>> poll_;
    std::map<std::string, PeerId> filter_servers_;
  };

  /// Builds `{"jsonrpc":"2.0","id":id,"error":{"code","message"}}`.
  Json rpc_error_response(const Json &id, int code, const std::string &message);

  /**
   * HTTP/1.1 front end: POST / with a JSON-RPC body. Each request is handed
   * to the node loop through `post` and the HTTP thread waits for the reply.
   */
  class RpcHttpServer {
   public:
    using Post = std::function<void(std::function<void()>)>;

    RpcHttpServer(RpcService &service, Post post);
    ~RpcHttpServer();

    /// Binds and starts serving on a background thread. Throws StartupError
    /// if the address cannot be bound.
    void start(const Ipv4 &address, std::uint16_t port);
    void stop();
    std::uint16_t port() const {
      return port_;
    }

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint16_t port_ = 0;
  };

}  // namespace waku
