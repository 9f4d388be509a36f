/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <waku/discovery.hpp>
#include <waku/filter.hpp>
#include <waku/lightpush.hpp>
#include <waku/relay.hpp>
#include <waku/runtime.hpp>
#include <waku/store.hpp>
#include <waku/wire.hpp>

namespace waku {

  /// Node configuration; flag names follow the `--name:value` CLI surface.
  struct NodeConfig {
    std::vector<Multiaddr> staticnode;
    bool relay = false;
    std::vector<PubsubTopic> topics;
    bool store = false;
    bool persist_messages = false;
    std::size_t store_capacity = 1000;
    bool filter = false;
    bool lightpush = false;
    /// Advertise filter/lightpush as requester-only.
    bool filter_light = false;
    bool lightpush_light = false;
    bool rpc = false;
    Ipv4 rpc_address = *Ipv4::parse("127.0.0.1");
    std::uint16_t rpc_port = 8545;
    /// 0 picks an ephemeral port.
    std::uint16_t listen_port = 60000;
    std::optional<std::string> peer_list_url;
    std::optional<std::string> peer_list_key;
    std::string data_dir = "wakunode-data";
    /// Hex seed for the node identity; generated and persisted if absent.
    std::optional<std::string> nodekey;
    RelayParams relay_params;

    bool operator==(const NodeConfig &) const = default;
  };

  /// Parses `--name:value` flags. Throws ConfigError naming the flag.
  NodeConfig parse_config(std::span<const std::string> args);
  /// Inverse of parse_config: every field spelled out explicitly.
  std::vector<std::string> format_config(const NodeConfig &config);

  /// Protocols a config mounts, with modes. Full-mode store, filter and
  /// lightpush need relay underneath; violating that throws StartupError.
  std::map<Protocol, Mode> mounted_protocols(const NodeConfig &config);

  struct Ack {
    bool operator==(const Ack &) const = default;
  };

  /// Outcome of an asynchronous client request.
  template <class T>
  class Result {
   public:
    Result(T value) : v_(std::move(value)) {}
    static Result failure(std::string reason) {
      return Result(Failure{std::move(reason)});
    }

    bool ok() const {
      return v_.index() == 0;
    }
    const T &value() const {
      if (!ok()) {
        throw ProtocolError(error());
      }
      return std::get<0>(v_);
    }
    const std::string &error() const {
      return std::get<1>(v_).reason;
    }

   private:
    struct Failure {
      std::string reason;
    };
    explicit Result(Failure f) : v_(std::move(f)) {}

    std::variant<T, Failure> v_;
  };

  template <class T>
  using Callback = std::function<void(Result<T>)>;

  using ConnectionId = std::uint64_t;

  struct NodeTimeouts {
    std::int64_t handshake = 5 * kSecond;
    std::int64_t store = 10 * kSecond;
    std::int64_t filter = 10 * kSecond;
    std::int64_t lightpush = 10 * kSecond;
  };

  /**
   * One adaptive node: the mounted protocol set plus connection bookkeeping,
   * driven entirely through its Runtime. Every method must be called from
   * the node's serialized event stream; the class does no locking.
   *
   * Connections start with a capability exchange. Until the remote's
   * advertisement arrives, other frames from it are dropped, and no request
   * is ever sent for a protocol the remote did not advertise in full mode.
   */
  class Node {
   public:
    using DeliveryHandler =
        std::function<void(const PubsubTopic &, const WakuMessage &, const MessageDigest &)>;
    using PushHandler = std::function<void(const std::string &subscription_id,
                                           const PubsubTopic &, const WakuMessage &)>;
    /// Fires whenever a connection completes or repeats its handshake.
    using PeerHandler = std::function<void(const PeerId &, const Capabilities &)>;

    Node(NodeConfig config, PeerId id, Runtime &runtime, NodeTimeouts timeouts = {});
    ~Node();
    Node(const Node &) = delete;
    Node &operator=(const Node &) = delete;

    /// Mounts protocols and subscribes to configured topics. Throws
    /// StartupError. Dialing is left to the host.
    void start();
    /// Closes connections and flushes the store snapshot when persisting.
    /// Idempotent.
    void stop();
    bool running() const {
      return running_;
    }

    const PeerId &id() const {
      return id_;
    }
    const NodeConfig &config() const {
      return config_;
    }
    /// Exactly what the handshake advertises.
    const Capabilities &capabilities() const {
      return caps_;
    }

    // transport side
    ConnectionId attach(std::shared_ptr<Link> link);
    void receive(ConnectionId conn, BytesView data);
    /// The transport saw the connection close.
    void detach(ConnectionId conn);
    /// Close from our side.
    void disconnect(const PeerId &peer);
    std::optional<PeerId> peer_of(ConnectionId conn) const;
    std::vector<PeerId> peers() const;
    std::optional<Capabilities> remote_capabilities(const PeerId &peer) const;
    /// Re-sends our advertisement on every connection.
    void readvertise();

    // relay
    /// Throws PreconditionError if relay is not mounted, InvalidArgument for
    /// an invalid message.
    PublishReceipt publish(const PubsubTopic &topic, const WakuMessage &msg);
    void subscribe(const PubsubTopic &topic);
    void unsubscribe(const PubsubTopic &topic);
    void on_delivery(DeliveryHandler handler);
    const Relay *relay() const {
      return relay_.get();
    }
    bool has_pending_gossip() const;

    // store
    /// Serves a query from the local archive. Throws ProtocolError("store not
    /// in full mode") on nodes without a full-mode store.
    HistoryResponse query_local(const HistoryQuery &q) const;
    /// Throws PreconditionError if `server` is not connected or does not
    /// serve store; the callback receives the validated response.
    void store_query(const PeerId &server, HistoryQuery q,
                     Callback<HistoryResponse> done);
    const Archive *archive() const {
      return archive_.get();
    }

    // filter
    void filter_subscribe(const PeerId &server, PubsubTopic topic,
                          ContentFilter filter, Callback<std::string> done);
    void filter_unsubscribe(const PeerId &server, std::string id,
                            Callback<Ack> done);
    void on_filter_push(PushHandler handler);
    const FilterServer *filter_server() const {
      return filter_server_.get();
    }

    // lightpush
    /// Throws InvalidArgument for an invalid message, PreconditionError if
    /// `server` does not serve lightpush.
    void lightpush(const PeerId &server, PushRequest req,
                   Callback<PushResponse> done);

    void on_peer(PeerHandler handler);

   private:
    struct Pending {
      Protocol protocol;
      TimerId timer = 0;
      std::function<void(Result<Bytes>)> done;
    };

    struct Connection {
      std::shared_ptr<Link> link;
      FrameReader reader;
      std::optional<Capabilities> remote;
      TimerId handshake_timer = 0;
      std::uint64_t next_request_id = 1;
      std::map<std::uint64_t, Pending> pending;
    };

    void handle_frame(ConnectionId cid, Frame frame);
    void handle_handshake(ConnectionId cid, const Frame &frame);
    void handle_relay(const PeerId &from, const Frame &frame);
    void handle_store(ConnectionId cid, const Frame &frame);
    void handle_filter(ConnectionId cid, const PeerId &from, const Frame &frame);
    void handle_lightpush(ConnectionId cid, const Frame &frame);
    void handle_response(ConnectionId cid, const Frame &frame);

    void send_frame(ConnectionId cid, const Frame &frame);
    bool send_to_peer(const PeerId &peer, const Frame &frame);
    void respond(ConnectionId cid, const Frame &request, Bytes body);
    void request(const PeerId &server, Protocol protocol, Bytes body,
                 std::int64_t timeout, std::function<void(Result<Bytes>)> done);
    void close_connection(ConnectionId cid, const std::string &reason);
    void apply(RelayEffects fx);
    void heartbeat();
    std::filesystem::path snapshot_path() const;

    NodeConfig config_;
    PeerId id_;
    Runtime &rt_;
    NodeTimeouts timeouts_;
    Capabilities caps_;
    bool running_ = false;
    bool stopped_ = false;

    std::unique_ptr<Relay> relay_;
    std::unique_ptr<Archive> archive_;
    std::unique_ptr<FilterServer> filter_server_;

    std::map<ConnectionId, Connection> conns_;
    std::map<PeerId, ConnectionId> by_peer_;
    ConnectionId next_conn_ = 1;
    TimerId heartbeat_timer_ = 0;

    std::vector<DeliveryHandler> delivery_handlers_;
    std::vector<PushHandler> push_handlers_;
    std::vector<PeerHandler> peer_handlers_;
  };

}  // namespace waku
