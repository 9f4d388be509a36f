/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/node.hpp>

#include <waku/log.hpp>

namespace waku {

  namespace {
    constexpr std::string_view kSnapshotFile = "store.snapshot";

    Bytes encode_string(std::string_view s) {
      ByteWriter w;
      w.str(s);
      return std::move(w).take();
    }

    std::string decode_string(BytesView b) {
      ByteReader r(b);
      auto s = r.str(256);
      r.expect_done("string");
      return s;
    }
  }  // namespace

  Node::Node(NodeConfig config, PeerId id, Runtime &runtime, NodeTimeouts timeouts)
      : config_(std::move(config)),
        id_(std::move(id)),
        rt_(runtime),
        timeouts_(timeouts),
        caps_{id_, {}} {}

  Node::~Node() {
    for (auto &[cid, conn] : conns_) {
      rt_.cancel(conn.handshake_timer);
      for (auto &[rid, p] : conn.pending) {
        rt_.cancel(p.timer);
      }
    }
    if (heartbeat_timer_ != 0) {
      rt_.cancel(heartbeat_timer_);
    }
  }

  void Node::start() {
    if (running_) {
      return;
    }
    if (stopped_) {
      throw StartupError("node cannot be restarted after stop");
    }
    caps_ = Capabilities{id_, mounted_protocols(config_)};
    try {
      config_.relay_params.validate();
    } catch (const InvalidArgument &e) {
      throw StartupError(e.what());
    }

    if (caps_.has(Protocol::relay)) {
      relay_ = std::make_unique<Relay>(config_.relay_params, rt_.rng());
    }
    if (caps_.serves(Protocol::store)) {
      archive_ = std::make_unique<Archive>(config_.store_capacity);
      auto path = snapshot_path();
      if (!path.empty() && std::filesystem::exists(path)) {
        try {
          for (auto &m : read_snapshot(path)) {
            archive_->insert(std::move(m));
          }
        } catch (const std::exception &e) {
          throw StartupError("cannot load store snapshot: " + std::string(e.what()));
        }
      }
    }
    if (caps_.serves(Protocol::filter)) {
      filter_server_ = std::make_unique<FilterServer>(FilterLimits{}, rt_.rng());
    }

    running_ = true;
    for (const auto &t : config_.topics) {
      subscribe(t);
    }
    if (relay_) {
      heartbeat_timer_ = rt_.schedule(
          config_.relay_params.heartbeat_interval, "heartbeat",
          [this] { heartbeat(); }, true);
    }
    log().info("peer={} event=start protocols={}", id_.str(), caps_.protocols.size());
  }

  void Node::stop() {
    if (!running_) {
      return;
    }
    running_ = false;
    stopped_ = true;
    if (heartbeat_timer_ != 0) {
      rt_.cancel(heartbeat_timer_);
      heartbeat_timer_ = 0;
    }
    std::vector<ConnectionId> ids;
    for (const auto &[cid, conn] : conns_) {
      ids.push_back(cid);
    }
    for (auto cid : ids) {
      close_connection(cid, "node stopping");
    }
    if (archive_ && config_.persist_messages) {
      auto path = snapshot_path();
      if (!path.empty()) {
        std::filesystem::create_directories(path.parent_path());
        write_snapshot(path, archive_->contents());
      }
    }
    log().info("peer={} event=stop", id_.str());
  }

  std::filesystem::path Node::snapshot_path() const {
    if (config_.data_dir.empty()) {
      return {};
    }
    return std::filesystem::path(config_.data_dir) / kSnapshotFile;
  }

  ConnectionId Node::attach(std::shared_ptr<Link> link) {
    if (!running_) {
      throw PreconditionError("node is not running");
    }
    auto cid = next_conn_++;
    auto &conn = conns_[cid];
    conn.link = std::move(link);
    send_frame(cid, Frame{Protocol::handshake, 0, FrameKind::push,
                          encode_capabilities(caps_)});
    conn.handshake_timer = rt_.schedule(timeouts_.handshake, "handshake-timeout", [this, cid] {
      auto it = conns_.find(cid);
      if (it != conns_.end() && !it->second.remote) {
        it->second.handshake_timer = 0;
        close_connection(cid, "handshake timed out");
      }
    });
    return cid;
  }

  void Node::receive(ConnectionId cid, BytesView data) {
    auto it = conns_.find(cid);
    if (it == conns_.end()) {
      return;
    }
    it->second.reader.feed(data);
    while (true) {
      std::optional<Frame> frame;
      try {
        auto c = conns_.find(cid);
        if (c == conns_.end()) {
          return;
        }
        frame = c->second.reader.next();
      } catch (const CodecError &e) {
        close_connection(cid, std::string("bad frame: ") + e.what());
        return;
      }
      if (!frame) {
        return;
      }
      handle_frame(cid, std::move(*frame));
    }
  }

  void Node::detach(ConnectionId cid) {
    auto it = conns_.find(cid);
    if (it == conns_.end()) {
      return;
    }
    auto conn = std::move(it->second);
    conns_.erase(it);
    rt_.cancel(conn.handshake_timer);
    if (conn.remote) {
      const auto &peer = conn.remote->peer;
      auto bp = by_peer_.find(peer);
      if (bp != by_peer_.end() && bp->second == cid) {
        by_peer_.erase(bp);
        if (relay_) {
          relay_->remove_peer(peer);
        }
      }
      log().debug("peer={} event=disconnected remote={}", id_.str(), peer.str());
    }
    for (auto &[rid, p] : conn.pending) {
      rt_.cancel(p.timer);
      p.done(Result<Bytes>::failure("connection closed"));
    }
  }

  void Node::close_connection(ConnectionId cid, const std::string &reason) {
    auto it = conns_.find(cid);
    if (it == conns_.end()) {
      return;
    }
    log().debug("peer={} event=close conn={} reason=\"{}\"", id_.str(), cid, reason);
    auto link = it->second.link;
    detach(cid);
    if (link) {
      link->close();
    }
  }

  void Node::disconnect(const PeerId &peer) {
    auto it = by_peer_.find(peer);
    if (it != by_peer_.end()) {
      close_connection(it->second, "disconnect requested");
    }
  }

  std::optional<PeerId> Node::peer_of(ConnectionId cid) const {
    auto it = conns_.find(cid);
    if (it == conns_.end() || !it->second.remote) {
      return std::nullopt;
    }
    return it->second.remote->peer;
  }

  std::vector<PeerId> Node::peers() const {
    std::vector<PeerId> out;
    for (const auto &[peer, cid] : by_peer_) {
      out.push_back(peer);
    }
    return out;
  }

  std::optional<Capabilities> Node::remote_capabilities(const PeerId &peer) const {
    auto it = by_peer_.find(peer);
    if (it == by_peer_.end()) {
      return std::nullopt;
    }
    return conns_.at(it->second).remote;
  }

  void Node::readvertise() {
    for (const auto &[cid, conn] : conns_) {
      send_frame(cid, Frame{Protocol::handshake, 0, FrameKind::push,
                            encode_capabilities(caps_)});
    }
  }

  void Node::send_frame(ConnectionId cid, const Frame &frame) {
    auto it = conns_.find(cid);
    if (it == conns_.end() || !it->second.link) {
      return;
    }
    it->second.link->send(encode_frame(frame));
  }

  bool Node::send_to_peer(const PeerId &peer, const Frame &frame) {
    auto it = by_peer_.find(peer);
    if (it == by_peer_.end()) {
      return false;
    }
    send_frame(it->second, frame);
    return true;
  }

  void Node::respond(ConnectionId cid, const Frame &req, Bytes body) {
    send_frame(cid, Frame{req.protocol, req.request_id, FrameKind::response,
                          std::move(body)});
  }

  void Node::handle_frame(ConnectionId cid, Frame frame) {
    if (frame.protocol == Protocol::handshake) {
      handle_handshake(cid, frame);
      return;
    }
    auto &conn = conns_.at(cid);
    if (!conn.remote) {
      log().debug("peer={} event=drop reason=pre-handshake-frame", id_.str());
      return;
    }
    auto from = conn.remote->peer;
    if (frame.kind == FrameKind::response) {
      handle_response(cid, frame);
      return;
    }
    switch (frame.protocol) {
      case Protocol::relay:
        handle_relay(from, frame);
        break;
      case Protocol::store:
        handle_store(cid, frame);
        break;
      case Protocol::filter:
        handle_filter(cid, from, frame);
        break;
      case Protocol::lightpush:
        handle_lightpush(cid, frame);
        break;
      case Protocol::handshake:
        break;
    }
  }

  void Node::handle_handshake(ConnectionId cid, const Frame &frame) {
    Capabilities remote{id_, {}};
    try {
      remote = decode_capabilities(frame.body);
    } catch (const CodecError &e) {
      close_connection(cid, std::string("malformed advertisement: ") + e.what());
      return;
    }
    auto &conn = conns_.at(cid);
    const bool first = !conn.remote;
    if (first) {
      rt_.cancel(conn.handshake_timer);
      conn.handshake_timer = 0;
      if (remote.peer == id_) {
        close_connection(cid, "connection to self");
        return;
      }
      if (by_peer_.contains(remote.peer)) {
        close_connection(cid, "duplicate connection");
        return;
      }
      by_peer_[remote.peer] = cid;
      conn.remote = remote;
      log().debug("peer={} event=handshake remote={} protocols={}", id_.str(),
                  remote.peer.str(), remote.protocols.size());
      if (relay_ && remote.has(Protocol::relay)) {
        apply(relay_->add_peer(remote.peer));
      }
    } else {
      if (remote.peer != conn.remote->peer) {
        close_connection(cid, "peer id changed on re-advertisement");
        return;
      }
      bool had_relay = conn.remote->has(Protocol::relay);
      conn.remote = remote;
      if (relay_ && had_relay != remote.has(Protocol::relay)) {
        if (remote.has(Protocol::relay)) {
          apply(relay_->add_peer(remote.peer));
        } else {
          relay_->remove_peer(remote.peer);
        }
      }
    }
    for (const auto &h : peer_handlers_) {
      h(remote.peer, remote);
    }
  }

  void Node::handle_relay(const PeerId &from, const Frame &frame) {
    if (!relay_ || frame.kind != FrameKind::push) {
      return;
    }
    auto rc = remote_capabilities(from);
    if (!rc || !rc->has(Protocol::relay)) {
      return;
    }
    try {
      apply(relay_->on_frame(from, decode_relay_frame(frame.body), rt_.now()));
    } catch (const CodecError &e) {
      log().warn("peer={} event=bad-relay-frame from={} error=\"{}\"", id_.str(),
                 from.str(), e.what());
    }
  }

  void Node::handle_store(ConnectionId cid, const Frame &frame) {
    if (frame.kind != FrameKind::request) {
      return;
    }
    if (!archive_) {
      respond(cid, frame, encode_error("store not in full mode"));
      return;
    }
    HistoryQuery q;
    try {
      q = decode_history_query(frame.body);
    } catch (const CodecError &e) {
      respond(cid, frame, encode_error(std::string("malformed query: ") + e.what()));
      return;
    }
    respond(cid, frame, encode_ok(encode_history_response(archive_->query(q))));
  }

  void Node::handle_filter(ConnectionId cid, const PeerId &from, const Frame &frame) {
    std::optional<FilterFrame> decoded;
    try {
      decoded = decode_filter_frame(frame.body);
    } catch (const CodecError &e) {
      if (frame.kind == FrameKind::request) {
        respond(cid, frame, encode_error(std::string("malformed request: ") + e.what()));
      }
      return;
    }
    const auto &ff = *decoded;

    if (frame.kind == FrameKind::push) {
      if (auto *push = std::get_if<filter::MessagePush>(&ff)) {
        for (const auto &h : push_handlers_) {
          h(push->id, push->pubsub_topic, push->message);
        }
      }
      return;
    }
    if (frame.kind != FrameKind::request) {
      return;
    }
    if (!filter_server_) {
      respond(cid, frame, encode_error("filter not in full mode"));
      return;
    }
    if (auto *sub = std::get_if<filter::SubscribeRequest>(&ff)) {
      std::string id;
      try {
        id = filter_server_->subscribe(from, sub->pubsub_topic, sub->filter, rt_.now());
      } catch (const ProtocolError &e) {
        respond(cid, frame, encode_error(e.what()));
        return;
      }
      subscribe(sub->pubsub_topic);
      respond(cid, frame, encode_ok(encode_string(id)));
    } else if (auto *unsub = std::get_if<filter::UnsubscribeRequest>(&ff)) {
      try {
        filter_server_->unsubscribe(from, unsub->id);
      } catch (const ProtocolError &e) {
        respond(cid, frame, encode_error(e.what()));
        return;
      }
      respond(cid, frame, encode_ok({}));
    } else {
      respond(cid, frame, encode_error("unexpected filter request"));
    }
  }

  void Node::handle_lightpush(ConnectionId cid, const Frame &frame) {
    if (frame.kind != FrameKind::request) {
      return;
    }
    PushRequest req{PubsubTopic("_"), {}};
    try {
      req = decode_push_request(frame.body);
    } catch (const CodecError &e) {
      respond(cid, frame, encode_error(std::string("malformed request: ") + e.what()));
      return;
    }
    PushResponse resp;
    RelayEffects fx;
    if (!caps_.serves(Protocol::lightpush)) {
      resp = relay_ ? PushResponse{false, "lightpush not in full mode"}
                    : PushResponse{false, "relay not mounted"};
    } else {
      resp = serve_lightpush(relay_.get(), req, rt_.now(), fx);
    }
    apply(std::move(fx));
    respond(cid, frame, encode_ok(encode_push_response(resp)));
  }

  void Node::handle_response(ConnectionId cid, const Frame &frame) {
    auto &conn = conns_.at(cid);
    auto it = conn.pending.find(frame.request_id);
    if (it == conn.pending.end() || it->second.protocol != frame.protocol) {
      return;
    }
    auto pending = std::move(it->second);
    conn.pending.erase(it);
    rt_.cancel(pending.timer);
    try {
      auto env = decode_response(frame.body);
      if (!env.ok) {
        pending.done(Result<Bytes>::failure(env.error));
      } else {
        pending.done(Result<Bytes>(std::move(env.payload)));
      }
    } catch (const CodecError &e) {
      pending.done(Result<Bytes>::failure(std::string("malformed response: ") + e.what()));
    }
  }

  void Node::request(const PeerId &server, Protocol protocol, Bytes body,
                     std::int64_t timeout, std::function<void(Result<Bytes>)> done) {
    auto bp = by_peer_.find(server);
    if (bp == by_peer_.end()) {
      throw PreconditionError("not connected to " + server.str());
    }
    auto cid = bp->second;
    auto &conn = conns_.at(cid);
    if (!caps_.has(protocol)) {
      throw PreconditionError(std::string(protocol_name(protocol)) + " is not mounted");
    }
    if (!conn.remote->serves(protocol)) {
      throw PreconditionError(server.str() + " does not serve "
                              + std::string(protocol_name(protocol)) + " in full mode");
    }
    auto rid = conn.next_request_id++;
    send_frame(cid, Frame{protocol, rid, FrameKind::request, std::move(body)});
    auto timer = rt_.schedule(timeout, std::string(protocol_name(protocol)) + "-timeout",
                              [this, cid, rid] {
                                auto c = conns_.find(cid);
                                if (c == conns_.end()) {
                                  return;
                                }
                                auto p = c->second.pending.find(rid);
                                if (p == c->second.pending.end()) {
                                  return;
                                }
                                auto pending = std::move(p->second);
                                c->second.pending.erase(p);
                                pending.done(Result<Bytes>::failure("timeout"));
                              });
    conn.pending.emplace(rid, Pending{protocol, timer, std::move(done)});
  }

  void Node::apply(RelayEffects fx) {
    for (auto &[peer, rf] : fx.sends) {
      send_to_peer(peer, Frame{Protocol::relay, 0, FrameKind::push,
                               encode_relay_frame(rf)});
    }
    const auto now = rt_.now();
    for (const auto &d : fx.fresh) {
      if (archive_) {
        archive_->insert(d.message, d.topic, now);
      }
      if (filter_server_) {
        for (const auto &push : filter_server_->matching(d.topic, d.message)) {
          bool delivered = send_to_peer(
              push.subscriber,
              Frame{Protocol::filter, 0, FrameKind::push,
                    encode_filter_frame(filter::MessagePush{push.subscription_id,
                                                            d.topic, d.message})});
          if (filter_server_->report_push(push.subscription_id, delivered)) {
            log().info("peer={} event=filter-drop subscription={} subscriber={}",
                       id_.str(), push.subscription_id, push.subscriber.str());
          }
        }
      }
      if (d.local_subscriber) {
        for (const auto &h : delivery_handlers_) {
          h(d.topic, d.message, d.digest);
        }
      }
    }
  }

  void Node::heartbeat() {
    heartbeat_timer_ = rt_.schedule(
        config_.relay_params.heartbeat_interval, "heartbeat",
        [this] { heartbeat(); }, true);
    if (relay_) {
      apply(relay_->heartbeat(rt_.now()));
    }
  }

  PublishReceipt Node::publish(const PubsubTopic &topic, const WakuMessage &msg) {
    if (!relay_) {
      throw PreconditionError("relay not mounted");
    }
    auto [receipt, fx] = relay_->publish(topic, msg, rt_.now());
    apply(std::move(fx));
    return receipt;
  }

  void Node::subscribe(const PubsubTopic &topic) {
    if (!relay_) {
      throw PreconditionError("relay not mounted");
    }
    apply(relay_->subscribe(topic));
  }

  void Node::unsubscribe(const PubsubTopic &topic) {
    if (!relay_) {
      throw PreconditionError("relay not mounted");
    }
    apply(relay_->unsubscribe(topic));
  }

  void Node::on_delivery(DeliveryHandler handler) {
    delivery_handlers_.push_back(std::move(handler));
  }

  void Node::on_filter_push(PushHandler handler) {
    push_handlers_.push_back(std::move(handler));
  }

  void Node::on_peer(PeerHandler handler) {
    peer_handlers_.push_back(std::move(handler));
  }

  bool Node::has_pending_gossip() const {
    return relay_ && relay_->has_pending_gossip();
  }

  HistoryResponse Node::query_local(const HistoryQuery &q) const {
    if (!archive_) {
      throw ProtocolError("store not in full mode");
    }
    return archive_->query(q);
  }

  void Node::store_query(const PeerId &server, HistoryQuery q,
                         Callback<HistoryResponse> done) {
    auto body = encode_history_query(q);
    request(server, Protocol::store, std::move(body), timeouts_.store,
            [q = std::move(q), done = std::move(done)](Result<Bytes> r) {
              if (!r.ok()) {
                done(Result<HistoryResponse>::failure(r.error()));
                return;
              }
              try {
                auto resp = decode_history_response(r.value());
                validate_response(q, resp);
                done(Result<HistoryResponse>(std::move(resp)));
              } catch (const Error &e) {
                done(Result<HistoryResponse>::failure(
                    std::string("invalid store response: ") + e.what()));
              }
            });
  }

  void Node::filter_subscribe(const PeerId &server, PubsubTopic topic,
                              ContentFilter filter, Callback<std::string> done) {
    auto body = encode_filter_frame(filter::SubscribeRequest{std::move(topic), std::move(filter)});
    request(server, Protocol::filter, std::move(body), timeouts_.filter,
            [done = std::move(done)](Result<Bytes> r) {
              if (!r.ok()) {
                done(Result<std::string>::failure(r.error()));
                return;
              }
              try {
                done(Result<std::string>(decode_string(r.value())));
              } catch (const CodecError &e) {
                done(Result<std::string>::failure(e.what()));
              }
            });
  }

  void Node::filter_unsubscribe(const PeerId &server, std::string id,
                                Callback<Ack> done) {
    auto body = encode_filter_frame(filter::UnsubscribeRequest{std::move(id)});
    request(server, Protocol::filter, std::move(body), timeouts_.filter,
            [done = std::move(done)](Result<Bytes> r) {
              if (!r.ok()) {
                done(Result<Ack>::failure(r.error()));
                return;
              }
              done(Result<Ack>(Ack{}));
            });
  }

  void Node::lightpush(const PeerId &server, PushRequest req,
                       Callback<PushResponse> done) {
    validate(req.msg);
    auto body = encode_push_request(req);
    request(server, Protocol::lightpush, std::move(body), timeouts_.lightpush,
            [done = std::move(done)](Result<Bytes> r) {
              if (!r.ok()) {
                done(Result<PushResponse>::failure(r.error()));
                return;
              }
              try {
                done(Result<PushResponse>(decode_push_response(r.value())));
              } catch (const CodecError &e) {
                done(Result<PushResponse>::failure(e.what()));
              }
            });
  }

}  // namespace waku
