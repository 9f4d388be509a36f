/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/relay.hpp>

#include <algorithm>

#include <waku/error.hpp>
#include <waku/random.hpp>

namespace waku {

  namespace {
    constexpr std::size_t kMessageOverhead = 64;

    PubsubTopic read_topic(ByteReader &r, const MessageLimits &limits) {
      auto pos = r.position();
      auto s = r.str(limits.max_topic);
      try {
        return PubsubTopic(std::move(s));
      } catch (const InvalidArgument &e) {
        throw CodecError(e.what(), pos);
      }
    }

    void write_digests(ByteWriter &w, const std::vector<MessageDigest> &ds) {
      w.u32(static_cast<std::uint32_t>(ds.size()));
      for (const auto &d : ds) {
        w.raw(d.bytes);
      }
    }

    std::vector<MessageDigest> read_digests(ByteReader &r) {
      auto pos = r.position();
      auto count = r.u32();
      if (count > r.remaining() / 32) {
        throw CodecError("digest count exceeds frame", pos);
      }
      std::vector<MessageDigest> out(count);
      for (auto &d : out) {
        auto raw = r.raw(32);
        std::copy(raw.begin(), raw.end(), d.bytes.begin());
      }
      return out;
    }
  }  // namespace

  void RelayParams::validate() const {
    if (mesh_degree < 1) {
      throw InvalidArgument("mesh degree must be at least 1");
    }
    if (heartbeat_interval <= 0) {
      throw InvalidArgument("heartbeat interval must be positive");
    }
    if (seen_ttl <= heartbeat_interval) {
      throw InvalidArgument("seen ttl must exceed the heartbeat interval");
    }
    if (gossip_window < 1) {
      throw InvalidArgument("gossip window must be at least 1");
    }
  }

  Bytes encode_relay_frame(const RelayFrame &frame, const MessageLimits &limits) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(frame.index() + 1));
    std::visit(
        [&](const auto &f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, relay::Message>) {
            w.str(f.topic.str());
            w.blob(encode_message(f.message, limits));
          } else if constexpr (std::is_same_v<T, relay::IHave>) {
            w.str(f.topic.str());
            write_digests(w, f.digests);
          } else if constexpr (std::is_same_v<T, relay::IWant>) {
            write_digests(w, f.digests);
          } else {
            w.str(f.topic.str());
          }
        },
        frame);
    return std::move(w).take();
  }

  RelayFrame decode_relay_frame(BytesView body, const MessageLimits &limits) {
    ByteReader r(body);
    auto type = r.u8();
    std::optional<RelayFrame> out;
    switch (type) {
      case 1: {
        auto topic = read_topic(r, limits);
        auto pos = r.position();
        auto encoded =
            r.blob(limits.max_payload + limits.max_topic + kMessageOverhead);
        try {
          out.emplace(relay::Message{std::move(topic),
                                     decode_message(encoded, limits)});
        } catch (const CodecError &e) {
          throw CodecError(std::string("embedded message: ") + e.what(), pos);
        }
        break;
      }
      case 2: {
        auto topic = read_topic(r, limits);
        out.emplace(relay::IHave{std::move(topic), read_digests(r)});
        break;
      }
      case 3:
        out.emplace(relay::IWant{read_digests(r)});
        break;
      case 4:
        out.emplace(relay::Subscribe{read_topic(r, limits)});
        break;
      case 5:
        out.emplace(relay::Unsubscribe{read_topic(r, limits)});
        break;
      default:
        throw CodecError("unknown relay frame type " + std::to_string(type), 0);
    }
    r.expect_done("relay frame");
    return std::move(*out);
  }

  std::string_view relay_frame_name(const RelayFrame &frame) {
    static constexpr std::string_view kNames[] = {
        "MESSAGE", "IHAVE", "IWANT", "SUBSCRIBE", "UNSUBSCRIBE"};
    return kNames[frame.index()];
  }

  bool SeenCache::insert(const MessageDigest &d, std::int64_t now) {
    return entries_.emplace(d, now).second;
  }

  void SeenCache::prune(std::int64_t now) {
    std::erase_if(entries_,
                  [&](const auto &kv) { return now - kv.second > ttl_; });
  }

  void RelayEffects::append(RelayEffects other) {
    std::move(other.sends.begin(), other.sends.end(), std::back_inserter(sends));
    std::move(other.fresh.begin(), other.fresh.end(), std::back_inserter(fresh));
  }

  Relay::Relay(RelayParams params, std::mt19937_64 &rng, MessageLimits limits)
      : params_(params), limits_(limits), rng_(rng), seen_(params.seen_ttl) {
    params_.validate();
    window_.emplace_front();
  }

  RelayEffects Relay::add_peer(const PeerId &peer) {
    RelayEffects fx;
    if (!peers_.insert(peer).second) {
      return fx;
    }
    for (const auto &[topic, state] : topics_) {
      if (state.subscribed_locally) {
        fx.sends.emplace_back(peer, relay::Subscribe{topic});
      }
    }
    return fx;
  }

  void Relay::remove_peer(const PeerId &peer) {
    peers_.erase(peer);
    std::vector<PubsubTopic> touched;
    for (auto &[topic, state] : topics_) {
      state.known_peers.erase(peer);
      state.mesh_peers.erase(peer);
      touched.push_back(topic);
    }
    for (const auto &t : touched) {
      drop_topic_if_unused(t);
    }
  }

  RelayEffects Relay::subscribe(const PubsubTopic &topic) {
    RelayEffects fx;
    auto &state = topics_[topic];
    if (state.subscribed_locally) {
      return fx;
    }
    state.subscribed_locally = true;
    graft_up_to_degree(state);
    for (const auto &peer : peers_) {
      fx.sends.emplace_back(peer, relay::Subscribe{topic});
    }
    return fx;
  }

  RelayEffects Relay::unsubscribe(const PubsubTopic &topic) {
    RelayEffects fx;
    auto it = topics_.find(topic);
    if (it == topics_.end() || !it->second.subscribed_locally) {
      return fx;
    }
    it->second.subscribed_locally = false;
    for (const auto &peer : peers_) {
      fx.sends.emplace_back(peer, relay::Unsubscribe{topic});
    }
    drop_topic_if_unused(topic);
    return fx;
  }

  bool Relay::subscribed(const PubsubTopic &topic) const {
    auto it = topics_.find(topic);
    return it != topics_.end() && it->second.subscribed_locally;
  }

  std::vector<PubsubTopic> Relay::subscriptions() const {
    std::vector<PubsubTopic> out;
    for (const auto &[topic, state] : topics_) {
      if (state.subscribed_locally) {
        out.push_back(topic);
      }
    }
    return out;
  }

  std::pair<PublishReceipt, RelayEffects> Relay::publish(const PubsubTopic &topic,
                                                         const WakuMessage &msg,
                                                         std::int64_t now) {
    validate(msg, limits_);
    auto d = digest(msg);
    PublishReceipt receipt{d, 0};
    if (seen_.contains(d)) {
      return {receipt, {}};
    }
    auto fx = accept(topic, msg, d, std::nullopt, now);
    receipt.eager_sends = fx.sends.size();
    return {receipt, std::move(fx)};
  }

  RelayEffects Relay::accept(const PubsubTopic &topic, const WakuMessage &msg,
                             const MessageDigest &d,
                             const std::optional<PeerId> &from, std::int64_t now) {
    RelayEffects fx;
    seen_.insert(d, now);
    window_.front().push_back(d);
    retained_.insert_or_assign(d, Cached{topic, msg});
    requested_.erase(d);

    auto it = topics_.find(topic);
    bool local = it != topics_.end() && it->second.subscribed_locally;
    fx.fresh.push_back(RelayDelivery{topic, msg, d, local});
    if (it != topics_.end()) {
      for (const auto &peer : it->second.mesh_peers) {
        if (from && peer == *from) {
          continue;
        }
        fx.sends.emplace_back(peer, relay::Message{topic, msg});
      }
    }
    return fx;
  }

  RelayEffects Relay::on_frame(const PeerId &from, const RelayFrame &frame,
                               std::int64_t now) {
    RelayEffects fx;
    if (!peers_.contains(from)) {
      return fx;
    }
    if (auto *m = std::get_if<relay::Message>(&frame)) {
      try {
        validate(m->message, limits_);
      } catch (const InvalidArgument &) {
        return fx;
      }
      auto d = digest(m->message);
      if (seen_.contains(d)) {
        return fx;
      }
      return accept(m->topic, m->message, d, from, now);
    }
    if (auto *ihave = std::get_if<relay::IHave>(&frame)) {
      relay::IWant want;
      for (const auto &d : ihave->digests) {
        if (seen_.contains(d)) {
          continue;
        }
        auto req = requested_.find(d);
        if (req != requested_.end()
            && now - req->second < params_.heartbeat_interval) {
          continue;
        }
        requested_.insert_or_assign(d, now);
        want.digests.push_back(d);
      }
      if (!want.digests.empty()) {
        fx.sends.emplace_back(from, std::move(want));
      }
      return fx;
    }
    if (auto *iwant = std::get_if<relay::IWant>(&frame)) {
      for (const auto &d : iwant->digests) {
        auto it = retained_.find(d);
        if (it != retained_.end()) {
          fx.sends.emplace_back(
              from, relay::Message{it->second.topic, it->second.message});
        }
      }
      return fx;
    }
    if (auto *sub = std::get_if<relay::Subscribe>(&frame)) {
      auto &state = topics_[sub->topic];
      state.known_peers.insert(from);
      if (state.mesh_peers.size() < params_.mesh_degree) {
        state.mesh_peers.insert(from);
      }
      return fx;
    }
    if (auto *unsub = std::get_if<relay::Unsubscribe>(&frame)) {
      auto it = topics_.find(unsub->topic);
      if (it != topics_.end()) {
        it->second.known_peers.erase(from);
        it->second.mesh_peers.erase(from);
        drop_topic_if_unused(unsub->topic);
      }
    }
    return fx;
  }

  RelayEffects Relay::heartbeat(std::int64_t now) {
    RelayEffects fx;
    seen_.prune(now);
    std::erase_if(requested_, [&](const auto &kv) {
      return now - kv.second >= params_.heartbeat_interval;
    });

    for (auto &[topic, state] : topics_) {
      if (state.mesh_peers.size() < params_.mesh_degree) {
        graft_up_to_degree(state);
      } else if (state.mesh_peers.size() > params_.mesh_high()) {
        std::vector<PeerId> mesh(state.mesh_peers.begin(), state.mesh_peers.end());
        auto keep = sample(std::move(mesh), params_.mesh_degree, rng_);
        state.mesh_peers = std::set<PeerId>(keep.begin(), keep.end());
      }

      std::vector<MessageDigest> gossip;
      for (const auto &bucket : window_) {
        for (const auto &d : bucket) {
          auto it = retained_.find(d);
          if (it != retained_.end() && it->second.topic == topic) {
            gossip.push_back(d);
          }
        }
      }
      if (gossip.empty()) {
        continue;
      }
      std::vector<PeerId> outside;
      for (const auto &peer : state.known_peers) {
        if (!state.mesh_peers.contains(peer)) {
          outside.push_back(peer);
        }
      }
      for (auto &peer : sample(std::move(outside), params_.mesh_degree, rng_)) {
        fx.sends.emplace_back(std::move(peer), relay::IHave{topic, gossip});
      }
    }

    window_.emplace_front();
    while (window_.size() > params_.gossip_window) {
      for (const auto &d : window_.back()) {
        retained_.erase(d);
      }
      window_.pop_back();
    }
    return fx;
  }

  bool Relay::has_pending_gossip() const {
    return !retained_.empty();
  }

  const TopicState *Relay::topic(const PubsubTopic &t) const {
    auto it = topics_.find(t);
    return it == topics_.end() ? nullptr : &it->second;
  }

  void Relay::graft_up_to_degree(TopicState &state) {
    if (state.mesh_peers.size() >= params_.mesh_degree) {
      return;
    }
    std::vector<PeerId> candidates;
    for (const auto &peer : state.known_peers) {
      if (!state.mesh_peers.contains(peer)) {
        candidates.push_back(peer);
      }
    }
    auto want = params_.mesh_degree - state.mesh_peers.size();
    for (auto &peer : sample(std::move(candidates), want, rng_)) {
      state.mesh_peers.insert(std::move(peer));
    }
  }

  void Relay::drop_topic_if_unused(const PubsubTopic &topic) {
    auto it = topics_.find(topic);
    if (it != topics_.end() && !it->second.subscribed_locally
        && it->second.known_peers.empty()) {
      topics_.erase(it);
    }
  }

}  // namespace waku
