/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include <waku/message.hpp>
#include <waku/runtime.hpp>
#include <waku/wire.hpp>

namespace waku {

  struct RelayParams {
    std::size_t mesh_degree = 6;
    std::int64_t heartbeat_interval = 1 * kSecond;
    std::int64_t seen_ttl = 120 * kSecond;
    /// Heartbeats for which a message is advertised in IHAVE and retained for
    /// IWANT.
    std::size_t gossip_window = 3;

    std::size_t mesh_high() const {
      return 2 * mesh_degree;
    }
    /// Throws InvalidArgument.
    void validate() const;

    bool operator==(const RelayParams &) const = default;
  };

  namespace relay {
    struct Message {
      PubsubTopic topic;
      WakuMessage message;
      bool operator==(const Message &) const = default;
    };
    struct IHave {
      PubsubTopic topic;
      std::vector<MessageDigest> digests;
      bool operator==(const IHave &) const = default;
    };
    struct IWant {
      std::vector<MessageDigest> digests;
      bool operator==(const IWant &) const = default;
    };
    struct Subscribe {
      PubsubTopic topic;
      bool operator==(const Subscribe &) const = default;
    };
    struct Unsubscribe {
      PubsubTopic topic;
      bool operator==(const Unsubscribe &) const = default;
    };
  }  // namespace relay

  using RelayFrame = std::variant<relay::Message, relay::IHave, relay::IWant,
                                  relay::Subscribe, relay::Unsubscribe>;

  /// Body of a relay push frame: `type:u8` (1..5 in variant order) followed
  /// by the type's fields.
  Bytes encode_relay_frame(const RelayFrame &frame, const MessageLimits &limits = {});
  RelayFrame decode_relay_frame(BytesView body, const MessageLimits &limits = {});
  std::string_view relay_frame_name(const RelayFrame &frame);

  /// TTL-bounded set of digests used for duplicate suppression.
  class SeenCache {
   public:
    explicit SeenCache(std::int64_t ttl) : ttl_(ttl) {}

    /// True if `d` was not present. Re-inserting keeps the first time.
    bool insert(const MessageDigest &d, std::int64_t now);
    bool contains(const MessageDigest &d) const {
      return entries_.contains(d);
    }
    void prune(std::int64_t now);
    std::size_t size() const {
      return entries_.size();
    }

   private:
    std::int64_t ttl_;
    std::map<MessageDigest, std::int64_t> entries_;
  };

  struct TopicState {
    std::set<PeerId> mesh_peers;
    std::set<PeerId> known_peers;
    bool subscribed_locally = false;
  };

  struct PublishReceipt {
    MessageDigest digest;
    std::size_t eager_sends = 0;
  };

  /// A message seen for the first time by this node, whether published
  /// locally or received from a peer.
  struct RelayDelivery {
    PubsubTopic topic;
    WakuMessage message;
    MessageDigest digest;
    bool local_subscriber = false;
  };

  struct RelayEffects {
    std::vector<std::pair<PeerId, RelayFrame>> sends;
    std::vector<RelayDelivery> fresh;

    void append(RelayEffects other);
  };

  /**
   * Gossip router state machine for one node. Pure with respect to I/O: every
   * input returns the frames to send and the fresh messages to hand to local
   * consumers. Routing never inspects content topics.
   *
   * Meshes are maintained per topic for every topic with known subscribers,
   * so a node that publishes without subscribing still pushes eagerly.
   */
  class Relay {
   public:
    Relay(RelayParams params, std::mt19937_64 &rng,
          MessageLimits limits = {});

    const RelayParams &params() const {
      return params_;
    }

    /// A connected peer that advertised relay.
    RelayEffects add_peer(const PeerId &peer);
    void remove_peer(const PeerId &peer);

    RelayEffects subscribe(const PubsubTopic &topic);
    RelayEffects unsubscribe(const PubsubTopic &topic);
    bool subscribed(const PubsubTopic &topic) const;
    std::vector<PubsubTopic> subscriptions() const;

    /// Throws InvalidArgument for invalid or oversize messages.
    std::pair<PublishReceipt, RelayEffects> publish(const PubsubTopic &topic,
                                                    const WakuMessage &msg,
                                                    std::int64_t now);

    RelayEffects on_frame(const PeerId &from, const RelayFrame &frame,
                          std::int64_t now);

    RelayEffects heartbeat(std::int64_t now);

    /// True while some message is still inside the gossip window.
    bool has_pending_gossip() const;

    const TopicState *topic(const PubsubTopic &t) const;
    const SeenCache &seen() const {
      return seen_;
    }

   private:
    struct Cached {
      PubsubTopic topic;
      WakuMessage message;
    };

    RelayEffects accept(const PubsubTopic &topic, const WakuMessage &msg,
                        const MessageDigest &d, const std::optional<PeerId> &from,
                        std::int64_t now);
    void graft_up_to_degree(TopicState &state);
    void drop_topic_if_unused(const PubsubTopic &topic);

    RelayParams params_;
    MessageLimits limits_;
    std::mt19937_64 &rng_;
    std::set<PeerId> peers_;
    std::map<PubsubTopic, TopicState> topics_;
    SeenCache seen_;
    // front is the current heartbeat's bucket
    std::deque<std::vector<MessageDigest>> window_;
    std::map<MessageDigest, Cached> retained_;
    std::map<MessageDigest, std::int64_t> requested_;
  };

}  // namespace waku
