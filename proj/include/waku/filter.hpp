/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <waku/message.hpp>
#include <waku/wire.hpp>

namespace waku {

  struct FilterLimits {
    std::size_t max_subscriptions_per_peer = 16;
    /// Consecutive undeliverable pushes before a subscription is dropped.
    std::size_t push_failure_limit = 3;
  };

  struct FilterSubscription {
    std::string id;
    PeerId subscriber;
    PubsubTopic pubsub_topic;
    ContentFilter filter;
    std::int64_t created_at = 0;
  };

  /// A push the server owes a subscriber.
  struct PendingPush {
    std::string subscription_id;
    PeerId subscriber;
  };

  /**
   * Full-mode filter bookkeeping. Subscription ids are random 16-hex-digit
   * tokens drawn from the node's generator.
   */
  class FilterServer {
   public:
    FilterServer(FilterLimits limits, std::mt19937_64 &rng)
        : limits_(limits), rng_(rng) {}

    /// Throws ProtocolError("too many subscriptions").
    std::string subscribe(const PeerId &subscriber, PubsubTopic pubsub_topic,
                          ContentFilter filter, std::int64_t now);
    /// Throws ProtocolError("no such subscription") for ids not issued to
    /// `subscriber`, including already-removed ones.
    void unsubscribe(const PeerId &subscriber, const std::string &id);

    /// Subscriptions matching a freshly relayed message, in id order.
    std::vector<PendingPush> matching(const PubsubTopic &topic,
                                      const WakuMessage &msg) const;

    /// Returns true if the subscription was dropped by this report.
    bool report_push(const std::string &id, bool delivered);

    std::size_t size() const {
      return subs_.size();
    }
    std::size_t count_for(const PeerId &subscriber) const;
    const FilterSubscription *find(const std::string &id) const;

   private:
    FilterLimits limits_;
    std::mt19937_64 &rng_;
    std::map<std::string, FilterSubscription> subs_;
    std::map<std::string, std::size_t> failures_;
  };

  namespace filter {
    struct SubscribeRequest {
      PubsubTopic pubsub_topic;
      ContentFilter filter;
      bool operator==(const SubscribeRequest &) const = default;
    };
    struct UnsubscribeRequest {
      std::string id;
      bool operator==(const UnsubscribeRequest &) const = default;
    };
    struct MessagePush {
      std::string id;
      PubsubTopic pubsub_topic;
      WakuMessage message;
      bool operator==(const MessagePush &) const = default;
    };
  }  // namespace filter

  using FilterFrame = std::variant<filter::SubscribeRequest,
                                   filter::UnsubscribeRequest, filter::MessagePush>;

  /// Request/push bodies: `type:u8` (1 subscribe, 2 unsubscribe, 3 push).
  /// Responses use the common envelope; a subscribe response carries the id.
  Bytes encode_filter_frame(const FilterFrame &f);
  FilterFrame decode_filter_frame(BytesView body);
  std::string_view filter_frame_name(const FilterFrame &f);

}  // namespace waku
