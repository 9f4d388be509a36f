/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/filter.hpp>

#include <waku/error.hpp>

namespace waku {

  namespace {
    constexpr std::size_t kMaxIdLen = 64;

    PubsubTopic read_topic(ByteReader &r) {
      auto pos = r.position();
      auto s = r.str(MessageLimits{}.max_topic);
      try {
        return PubsubTopic(std::move(s));
      } catch (const InvalidArgument &e) {
        throw CodecError(e.what(), pos);
      }
    }

    std::string random_token(std::mt19937_64 &rng) {
      Bytes raw(8);
      auto v = rng();
      for (int i = 0; i < 8; ++i) {
        raw[i] = static_cast<std::uint8_t>(v >> (8 * i));
      }
      return to_hex(raw);
    }
  }  // namespace

  std::string FilterServer::subscribe(const PeerId &subscriber,
                                      PubsubTopic pubsub_topic,
                                      ContentFilter filter, std::int64_t now) {
    if (count_for(subscriber) >= limits_.max_subscriptions_per_peer) {
      throw ProtocolError("too many subscriptions");
    }
    std::string id;
    do {
      id = random_token(rng_);
    } while (subs_.contains(id));
    subs_.emplace(id, FilterSubscription{id, subscriber, std::move(pubsub_topic),
                                         std::move(filter), now});
    return id;
  }

  void FilterServer::unsubscribe(const PeerId &subscriber, const std::string &id) {
    auto it = subs_.find(id);
    if (it == subs_.end() || it->second.subscriber != subscriber) {
      throw ProtocolError("no such subscription");
    }
    subs_.erase(it);
    failures_.erase(id);
  }

  std::vector<PendingPush> FilterServer::matching(const PubsubTopic &topic,
                                                  const WakuMessage &msg) const {
    std::vector<PendingPush> out;
    for (const auto &[id, sub] : subs_) {
      if (sub.pubsub_topic == topic && matches(msg, sub.filter)) {
        out.push_back(PendingPush{id, sub.subscriber});
      }
    }
    return out;
  }

  bool FilterServer::report_push(const std::string &id, bool delivered) {
    if (!subs_.contains(id)) {
      return false;
    }
    if (delivered) {
      failures_.erase(id);
      return false;
    }
    if (++failures_[id] >= limits_.push_failure_limit) {
      subs_.erase(id);
      failures_.erase(id);
      return true;
    }
    return false;
  }

  std::size_t FilterServer::count_for(const PeerId &subscriber) const {
    std::size_t n = 0;
    for (const auto &[id, sub] : subs_) {
      n += sub.subscriber == subscriber ? 1 : 0;
    }
    return n;
  }

  const FilterSubscription *FilterServer::find(const std::string &id) const {
    auto it = subs_.find(id);
    return it == subs_.end() ? nullptr : &it->second;
  }

  Bytes encode_filter_frame(const FilterFrame &f) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(f.index() + 1));
    std::visit(
        [&](const auto &v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, filter::SubscribeRequest>) {
            w.str(v.pubsub_topic.str());
            w.u32(static_cast<std::uint32_t>(v.filter.content_topics.size()));
            for (const auto &t : v.filter.content_topics) {
              w.str(t);
            }
          } else if constexpr (std::is_same_v<T, filter::UnsubscribeRequest>) {
            w.str(v.id);
          } else {
            w.str(v.id);
            w.str(v.pubsub_topic.str());
            w.blob(encode_message(v.message));
          }
        },
        f);
    return std::move(w).take();
  }

  FilterFrame decode_filter_frame(BytesView body) {
    ByteReader r(body);
    auto type = r.u8();
    std::optional<FilterFrame> out;
    switch (type) {
      case 1: {
        auto topic = read_topic(r);
        auto count_pos = r.position();
        auto count = r.u32();
        if (count > r.remaining() / 4) {
          throw CodecError("content topic count exceeds body", count_pos);
        }
        ContentFilter cf;
        for (std::uint32_t i = 0; i < count; ++i) {
          cf.content_topics.push_back(r.str(MessageLimits{}.max_topic));
        }
        out.emplace(filter::SubscribeRequest{std::move(topic), std::move(cf)});
        break;
      }
      case 2:
        out.emplace(filter::UnsubscribeRequest{r.str(kMaxIdLen)});
        break;
      case 3: {
        auto id = r.str(kMaxIdLen);
        auto topic = read_topic(r);
        auto pos = r.position();
        auto encoded = r.blob((1u << 20) + 2048);
        try {
          out.emplace(filter::MessagePush{std::move(id), std::move(topic),
                                          decode_message(encoded)});
        } catch (const CodecError &e) {
          throw CodecError(std::string("embedded message: ") + e.what(), pos);
        }
        break;
      }
      default:
        throw CodecError("unknown filter frame type " + std::to_string(type), 0);
    }
    r.expect_done("filter frame");
    return std::move(*out);
  }

  std::string_view filter_frame_name(const FilterFrame &f) {
    static constexpr std::string_view kNames[] = {"SUBSCRIBE", "UNSUBSCRIBE",
                                                  "PUSH"};
    return kNames[f.index()];
  }

}  // namespace waku
