/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <waku/bytes.hpp>

namespace waku {

  /// Size bounds applied by the message codec. Defaults suit constrained
  /// clients; nodes may configure larger values.
  struct MessageLimits {
    std::size_t max_payload = 1u << 20;
    std::size_t max_topic = 1024;
  };

  /// The routed data unit. `timestamp` is sender-assigned nanoseconds since
  /// the Unix epoch; receivers record their own receive time separately.
  struct WakuMessage {
    Bytes payload;
    std::string content_topic;
    std::uint32_t version = 0;
    std::int64_t timestamp = 0;

    bool operator==(const WakuMessage &) const = default;
  };

  /// Throws InvalidArgument if `msg` breaks the size/emptiness invariants.
  void validate(const WakuMessage &msg, const MessageLimits &limits = {});

  /// Routing key for relay. Never compared against content topics.
  class PubsubTopic {
   public:
    /// Throws InvalidArgument on empty or over-long values.
    explicit PubsubTopic(std::string value);

    const std::string &str() const {
      return value_;
    }

    auto operator<=>(const PubsubTopic &) const = default;

   private:
    std::string value_;
  };

  struct MessageDigest {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const {
      return to_hex(bytes);
    }
    static MessageDigest from_hex(std::string_view hex);

    auto operator<=>(const MessageDigest &) const = default;
  };

  /// Empty `content_topics` matches every message.
  struct ContentFilter {
    std::vector<std::string> content_topics;

    bool operator==(const ContentFilter &) const = default;
  };

  /**
   * Canonical binary form. Four mandatory fields in fixed tag order, each
   * `tag:u8 | len:u32le | value`:
   *   0x01 content_topic, 0x02 payload, 0x03 version (u32le),
   *   0x04 timestamp (i64le).
   * See docs/wire.md.
   */
  Bytes encode_message(const WakuMessage &msg, const MessageLimits &limits = {});

  /// Strict inverse of encode_message: rejects truncation, unknown or
  /// out-of-order tags, invariant violations, and trailing bytes.
  WakuMessage decode_message(BytesView bytes, const MessageLimits &limits = {});

  /// SHA-256 over `u32le(len(content_topic)) | content_topic | payload`.
  /// Version and timestamp are excluded so identical republished content
  /// deduplicates.
  MessageDigest digest(const WakuMessage &msg);

  bool matches(const WakuMessage &msg, const ContentFilter &filter);

}  // namespace waku
