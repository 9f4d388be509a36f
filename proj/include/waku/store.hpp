/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include <waku/message.hpp>

namespace waku {

  /// Archive order: receiver time, then digest.
  struct IndexKey {
    std::int64_t receiver_time = 0;
    MessageDigest digest;

    auto operator<=>(const IndexKey &) const = default;
  };

  struct StoredMessage {
    WakuMessage msg;
    PubsubTopic pubsub_topic;
    std::int64_t receiver_time = 0;
    MessageDigest digest;

    IndexKey key() const {
      return {receiver_time, digest};
    }
    bool operator==(const StoredMessage &) const = default;
  };

  enum class Direction : std::uint8_t {
    forward = 0,
    backward = 1,
  };

  constexpr std::uint32_t kDefaultPageSize = 20;
  constexpr std::uint32_t kMaxPageSize = 100;

  struct HistoryQuery {
    std::optional<PubsubTopic> pubsub_topic;
    ContentFilter filter;
    /// Inclusive lower bound on receiver time.
    std::optional<std::int64_t> time_start;
    /// Exclusive upper bound on receiver time.
    std::optional<std::int64_t> time_end;
    std::uint32_t page_size = kDefaultPageSize;
    /// Exclusive resume point; need not exist in the archive.
    std::optional<IndexKey> cursor;
    Direction direction = Direction::forward;

    /// page_size clamped into [1, kMaxPageSize].
    std::uint32_t effective_page_size() const;
    /// Topic, content filter and time bounds; ignores cursor/paging.
    bool selects(const StoredMessage &m) const;

    bool operator==(const HistoryQuery &) const = default;
  };

  struct HistoryResponse {
    std::vector<StoredMessage> messages;
    std::optional<IndexKey> next_cursor;

    bool operator==(const HistoryResponse &) const = default;
  };

  /**
   * Capacity-bounded, key-ordered message archive. Inserting past capacity
   * evicts the smallest key.
   */
  class Archive {
   public:
    /// Throws InvalidArgument if capacity is zero.
    explicit Archive(std::size_t capacity);

    /// Returns false if the key was already present.
    bool insert(const WakuMessage &msg, const PubsubTopic &pubsub_topic,
                std::int64_t receiver_time);
    void insert(StoredMessage stored);

    HistoryResponse query(const HistoryQuery &q) const;

    std::size_t size() const {
      return entries_.size();
    }
    std::size_t capacity() const {
      return capacity_;
    }
    std::vector<StoredMessage> contents() const;
    bool contains(const IndexKey &k) const {
      return entries_.contains(k);
    }

   private:
    std::size_t capacity_;
    std::map<IndexKey, StoredMessage> entries_;
  };

  /**
   * Client-side check of a response against the query that produced it:
   * page bound, strict ordering in the query direction, position relative to
   * the cursor, selection criteria and digest integrity. Throws ProtocolError.
   */
  void validate_response(const HistoryQuery &q, const HistoryResponse &r);

  Bytes encode_history_query(const HistoryQuery &q);
  HistoryQuery decode_history_query(BytesView body);
  Bytes encode_history_response(const HistoryResponse &r);
  HistoryResponse decode_history_response(BytesView body);

  Bytes encode_stored_message(const StoredMessage &m);
  StoredMessage decode_stored_message(BytesView bytes);

  /// Length-prefixed StoredMessage records. Writes to a temporary file and
  /// renames it into place.
  void write_snapshot(const std::filesystem::path &path,
                      const std::vector<StoredMessage> &messages);
  std::vector<StoredMessage> read_snapshot(const std::filesystem::path &path);

}  // namespace waku
