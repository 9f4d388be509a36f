/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/store.hpp>

#include <algorithm>
#include <fstream>

#include <waku/error.hpp>

namespace waku {

  namespace {
    enum QueryFlags : std::uint8_t {
      kHasTopic = 1 << 0,
      kHasStart = 1 << 1,
      kHasEnd = 1 << 2,
      kHasCursor = 1 << 3,
    };

    constexpr char kSnapshotMagic[8] = {'W', 'A', 'K', 'U', 'S', 'N', 'P', '1'};
    constexpr std::size_t kMaxRecord = (1u << 20) + 4096;

    IndexKey lowest_key_at(std::int64_t t) {
      return IndexKey{t, MessageDigest{}};
    }

    void write_key(ByteWriter &w, const IndexKey &k) {
      w.i64(k.receiver_time);
      w.raw(k.digest.bytes);
    }

    IndexKey read_key(ByteReader &r) {
      IndexKey k;
      k.receiver_time = r.i64();
      auto raw = r.raw(32);
      std::copy(raw.begin(), raw.end(), k.digest.bytes.begin());
      return k;
    }

    PubsubTopic read_topic(ByteReader &r) {
      auto pos = r.position();
      auto s = r.str(MessageLimits{}.max_topic);
      try {
        return PubsubTopic(std::move(s));
      } catch (const InvalidArgument &e) {
        throw CodecError(e.what(), pos);
      }
    }
  }  // namespace

  std::uint32_t HistoryQuery::effective_page_size() const {
    return std::clamp<std::uint32_t>(page_size, 1, kMaxPageSize);
  }

  bool HistoryQuery::selects(const StoredMessage &m) const {
    if (pubsub_topic && m.pubsub_topic != *pubsub_topic) {
      return false;
    }
    if (time_start && m.receiver_time < *time_start) {
      return false;
    }
    if (time_end && m.receiver_time >= *time_end) {
      return false;
    }
    return matches(m.msg, filter);
  }

  Archive::Archive(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
      throw InvalidArgument("store capacity must be at least 1");
    }
  }

  bool Archive::insert(const WakuMessage &msg, const PubsubTopic &pubsub_topic,
                       std::int64_t receiver_time) {
    StoredMessage stored{msg, pubsub_topic, receiver_time, digest(msg)};
    auto key = stored.key();
    if (entries_.contains(key)) {
      return false;
    }
    insert(std::move(stored));
    return true;
  }

  void Archive::insert(StoredMessage stored) {
    auto key = stored.key();
    entries_.emplace(key, std::move(stored));
    while (entries_.size() > capacity_) {
      entries_.erase(entries_.begin());
    }
  }

  HistoryResponse Archive::query(const HistoryQuery &q) const {
    HistoryResponse resp;
    const auto page = q.effective_page_size();

    if (q.direction == Direction::forward) {
      auto it = q.cursor ? entries_.upper_bound(*q.cursor) : entries_.begin();
      if (q.time_start) {
        auto lb = entries_.lower_bound(lowest_key_at(*q.time_start));
        // start at whichever of the two bounds is later
        if (lb == entries_.end()) {
          it = lb;
        } else if (it != entries_.end() && lb->first > it->first) {
          it = lb;
        }
      }
      for (; it != entries_.end(); ++it) {
        const auto &m = it->second;
        if (q.time_end && m.receiver_time >= *q.time_end) {
          break;
        }
        if (!q.selects(m)) {
          continue;
        }
        if (resp.messages.size() == page) {
          resp.next_cursor = resp.messages.back().key();
          break;
        }
        resp.messages.push_back(m);
      }
    } else {
      auto it = q.cursor ? entries_.lower_bound(*q.cursor) : entries_.end();
      if (q.time_end) {
        auto ub = entries_.lower_bound(lowest_key_at(*q.time_end));
        if (it == entries_.end() || (ub != entries_.end() && ub->first < it->first)) {
          it = ub;
        }
      }
      while (it != entries_.begin()) {
        --it;
        const auto &m = it->second;
        if (q.time_start && m.receiver_time < *q.time_start) {
          break;
        }
        if (!q.selects(m)) {
          continue;
        }
        if (resp.messages.size() == page) {
          resp.next_cursor = resp.messages.back().key();
          break;
        }
        resp.messages.push_back(m);
      }
    }
    return resp;
  }

  std::vector<StoredMessage> Archive::contents() const {
    std::vector<StoredMessage> out;
    out.reserve(entries_.size());
    for (const auto &[k, m] : entries_) {
      out.push_back(m);
    }
    return out;
  }

  void validate_response(const HistoryQuery &q, const HistoryResponse &r) {
    if (r.messages.size() > q.effective_page_size()) {
      throw ProtocolError("store response exceeds page size");
    }
    const bool fwd = q.direction == Direction::forward;
    std::optional<IndexKey> prev = q.cursor;
    for (const auto &m : r.messages) {
      if (digest(m.msg) != m.digest) {
        throw ProtocolError("store response digest mismatch");
      }
      if (!q.selects(m)) {
        throw ProtocolError("store response contains a non-matching message");
      }
      if (prev && (fwd ? !(m.key() > *prev) : !(m.key() < *prev))) {
        throw ProtocolError("store response messages out of order");
      }
      prev = m.key();
    }
    if (r.next_cursor) {
      if (r.messages.empty() || *r.next_cursor != r.messages.back().key()) {
        throw ProtocolError("store response cursor does not match last message");
      }
    }
  }

  Bytes encode_history_query(const HistoryQuery &q) {
    ByteWriter w;
    std::uint8_t flags = 0;
    flags |= q.pubsub_topic ? kHasTopic : 0;
    flags |= q.time_start ? kHasStart : 0;
    flags |= q.time_end ? kHasEnd : 0;
    flags |= q.cursor ? kHasCursor : 0;
    w.u8(flags);
    if (q.pubsub_topic) {
      w.str(q.pubsub_topic->str());
    }
    w.u32(static_cast<std::uint32_t>(q.filter.content_topics.size()));
    for (const auto &t : q.filter.content_topics) {
      w.str(t);
    }
    if (q.time_start) {
      w.i64(*q.time_start);
    }
    if (q.time_end) {
      w.i64(*q.time_end);
    }
    w.u32(q.page_size);
    if (q.cursor) {
      write_key(w, *q.cursor);
    }
    w.u8(static_cast<std::uint8_t>(q.direction));
    return std::move(w).take();
  }

  HistoryQuery decode_history_query(BytesView body) {
    ByteReader r(body);
    HistoryQuery q;
    auto flags = r.u8();
    if (flags & ~(kHasTopic | kHasStart | kHasEnd | kHasCursor)) {
      throw CodecError("unknown query flags", 0);
    }
    if (flags & kHasTopic) {
      q.pubsub_topic = read_topic(r);
    }
    auto count_pos = r.position();
    auto count = r.u32();
    if (count > r.remaining() / 4) {
      throw CodecError("content topic count exceeds body", count_pos);
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      q.filter.content_topics.push_back(r.str(MessageLimits{}.max_topic));
    }
    if (flags & kHasStart) {
      q.time_start = r.i64();
    }
    if (flags & kHasEnd) {
      q.time_end = r.i64();
    }
    q.page_size = r.u32();
    if (flags & kHasCursor) {
      q.cursor = read_key(r);
    }
    auto dir_pos = r.position();
    auto dir = r.u8();
    if (dir > 1) {
      throw CodecError("unknown direction", dir_pos);
    }
    q.direction = static_cast<Direction>(dir);
    r.expect_done("history query");
    return q;
  }

  Bytes encode_stored_message(const StoredMessage &m) {
    ByteWriter w;
    w.str(m.pubsub_topic.str());
    w.i64(m.receiver_time);
    w.blob(encode_message(m.msg));
    return std::move(w).take();
  }

  StoredMessage decode_stored_message(BytesView bytes) {
    ByteReader r(bytes);
    auto topic = read_topic(r);
    auto t = r.i64();
    auto pos = r.position();
    auto encoded = r.blob(kMaxRecord);
    WakuMessage msg;
    try {
      msg = decode_message(encoded);
    } catch (const CodecError &e) {
      throw CodecError(std::string("embedded message: ") + e.what(), pos);
    }
    r.expect_done("stored message");
    auto d = digest(msg);
    return StoredMessage{std::move(msg), std::move(topic), t, d};
  }

  Bytes encode_history_response(const HistoryResponse &resp) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(resp.messages.size()));
    for (const auto &m : resp.messages) {
      w.blob(encode_stored_message(m));
    }
    w.u8(resp.next_cursor ? 1 : 0);
    if (resp.next_cursor) {
      write_key(w, *resp.next_cursor);
    }
    return std::move(w).take();
  }

  HistoryResponse decode_history_response(BytesView body) {
    ByteReader r(body);
    HistoryResponse resp;
    auto count_pos = r.position();
    auto count = r.u32();
    if (count > kMaxPageSize) {
      throw CodecError("response carries more than the maximum page", count_pos);
    }
    for (std::uint32_t i = 0; i < count; ++i) {
      auto pos = r.position();
      auto record = r.blob(kMaxRecord);
      try {
        resp.messages.push_back(decode_stored_message(record));
      } catch (const CodecError &e) {
        throw CodecError(std::string("record: ") + e.what(), pos);
      }
    }
    auto has_pos = r.position();
    auto has = r.u8();
    if (has > 1) {
      throw CodecError("invalid cursor flag", has_pos);
    }
    if (has) {
      resp.next_cursor = read_key(r);
    }
    r.expect_done("history response");
    return resp;
  }

  void write_snapshot(const std::filesystem::path &path,
                      const std::vector<StoredMessage> &messages) {
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw Error("cannot open snapshot file " + tmp.string());
      }
      out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
      for (const auto &m : messages) {
        ByteWriter w;
        w.blob(encode_stored_message(m));
        out.write(reinterpret_cast<const char *>(w.bytes().data()),
                  static_cast<std::streamsize>(w.bytes().size()));
      }
      out.flush();
      if (!out) {
        throw Error("failed writing snapshot file " + tmp.string());
      }
    }
    std::filesystem::rename(tmp, path);
  }

  std::vector<StoredMessage> read_snapshot(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw Error("cannot open snapshot file " + path.string());
    }
    Bytes data((std::istreambuf_iterator<char>(in)),
               std::istreambuf_iterator<char>());
    ByteReader r(data);
    auto magic = r.raw(sizeof(kSnapshotMagic));
    if (!std::equal(magic.begin(), magic.end(),
                    reinterpret_cast<const std::uint8_t *>(kSnapshotMagic))) {
      throw CodecError("not a snapshot file", 0);
    }
    std::vector<StoredMessage> out;
    while (!r.done()) {
      auto pos = r.position();
      auto record = r.blob(kMaxRecord);
      try {
        out.push_back(decode_stored_message(record));
      } catch (const CodecError &e) {
        throw CodecError(std::string("snapshot record: ") + e.what(), pos);
      }
    }
    return out;
  }

}  // namespace waku
