/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace waku;
using waku::test::make_message;
using waku::test::OracleEntry;

namespace {
  const std::vector<std::string> kTopics = {"pub1", "pub2"};
  const std::vector<std::string> kContent = {"c1", "c2", "c3"};

  std::vector<MessageDigest> digests_of(const std::vector<StoredMessage> &v) {
    std::vector<MessageDigest> out;
    for (const auto &m : v) {
      out.push_back(m.digest);
    }
    return out;
  }

  std::vector<MessageDigest> digests_of(const std::vector<OracleEntry> &v) {
    std::vector<MessageDigest> out;
    for (const auto &m : v) {
      out.push_back(m.digest);
    }
    return out;
  }

  /// Pages a query to exhaustion, checking each page along the way.
  std::vector<StoredMessage> drain(const Archive &a, HistoryQuery q, std::size_t *pages = nullptr) {
    std::vector<StoredMessage> all;
    std::size_t n = 0;
    while (true) {
      auto r = a.query(q);
      validate_response(q, r);
      ++n;
      REQUIRE(n < 10000);
      all.insert(all.end(), r.messages.begin(), r.messages.end());
      if (!r.next_cursor) {
        break;
      }
      REQUIRE(r.messages.size() == q.effective_page_size());
      q.cursor = r.next_cursor;
    }
    if (pages) {
      *pages = n;
    }
    return all;
  }
}  // namespace

TEST_CASE("page size clamps into [1, 100]") {
  HistoryQuery q;
  CHECK(q.effective_page_size() == 20);
  q.page_size = 0;
  CHECK(q.effective_page_size() == 1);
  q.page_size = 5000;
  CHECK(q.effective_page_size() == 100);
}

TEST_CASE("zero capacity is rejected") {
  CHECK_THROWS_AS(Archive(0), InvalidArgument);
}

TEST_CASE("25 matching messages page as 10, 10, 5 in both directions") {
  Archive a(1000);
  for (int i = 0; i < 25; ++i) {
    a.insert(make_message("c1", "m" + std::to_string(i)), PubsubTopic("pub1"), 100 + i);
  }
  for (auto dir : {Direction::forward, Direction::backward}) {
    HistoryQuery q;
    q.page_size = 10;
    q.direction = dir;
    std::vector<std::size_t> sizes;
    std::vector<std::int64_t> times;
    while (true) {
      auto r = a.query(q);
      validate_response(q, r);
      sizes.push_back(r.messages.size());
      for (const auto &m : r.messages) {
        times.push_back(m.receiver_time);
      }
      if (!r.next_cursor) {
        break;
      }
      q.cursor = r.next_cursor;
    }
    CHECK(sizes == std::vector<std::size_t>{10, 10, 5});
    REQUIRE(times.size() == 25);
    CHECK(std::is_sorted(times.begin(), times.end(),
                         [&](auto x, auto y) { return dir == Direction::forward ? x < y : x > y; }));
  }
}

TEST_CASE("an exactly full final page has no cursor") {
  Archive a(100);
  for (int i = 0; i < 20; ++i) {
    a.insert(make_message("c1", "m" + std::to_string(i)), PubsubTopic("pub1"), i);
  }
  HistoryQuery q;
  q.page_size = 10;
  std::size_t pages = 0;
  CHECK(drain(a, q, &pages).size() == 20);
  CHECK(pages == 2);
}

TEST_CASE("empty archive answers with no messages and no cursor") {
  Archive a(10);
  auto r = a.query(HistoryQuery{});
  CHECK(r.messages.empty());
  CHECK_FALSE(r.next_cursor);
}

TEST_CASE("eviction drops the smallest keys") {
  Archive a(3);
  std::vector<MessageDigest> ds;
  for (int i = 0; i < 5; ++i) {
    auto m = make_message("c1", "m" + std::to_string(i));
    ds.push_back(digest(m));
    CHECK(a.insert(m, PubsubTopic("pub1"), 10 * (5 - i)));
  }
  // receiver times were 50, 40, 30, 20, 10; the three largest survive
  CHECK(a.size() == 3);
  auto c = a.contents();
  CHECK(digests_of(c) == std::vector<MessageDigest>{ds[2], ds[1], ds[0]});
  CHECK_FALSE(a.insert(make_message("c1", "m0"), PubsubTopic("pub1"), 50));
  // inserting a key below everything retained evicts it immediately
  auto low = make_message("c1", "low");
  a.insert(low, PubsubTopic("pub1"), 1);
  CHECK_FALSE(a.contains(IndexKey{1, digest(low)}));
  CHECK(a.size() == 3);
}

TEST_CASE("archive queries agree with the brute-force oracle") {
  std::mt19937_64 rng(20260101);
  for (int round = 0; round < 60; ++round) {
    std::size_t capacity = 1 + rng() % 40;
    Archive a(capacity);
    std::vector<OracleEntry> inserted;
    int n = static_cast<int>(rng() % 80);
    for (int i = 0; i < n; ++i) {
      auto m = make_message(kContent[rng() % kContent.size()],
                            "r" + std::to_string(round) + "-" + std::to_string(rng() % 60));
      auto topic = kTopics[rng() % kTopics.size()];
      std::int64_t t = static_cast<std::int64_t>(rng() % 30);
      a.insert(m, PubsubTopic(topic), t);
      inserted.push_back({m, topic, t, digest(m)});
    }
    auto retained = waku::test::oracle_retain(inserted, capacity);
    CHECK(digests_of(a.contents()) == digests_of(retained));

    for (int qi = 0; qi < 20; ++qi) {
      HistoryQuery q;
      std::optional<std::string> topic;
      if (rng() % 2) {
        topic = kTopics[rng() % kTopics.size()];
        q.pubsub_topic = PubsubTopic(*topic);
      }
      std::vector<std::string> content;
      for (const auto &c : kContent) {
        if (rng() % 3 == 0) {
          content.push_back(c);
        }
      }
      q.filter.content_topics = content;
      if (rng() % 2) {
        q.time_start = static_cast<std::int64_t>(rng() % 30);
      }
      if (rng() % 2) {
        q.time_end = static_cast<std::int64_t>(rng() % 32);
      }
      q.page_size = static_cast<std::uint32_t>(rng() % 8);
      q.direction = rng() % 2 ? Direction::forward : Direction::backward;
      auto expected = waku::test::oracle_query(retained, topic, content, q.time_start, q.time_end,
                                               q.direction == Direction::forward);
      CHECK(digests_of(drain(a, q)) == digests_of(expected));
    }
  }
}

TEST_CASE("cursors need not exist in the archive") {
  Archive a(100);
  for (int i = 0; i < 10; ++i) {
    a.insert(make_message("c1", "m" + std::to_string(i)), PubsubTopic("pub1"), 10 * i);
  }
  HistoryQuery q;
  q.cursor = IndexKey{35, MessageDigest{}};
  auto r = a.query(q);
  REQUIRE(r.messages.size() == 6);
  CHECK(r.messages.front().receiver_time == 40);
  q.direction = Direction::backward;
  r = a.query(q);
  REQUIRE(r.messages.size() == 4);
  CHECK(r.messages.front().receiver_time == 30);
}

TEST_CASE("client-side response validation") {
  Archive a(100);
  for (int i = 0; i < 5; ++i) {
    a.insert(make_message("c1", "m" + std::to_string(i)), PubsubTopic("pub1"), i);
  }
  HistoryQuery q;
  q.page_size = 3;
  auto good = a.query(q);
  CHECK_NOTHROW(validate_response(q, good));

  auto reordered = good;
  std::swap(reordered.messages[0], reordered.messages[1]);
  CHECK_THROWS_AS(validate_response(q, reordered), ProtocolError);

  auto tampered = good;
  tampered.messages[0].msg.payload.push_back(1);
  CHECK_THROWS_AS(validate_response(q, tampered), ProtocolError);

  auto bad_cursor = good;
  bad_cursor.next_cursor = good.messages.front().key();
  CHECK_THROWS_AS(validate_response(q, bad_cursor), ProtocolError);

  HistoryQuery other = q;
  other.filter.content_topics = {"c2"};
  CHECK_THROWS_AS(validate_response(other, good), ProtocolError);

  HistoryQuery small = q;
  small.page_size = 2;
  CHECK_THROWS_AS(validate_response(small, good), ProtocolError);
}

TEST_CASE("query and response codecs round-trip") {
  HistoryQuery q;
  q.pubsub_topic = PubsubTopic("pub1");
  q.filter.content_topics = {"c1", "c2"};
  q.time_start = -5;
  q.time_end = 99;
  q.page_size = 7;
  q.cursor = IndexKey{3, digest(make_message("c1", "x"))};
  q.direction = Direction::backward;
  CHECK(decode_history_query(encode_history_query(q)) == q);
  CHECK(decode_history_query(encode_history_query(HistoryQuery{})) == HistoryQuery{});

  Archive a(10);
  for (int i = 0; i < 4; ++i) {
    a.insert(make_message("c1", "m" + std::to_string(i), i), PubsubTopic("pub1"), i);
  }
  HistoryQuery page;
  page.page_size = 3;
  auto r = a.query(page);
  REQUIRE(r.next_cursor);
  CHECK(decode_history_response(encode_history_response(r)) == r);

  auto enc = encode_history_query(q);
  enc[0] = 0x80;
  CHECK_THROWS_AS(decode_history_query(enc), CodecError);
  enc = encode_history_query(q);
  enc.back() = 2;
  CHECK_THROWS_AS(decode_history_query(enc), CodecError);
  enc = encode_history_response(r);
  enc.push_back(0);
  CHECK_THROWS_AS(decode_history_response(enc), CodecError);

  std::mt19937_64 rng(3);
  auto base = encode_history_response(r);
  for (int i = 0; i < 3000; ++i) {
    auto b = base;
    b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
    try {
      auto d = decode_history_response(b);
      CHECK(encode_history_response(d).size() == b.size());
    } catch (const CodecError &) {
    }
  }
}

TEST_CASE("snapshots round-trip and reject corruption") {
  waku::test::TempDir dir;
  auto path = dir.path / "store.snapshot";
  Archive a(50);
  for (int i = 0; i < 30; ++i) {
    a.insert(make_message(kContent[i % 3], "m" + std::to_string(i), i),
             PubsubTopic(kTopics[i % 2]), 1000 + i);
  }
  write_snapshot(path, a.contents());
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  auto back = read_snapshot(path);
  CHECK(back == a.contents());

  Archive restored(50);
  for (auto &m : back) {
    restored.insert(m);
  }
  CHECK(restored.contents() == a.contents());

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS(read_snapshot(path), Error);

  write_snapshot(path, {});
  CHECK(read_snapshot(path).empty());
}
