/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace waku;
using waku::test::make_message;
using waku::test::read_fixture;

TEST_CASE("hex and base64 helpers round-trip") {
  Bytes b = {0x00, 0x01, 0xfe, 0xff};
  CHECK(to_hex(b) == "0001feff");
  CHECK(from_hex("0001feff") == b);
  CHECK_THROWS_AS(from_hex("0G"), CodecError);
  CHECK_THROWS_AS(from_hex("ABCD"), CodecError);
  CHECK_THROWS_AS(from_hex("abc"), CodecError);
  CHECK(to_base64(to_bytes("msg1")) == "bXNnMQ==");
  CHECK(from_base64("bXNnMQ==") == to_bytes("msg1"));
  CHECK_THROWS_AS(from_base64("***"), CodecError);
}

TEST_CASE("byte reader reports the failing position") {
  Bytes b = {1, 2, 3};
  ByteReader r(b);
  r.u8();
  try {
    r.u32();
    FAIL("expected CodecError");
  } catch (const CodecError &e) {
    CHECK(e.position() == 1);
  }
}

TEST_CASE("minimal message matches the golden vector") {
  WakuMessage m;
  m.content_topic = "a";
  auto golden = from_hex(read_fixture("message_minimal.hex"));
  CHECK(encode_message(m) == golden);
  CHECK(decode_message(golden) == m);
  CHECK(digest(m).hex() == read_fixture("message_minimal.digest.hex"));
}

TEST_CASE("content1 message matches the golden vector") {
  auto j = Json::parse(read_fixture("message_content1.json"));
  auto m = message_from_json(j);
  auto golden = from_hex(read_fixture("message_content1.hex"));
  CHECK(encode_message(m) == golden);
  CHECK(decode_message(golden) == m);
  CHECK(digest(m).hex() == read_fixture("message_content1.digest.hex"));
  CHECK(message_to_json(m) == j);
}

TEST_CASE("message validation limits") {
  WakuMessage m;
  m.content_topic = "t";
  m.payload.assign(2 * 1024 * 1024, 0);
  CHECK_THROWS_WITH(validate(m), Catch::Matchers::ContainsSubstring("payload too large"));
  CHECK_THROWS_AS(encode_message(m), CodecError);
  m.payload.assign(MessageLimits{}.max_payload, 0);
  CHECK_NOTHROW(validate(m));

  WakuMessage empty_topic;
  CHECK_THROWS_AS(validate(empty_topic), InvalidArgument);
  WakuMessage long_topic;
  long_topic.content_topic.assign(1025, 'x');
  CHECK_THROWS_AS(validate(long_topic), InvalidArgument);
}

TEST_CASE("strict message decoding") {
  CHECK_THROWS_AS(decode_message(Bytes{}), CodecError);
  auto enc = encode_message(make_message("c", "p", 5));
  auto trailing = enc;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_message(trailing), CodecError);
  for (std::size_t cut = 0; cut < enc.size(); ++cut) {
    CHECK_THROWS_AS(decode_message(BytesView(enc.data(), cut)), CodecError);
  }
  auto bad_tag = enc;
  bad_tag[0] = 0x09;
  CHECK_THROWS_AS(decode_message(bad_tag), CodecError);
}

TEST_CASE("message codec round-trips random messages") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    WakuMessage m;
    m.content_topic = "topic-" + std::to_string(rng() % 1000);
    m.payload.resize(rng() % 300);
    for (auto &b : m.payload) {
      b = static_cast<std::uint8_t>(rng());
    }
    m.version = static_cast<std::uint32_t>(rng());
    m.timestamp = static_cast<std::int64_t>(rng());
    auto enc = encode_message(m);
    CHECK(decode_message(enc) == m);
    CHECK(encode_message(decode_message(enc)) == enc);
  }
}

TEST_CASE("digest ignores version and timestamp, separates payloads") {
  auto a = make_message("c", "x", 1);
  auto b = a;
  b.version = 9;
  b.timestamp = 77;
  CHECK(digest(a) == digest(b));

  std::mt19937_64 rng(11);
  std::set<MessageDigest> seen;
  std::set<Bytes> payloads;
  for (int i = 0; i < 10000; ++i) {
    WakuMessage m;
    m.content_topic = "c";
    m.payload.resize(16);
    for (auto &x : m.payload) {
      x = static_cast<std::uint8_t>(rng());
    }
    if (payloads.insert(m.payload).second) {
      CHECK(seen.insert(digest(m)).second);
    }
  }
  // Length prefix keeps topic/payload boundaries apart.
  CHECK(digest(make_message("ab", "c")) != digest(make_message("a", "bc")));
}

TEST_CASE("content filter matching") {
  auto m = make_message("content1", "");
  CHECK(matches(m, ContentFilter{{"content1"}}));
  CHECK(matches(m, ContentFilter{}));
  CHECK_FALSE(matches(m, ContentFilter{{"content2"}}));
  CHECK(matches(m, ContentFilter{{"content2", "content1"}}));
  CHECK_FALSE(matches(m, ContentFilter{{"content"}}));
}

TEST_CASE("pubsub topic validation") {
  CHECK_NOTHROW(PubsubTopic("/waku/2/default-waku/proto"));
  CHECK_THROWS_AS(PubsubTopic(""), InvalidArgument);
}

TEST_CASE("fuzzed message decoding never crashes") {
  std::mt19937_64 rng(3);
  auto base = encode_message(make_message("content1", "hello", 42));
  for (int i = 0; i < 5000; ++i) {
    auto b = base;
    auto flips = 1 + rng() % 4;
    for (std::size_t f = 0; f < flips; ++f) {
      b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
    }
    if (rng() % 4 == 0) {
      b.resize(rng() % (b.size() + 1));
    }
    try {
      auto m = decode_message(b);
      CHECK(encode_message(m) == b);
    } catch (const CodecError &) {
    }
  }
}
