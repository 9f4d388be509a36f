/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/message.hpp>

#include <algorithm>

#include <sodium.h>

#include <waku/error.hpp>

namespace waku {

  namespace {
    enum Tag : std::uint8_t {
      kContentTopic = 0x01,
      kPayload = 0x02,
      kVersion = 0x03,
      kTimestamp = 0x04,
    };

    void expect_tag(ByteReader &r, Tag tag) {
      auto pos = r.position();
      auto got = r.u8();
      if (got != tag) {
        throw CodecError("unexpected field tag " + std::to_string(got)
                             + ", expected " + std::to_string(tag),
                         pos);
      }
    }

    void expect_len(ByteReader &r, std::uint32_t want) {
      auto pos = r.position();
      auto got = r.u32();
      if (got != want) {
        throw CodecError("fixed-width field has length " + std::to_string(got),
                         pos);
      }
    }
  }  // namespace

  void validate(const WakuMessage &msg, const MessageLimits &limits) {
    if (msg.content_topic.empty()) {
      throw InvalidArgument("content topic is empty");
    }
    if (msg.content_topic.size() > limits.max_topic) {
      throw InvalidArgument("content topic too long");
    }
    if (msg.payload.size() > limits.max_payload) {
      throw InvalidArgument("payload too large");
    }
  }

  PubsubTopic::PubsubTopic(std::string value) : value_(std::move(value)) {
    if (value_.empty()) {
      throw InvalidArgument("pubsub topic is empty");
    }
    if (value_.size() > MessageLimits{}.max_topic) {
      throw InvalidArgument("pubsub topic too long");
    }
  }

  MessageDigest MessageDigest::from_hex(std::string_view hex) {
    auto raw = waku::from_hex(hex);
    if (raw.size() != 32) {
      throw CodecError("digest must be 32 bytes");
    }
    MessageDigest d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
  }

  Bytes encode_message(const WakuMessage &msg, const MessageLimits &limits) {
    try {
      validate(msg, limits);
    } catch (const InvalidArgument &e) {
      throw CodecError(e.what());
    }
    ByteWriter w;
    w.u8(kContentTopic);
    w.str(msg.content_topic);
    w.u8(kPayload);
    w.blob(msg.payload);
    w.u8(kVersion);
    w.u32(4);
    w.u32(msg.version);
    w.u8(kTimestamp);
    w.u32(8);
    w.i64(msg.timestamp);
    return std::move(w).take();
  }

  WakuMessage decode_message(BytesView bytes, const MessageLimits &limits) {
    if (bytes.empty()) {
      throw CodecError("empty message encoding", 0);
    }
    ByteReader r(bytes);
    WakuMessage msg;
    expect_tag(r, kContentTopic);
    auto topic_pos = r.position();
    msg.content_topic = r.str(limits.max_topic);
    if (msg.content_topic.empty()) {
      throw CodecError("content topic is empty", topic_pos);
    }
    expect_tag(r, kPayload);
    msg.payload = r.blob(limits.max_payload);
    expect_tag(r, kVersion);
    expect_len(r, 4);
    msg.version = r.u32();
    expect_tag(r, kTimestamp);
    expect_len(r, 8);
    msg.timestamp = r.i64();
    r.expect_done("message");
    return msg;
  }

  MessageDigest digest(const WakuMessage &msg) {
    crypto_hash_sha256_state st;
    crypto_hash_sha256_init(&st);
    ByteWriter prefix;
    prefix.u32(static_cast<std::uint32_t>(msg.content_topic.size()));
    crypto_hash_sha256_update(&st, prefix.bytes().data(), prefix.bytes().size());
    crypto_hash_sha256_update(
        &st, reinterpret_cast<const unsigned char *>(msg.content_topic.data()),
        msg.content_topic.size());
    crypto_hash_sha256_update(&st, msg.payload.data(), msg.payload.size());
    MessageDigest d;
    crypto_hash_sha256_final(&st, d.bytes.data());
    return d;
  }

  bool matches(const WakuMessage &msg, const ContentFilter &filter) {
    if (filter.content_topics.empty()) {
      return true;
    }
    return std::find(filter.content_topics.begin(), filter.content_topics.end(),
                     msg.content_topic)
        != filter.content_topics.end();
  }

}  // namespace waku
