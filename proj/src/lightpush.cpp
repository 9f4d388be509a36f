/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/lightpush.hpp>

#include <waku/error.hpp>

namespace waku {

  Bytes encode_push_request(const PushRequest &req) {
    ByteWriter w;
    w.str(req.pubsub_topic.str());
    w.blob(encode_message(req.msg));
    return std::move(w).take();
  }

  PushRequest decode_push_request(BytesView body) {
    ByteReader r(body);
    auto topic_pos = r.position();
    auto topic = r.str(MessageLimits{}.max_topic);
    std::optional<PubsubTopic> pt;
    try {
      pt.emplace(std::move(topic));
    } catch (const InvalidArgument &e) {
      throw CodecError(e.what(), topic_pos);
    }
    auto pos = r.position();
    // the size limit is enforced by the server so it can answer with a
    // failure response instead of dropping the request
    auto encoded = r.blob(kDefaultMaxFrame);
    WakuMessage msg;
    try {
      msg = decode_message(encoded, MessageLimits{kDefaultMaxFrame, 1024});
    } catch (const CodecError &e) {
      throw CodecError(std::string("embedded message: ") + e.what(), pos);
    }
    r.expect_done("push request");
    return PushRequest{std::move(*pt), std::move(msg)};
  }

  Bytes encode_push_response(const PushResponse &resp) {
    ByteWriter w;
    w.u8(resp.is_success ? 1 : 0);
    w.str(resp.info);
    return std::move(w).take();
  }

  PushResponse decode_push_response(BytesView body) {
    ByteReader r(body);
    auto flag_pos = r.position();
    auto flag = r.u8();
    if (flag > 1) {
      throw CodecError("invalid success flag", flag_pos);
    }
    PushResponse resp{flag == 1, r.str(4096)};
    r.expect_done("push response");
    if (!resp.is_success && resp.info.empty()) {
      throw CodecError("failed push response without a reason", flag_pos);
    }
    return resp;
  }

  PushResponse serve_lightpush(Relay *relay, const PushRequest &req,
                               std::int64_t now, RelayEffects &fx) {
    if (relay == nullptr) {
      return {false, "relay not mounted"};
    }
    try {
      auto [receipt, effects] = relay->publish(req.pubsub_topic, req.msg, now);
      fx.append(std::move(effects));
      return {true, "eager_sends=" + std::to_string(receipt.eager_sends)};
    } catch (const InvalidArgument &e) {
      return {false, e.what()};
    }
  }

}  // namespace waku
