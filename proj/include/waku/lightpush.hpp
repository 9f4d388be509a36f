/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>

#include <waku/message.hpp>
#include <waku/relay.hpp>

namespace waku {

  struct PushRequest {
    PubsubTopic pubsub_topic;
    WakuMessage msg;

    bool operator==(const PushRequest &) const = default;
  };

  /// On success `info` is "eager_sends=<n>"; a failure always carries a
  /// reason.
  struct PushResponse {
    bool is_success = false;
    std::string info;

    bool operator==(const PushResponse &) const = default;
  };

  Bytes encode_push_request(const PushRequest &req);
  PushRequest decode_push_request(BytesView body);
  Bytes encode_push_response(const PushResponse &resp);
  /// Throws CodecError, including for a failure without a reason.
  PushResponse decode_push_response(BytesView body);

  /**
   * Server side of proxy publishing: hands the message to `relay` (null when
   * relay is not mounted). Success means accepted by relay, not delivered
   * network-wide. Relay effects are appended to `fx` for the caller to apply.
   */
  PushResponse serve_lightpush(Relay *relay, const PushRequest &req,
                               std::int64_t now, RelayEffects &fx);

}  // namespace waku
