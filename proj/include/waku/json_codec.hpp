/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <json.hpp>

#include <waku/error.hpp>
#include <waku/store.hpp>

namespace waku {

  using Json = nlohmann::json;

  /// `{payload: base64, contentTopic, version, timestamp}`. Decoding accepts
  /// missing version/timestamp (0) and throws InvalidArgument on bad shapes.
  Json message_to_json(const WakuMessage &msg);
  WakuMessage message_from_json(const Json &j);

  /// camelCase HistoryQuery: pubsubTopic, contentFilters (array of content
  /// topic strings), startTime, endTime, pageSize, cursor {receiverTime,
  /// digest}, direction ("forward" | "backward"). All fields optional.
  Json query_to_json(const HistoryQuery &q);
  HistoryQuery query_from_json(const Json &j);

  Json response_to_json(const HistoryResponse &r);

}  // namespace waku
