/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/json_codec.hpp>

#include <limits>

namespace waku {

  namespace {
    const Json &field(const Json &j, const char *name, Json::value_t type,
                      const char *type_name) {
      const auto &v = j.at(name);
      bool ok = v.type() == type
                || (type == Json::value_t::number_integer
                    && v.type() == Json::value_t::number_unsigned);
      if (!ok) {
        throw InvalidArgument(std::string(name) + " must be " + type_name);
      }
      return v;
    }

    template <class T>
    T integer(const Json &j, const char *name) {
      const auto &v = field(j, name, Json::value_t::number_integer, "an integer");
      if (v.is_number_unsigned()) {
        auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
          throw InvalidArgument(std::string(name) + " out of range");
        }
        return static_cast<T>(u);
      }
      auto s = v.get<std::int64_t>();
      if (s < static_cast<std::int64_t>(std::numeric_limits<T>::min())) {
        throw InvalidArgument(std::string(name) + " out of range");
      }
      return static_cast<T>(s);
    }

    Json key_to_json(const IndexKey &k) {
      return {{"receiverTime", k.receiver_time}, {"digest", k.digest.hex()}};
    }
  }  // namespace

  Json message_to_json(const WakuMessage &msg) {
    return {{"payload", to_base64(msg.payload)},
            {"contentTopic", msg.content_topic},
            {"version", msg.version},
            {"timestamp", msg.timestamp}};
  }

  WakuMessage message_from_json(const Json &j) {
    if (!j.is_object()) {
      throw InvalidArgument("message must be an object");
    }
    WakuMessage m;
    try {
      m.content_topic =
          field(j, "contentTopic", Json::value_t::string, "a string").get<std::string>();
      if (j.contains("payload")) {
        m.payload = from_base64(
            field(j, "payload", Json::value_t::string, "a base64 string").get<std::string>());
      }
      if (j.contains("version")) {
        m.version = integer<std::uint32_t>(j, "version");
      }
      if (j.contains("timestamp")) {
        m.timestamp = integer<std::int64_t>(j, "timestamp");
      }
    } catch (const Json::exception &e) {
      throw InvalidArgument(std::string("bad message: ") + e.what());
    } catch (const CodecError &e) {
      throw InvalidArgument(std::string("bad message payload: ") + e.what());
    }
    validate(m);
    return m;
  }

  Json query_to_json(const HistoryQuery &q) {
    Json j = Json::object();
    if (q.pubsub_topic) {
      j["pubsubTopic"] = q.pubsub_topic->str();
    }
    j["contentFilters"] = q.filter.content_topics;
    if (q.time_start) {
      j["startTime"] = *q.time_start;
    }
    if (q.time_end) {
      j["endTime"] = *q.time_end;
    }
    j["pageSize"] = q.page_size;
    if (q.cursor) {
      j["cursor"] = key_to_json(*q.cursor);
    }
    j["direction"] = q.direction == Direction::forward ? "forward" : "backward";
    return j;
  }

  HistoryQuery query_from_json(const Json &j) {
    if (!j.is_object()) {
      throw InvalidArgument("query must be an object");
    }
    HistoryQuery q;
    try {
      if (j.contains("pubsubTopic")) {
        q.pubsub_topic = PubsubTopic(
            field(j, "pubsubTopic", Json::value_t::string, "a string").get<std::string>());
      }
      if (j.contains("contentFilters")) {
        const auto &cf = field(j, "contentFilters", Json::value_t::array, "an array");
        for (const auto &t : cf) {
          if (!t.is_string()) {
            throw InvalidArgument("contentFilters entries must be strings");
          }
          q.filter.content_topics.push_back(t.get<std::string>());
        }
      }
      if (j.contains("startTime")) {
        q.time_start = integer<std::int64_t>(j, "startTime");
      }
      if (j.contains("endTime")) {
        q.time_end = integer<std::int64_t>(j, "endTime");
      }
      if (j.contains("pageSize")) {
        q.page_size = integer<std::uint32_t>(j, "pageSize");
      }
      if (j.contains("cursor")) {
        const auto &c = field(j, "cursor", Json::value_t::object, "an object");
        IndexKey k;
        k.receiver_time = integer<std::int64_t>(c, "receiverTime");
        k.digest = MessageDigest::from_hex(
            field(c, "digest", Json::value_t::string, "a hex string").get<std::string>());
        q.cursor = k;
      }
      if (j.contains("direction")) {
        auto d = field(j, "direction", Json::value_t::string, "a string").get<std::string>();
        if (d == "forward") {
          q.direction = Direction::forward;
        } else if (d == "backward") {
          q.direction = Direction::backward;
        } else {
          throw InvalidArgument("direction must be forward or backward");
        }
      }
    } catch (const Json::exception &e) {
      throw InvalidArgument(std::string("bad query: ") + e.what());
    } catch (const CodecError &e) {
      throw InvalidArgument(std::string("bad query: ") + e.what());
    }
    return q;
  }

  Json response_to_json(const HistoryResponse &r) {
    Json msgs = Json::array();
    for (const auto &m : r.messages) {
      auto jm = message_to_json(m.msg);
      jm["pubsubTopic"] = m.pubsub_topic.str();
      jm["receiverTime"] = m.receiver_time;
      jm["digest"] = m.digest.hex();
      msgs.push_back(std::move(jm));
    }
    Json j = {{"messages", std::move(msgs)}};
    j["cursor"] = r.next_cursor ? key_to_json(*r.next_cursor) : Json(nullptr);
    return j;
  }

}  // namespace waku
