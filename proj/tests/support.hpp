/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <waku/log.hpp>
#include <waku/simnet.hpp>

namespace waku::test {

  inline const bool kQuietLogs = [] {
    log().set_level(spdlog::level::warn);
    return true;
  }();

  inline std::string read_fixture(const std::string &name) {
    std::ifstream in(std::filesystem::path(WAKU_FIXTURE_DIR) / name);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) {
      s.pop_back();
    }
    return s;
  }

  inline WakuMessage make_message(std::string content_topic, std::string payload,
                                  std::int64_t timestamp = 0) {
    WakuMessage m;
    m.content_topic = std::move(content_topic);
    m.payload = to_bytes(payload);
    m.timestamp = timestamp;
    return m;
  }

  inline NodeConfig relay_config(std::vector<std::string> topics = {}) {
    NodeConfig c;
    c.relay = true;
    for (auto &t : topics) {
      c.topics.emplace_back(t);
    }
    return c;
  }

  /// Scratch directory removed on destruction.
  struct TempDir {
    std::filesystem::path path;
    TempDir() {
      static std::uint64_t counter = 0;
      path = std::filesystem::temp_directory_path()
             / ("wakutest-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
      std::filesystem::create_directories(path);
    }
    ~TempDir() {
      std::error_code ec;
      std::filesystem::remove_all(path, ec);
    }
  };

  // ---------------------------------------------------------------------------
  // Oracles. Deliberately naive and independent of the code under test.

  /// Flood-with-dedup over an undirected graph: a node receives iff it is
  /// reachable from `origin` through subscribed nodes (only subscribers
  /// forward). Returns every subscribed node that receives, the origin
  /// included when subscribed.
  inline std::set<std::string> flood_oracle(
      const std::vector<std::pair<std::string, std::string>> &edges,
      const std::set<std::string> &subscribed, const std::string &origin) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto &[a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::set<std::string> visited = {origin};
    std::deque<std::string> frontier = {origin};
    while (!frontier.empty()) {
      auto u = frontier.front();
      frontier.pop_front();
      for (const auto &v : adj[u]) {
        if (subscribed.contains(v) && visited.insert(v).second) {
          frontier.push_back(v);
        }
      }
    }
    std::set<std::string> out;
    for (const auto &n : visited) {
      if (subscribed.contains(n)) {
        out.insert(n);
      }
    }
    return out;
  }

  /// Hop distances by BFS.
  inline std::map<std::string, std::size_t> hop_distances(
      const std::vector<std::pair<std::string, std::string>> &edges, const std::string &origin) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto &[a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::map<std::string, std::size_t> dist = {{origin, 0}};
    std::deque<std::string> frontier = {origin};
    while (!frontier.empty()) {
      auto u = frontier.front();
      frontier.pop_front();
      for (const auto &v : adj[u]) {
        if (!dist.contains(v)) {
          dist[v] = dist[u] + 1;
          frontier.push_back(v);
        }
      }
    }
    return dist;
  }

  /// Store oracle record: what was inserted, with no indexing structure.
  struct OracleEntry {
    WakuMessage msg;
    std::string pubsub_topic;
    std::int64_t receiver_time = 0;
    MessageDigest digest;
  };

  /// Capacity eviction by full sort: keeps the `capacity` largest
  /// (receiver_time, digest) pairs among distinct inserted ones.
  inline std::vector<OracleEntry> oracle_retain(std::vector<OracleEntry> inserted,
                                                std::size_t capacity) {
    auto less = [](const OracleEntry &a, const OracleEntry &b) {
      return std::tie(a.receiver_time, a.digest) < std::tie(b.receiver_time, b.digest);
    };
    std::stable_sort(inserted.begin(), inserted.end(), less);
    inserted.erase(std::unique(inserted.begin(), inserted.end(),
                               [](const OracleEntry &a, const OracleEntry &b) {
                                 return a.receiver_time == b.receiver_time
                                        && a.digest == b.digest;
                               }),
                   inserted.end());
    if (inserted.size() > capacity) {
      inserted.erase(inserted.begin(),
                     inserted.begin() + static_cast<std::ptrdiff_t>(inserted.size() - capacity));
    }
    return inserted;
  }

  /// Brute-force filter-and-sort answer to a query, ignoring paging.
  inline std::vector<OracleEntry> oracle_query(const std::vector<OracleEntry> &retained,
                                               const std::optional<std::string> &topic,
                                               const std::vector<std::string> &content,
                                               std::optional<std::int64_t> start,
                                               std::optional<std::int64_t> end,
                                               bool forward) {
    std::vector<OracleEntry> out;
    for (const auto &e : retained) {
      if (topic && e.pubsub_topic != *topic) {
        continue;
      }
      if (!content.empty()
          && std::find(content.begin(), content.end(), e.msg.content_topic) == content.end()) {
        continue;
      }
      if (start && e.receiver_time < *start) {
        continue;
      }
      if (end && e.receiver_time >= *end) {
        continue;
      }
      out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const OracleEntry &a, const OracleEntry &b) {
      return std::tie(a.receiver_time, a.digest) < std::tie(b.receiver_time, b.digest);
    });
    if (!forward) {
      std::reverse(out.begin(), out.end());
    }
    return out;
  }

  /// Relay app deliveries per node name for one digest.
  inline std::map<std::string, std::size_t> deliveries(const Sim &sim, const Transcript &t,
                                                       const MessageDigest &d) {
    std::map<std::string, std::size_t> out;
    for (const auto &e : t.events) {
      if (e.kind == EventKind::app_delivery && e.protocol == "relay" && e.digest == d) {
        ++out[sim.name_of(e.src)];
      }
    }
    return out;
  }

  inline std::size_t count_events(const Transcript &t, EventKind kind, std::string_view protocol,
                                  std::string_view detail) {
    return static_cast<std::size_t>(std::count_if(
        t.events.begin(), t.events.end(), [&](const SimEvent &e) {
          return e.kind == kind && (protocol.empty() || e.protocol == protocol)
                 && (detail.empty() || e.detail == detail);
        }));
  }

}  // namespace waku::test
