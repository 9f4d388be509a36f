/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <waku/json_codec.hpp>
#include <waku/node.hpp>

namespace waku {

  struct SimConfig {
    std::uint64_t seed = 1;
    std::int64_t default_latency = 10 * kMillisecond;
    /// Extra latency drawn uniformly from [0, jitter].
    std::int64_t jitter = 0;
    double loss_rate = 0.0;

    /// Throws InvalidArgument.
    void validate() const;
  };

  enum class EventKind : std::uint8_t {
    frame_sent,
    frame_delivered,
    frame_dropped,
    app_delivery,
    timer,
  };

  std::string_view event_kind_name(EventKind k);

  /**
   * One transcript record. Frame events carry the decoded protocol and a
   * short detail (relay frame type, REQUEST/RESPONSE, ...). Timers carry
   * their label in `detail` and have no dst. App deliveries are recorded with
   * src == dst == the delivering node; `protocol` is relay or filter.
   */
  struct SimEvent {
    std::int64_t time = 0;
    EventKind kind = EventKind::timer;
    PeerId src;
    std::optional<PeerId> dst;
    std::string protocol;
    std::string detail;
    std::optional<MessageDigest> digest;

    /// `time kind src dst protocol detail digest`, `-` for absent fields.
    std::string line() const;
  };

  struct Transcript {
    std::vector<SimEvent> events;
    /// The horizon was reached before the network went idle.
    bool truncated = false;

    std::string text() const;
  };

  struct DigestMetrics {
    std::int64_t origin_time = 0;
    std::optional<PeerId> origin;
    /// App deliveries at nodes other than the origin.
    std::size_t reach = 0;
    std::size_t message_sends = 0;
    /// message_sends / reach; 0 when reach is 0.
    double redundancy = 0.0;
    std::int64_t max_latency = 0;
  };

  struct SimMetrics {
    std::map<MessageDigest, DigestMetrics> per_digest;
    std::size_t total_reach = 0;
    std::size_t total_message_sends = 0;
    std::size_t frames_sent = 0;
    std::size_t frames_dropped = 0;
    std::int64_t max_latency = 0;
    bool partial = false;

    std::string csv() const;
  };

  /// A digest's origin is the node of its scripted publish, or else the
  /// sender of its first relay MESSAGE (a lightpush server).
  SimMetrics metrics(const Transcript &t);

  /**
   * Deterministic discrete-event network. Events run in (time, insertion
   * sequence) order on the calling thread; all randomness comes from one
   * generator seeded by SimConfig::seed. Links are FIFO: a frame never
   * overtakes an earlier one on the same directed link, even with jitter.
   */
  class Sim {
   public:
    explicit Sim(SimConfig config);
    ~Sim();
    Sim(const Sim &) = delete;
    Sim &operator=(const Sim &) = delete;

    /// Starts a node whose identity is derived from `name` alone. Store
    /// persistence is disabled (`data_dir` is cleared). Throws
    /// InvalidArgument for a duplicate name, StartupError from Node::start.
    PeerId add_node(NodeConfig config, const std::string &name,
                    NodeTimeouts timeouts = {});

    Node &node(const PeerId &id);
    Node &node(const std::string &name);
    const PeerId &peer(const std::string &name) const;
    const std::string &name_of(const PeerId &id) const;
    std::vector<PeerId> nodes() const;

    /// Opens a link and starts the handshake on both ends. Throws
    /// InvalidArgument for self-links and duplicate links.
    void connect(const PeerId &a, const PeerId &b,
                 std::optional<std::int64_t> latency = std::nullopt);
    /// Tears the link down on both ends immediately.
    void disconnect(const PeerId &a, const PeerId &b);
    bool connected(const PeerId &a, const PeerId &b) const;

    /// Publishes through `node`, recording a `publish` timer event that
    /// carries the digest.
    PublishReceipt publish(const PeerId &node, const PubsubTopic &topic,
                           const WakuMessage &msg);

    /// Runs until no foreground event is queued and no node holds gossip
    /// still to advertise, or until `budget` of virtual time has passed
    /// (then the transcript is flagged truncated). Background timers such as
    /// heartbeats keep firing while work remains.
    const Transcript &run_until_idle(std::int64_t budget = 600 * kSecond);
    /// Processes every event up to now + duration, then sets the clock there.
    void run_for(std::int64_t duration);

    std::int64_t now() const {
      return now_;
    }
    std::mt19937_64 &rng() {
      return rng_;
    }
    const SimConfig &config() const {
      return config_;
    }
    const Transcript &transcript() const {
      return transcript_;
    }
    /// Requests sent for protocols the receiver did not advertise in full
    /// mode, and advertisements that differ from the sender's mounted set.
    const std::vector<std::string> &violations() const {
      return violations_;
    }

   private:
    class NodeRuntime;
    class SimLink;
    struct Host;
    struct Queued {
      std::size_t host = 0;
      bool background = false;
      std::string label;
      bool record = false;
      std::function<void()> fn;
    };
    struct LinkState {
      std::shared_ptr<SimLink> ab;
      std::shared_ptr<SimLink> ba;
    };

    TimerId enqueue(std::int64_t at, Queued q);
    void cancel(TimerId id);
    void transmit(SimLink &from, Bytes bytes);
    void close_end(SimLink &end);
    void record(SimEvent e);
    void annotate(SimEvent &e, BytesView frame_bytes);
    bool step(std::int64_t horizon);
    bool idle() const;
    std::pair<PeerId, PeerId> ordered(const PeerId &a, const PeerId &b) const;

    SimConfig config_;
    std::mt19937_64 rng_;
    std::int64_t now_ = 0;
    std::uint64_t next_seq_ = 1;
    std::map<std::pair<std::int64_t, std::uint64_t>, Queued> queue_;
    std::map<TimerId, std::int64_t> timer_time_;
    std::size_t foreground_ = 0;
    Transcript transcript_;
    std::vector<std::string> violations_;
    std::map<std::pair<PeerId, PeerId>, LinkState> links_;
    std::map<std::string, std::size_t> by_name_;
    std::map<PeerId, std::size_t> by_peer_;
    std::vector<std::unique_ptr<Host>> hosts_;
  };

  /// Connected random graph over `count` fresh nodes named prefix0..: a
  /// random spanning tree plus each remaining pair with `extra_edge_p`.
  /// Returns the undirected edges as name pairs.
  std::vector<std::pair<std::string, std::string>> random_topology(
      Sim &sim, std::size_t count, const std::string &prefix, double extra_edge_p,
      const NodeConfig &config);

  struct StepOutcome {
    std::size_t index = 0;
    std::string op;
    bool ok = true;
    std::string detail;
  };

  struct ScenarioReport {
    bool success = true;
    /// "step N (op): reason" for the first failure.
    std::string failure;
    std::vector<StepOutcome> steps;
    /// store_query results keyed by the step's `as` name (default "q<index>").
    std::map<std::string, std::vector<WakuMessage>> queries;
    Transcript transcript;
  };

  /**
   * Runs a declarative scenario: `{"sim": {...}, "steps": [...]}`. The step
   * language is documented in docs/simnet.md. Malformed scripts throw
   * InvalidArgument; failed expectations stop the run and are reported.
   */
  ScenarioReport run_scenario(Sim &sim, const Json &scenario);
  /// Reads the `sim` block of a scenario; `seed` overrides its seed.
  SimConfig scenario_config(const Json &scenario, std::optional<std::uint64_t> seed);

  struct Figure2Options {
    bool a_subscribed = false;
    std::vector<std::string> query_content = {"content1"};
    std::size_t b_capacity = 1000;
    /// Publish msg2 ("content1") after msg1.
    bool second_message = false;
  };

  /// Publisher A, store node B, querying light client C.
  Json figure2_scenario(const Figure2Options &options = {});
  ScenarioReport run_figure2_scenario(Sim &sim, const Figure2Options &options = {});

}  // namespace waku
