/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/simnet.hpp>

#include <sodium.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <waku/random.hpp>

namespace waku {

  std::string_view event_kind_name(EventKind k) {
    switch (k) {
      case EventKind::frame_sent:
        return "frame_sent";
      case EventKind::frame_delivered:
        return "frame_delivered";
      case EventKind::frame_dropped:
        return "frame_dropped";
      case EventKind::app_delivery:
        return "app_delivery";
      case EventKind::timer:
        return "timer";
    }
    return "?";
  }

  void SimConfig::validate() const {
    if (default_latency < 0 || jitter < 0) {
      throw InvalidArgument("latency and jitter must be non-negative");
    }
    if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
      throw InvalidArgument("loss_rate must lie in [0, 1]");
    }
  }

  std::string SimEvent::line() const {
    std::string out = std::to_string(time);
    out += ' ';
    out += event_kind_name(kind);
    out += ' ';
    out += src.str();
    out += ' ';
    out += dst ? dst->str() : "-";
    out += ' ';
    out += protocol.empty() ? "-" : protocol;
    out += ' ';
    out += detail.empty() ? "-" : detail;
    out += ' ';
    out += digest ? digest->hex() : "-";
    return out;
  }

  std::string Transcript::text() const {
    std::string out;
    for (const auto &e : events) {
      out += e.line();
      out += '\n';
    }
    if (truncated) {
      out += "# truncated\n";
    }
    return out;
  }

  SimMetrics metrics(const Transcript &t) {
    SimMetrics m;
    m.partial = t.truncated;
    for (const auto &e : t.events) {
      if (e.kind == EventKind::frame_sent) {
        ++m.frames_sent;
      } else if (e.kind == EventKind::frame_dropped) {
        ++m.frames_dropped;
      }
      if (!e.digest) {
        continue;
      }
      if (e.kind == EventKind::timer && e.detail == "publish") {
        auto &d = m.per_digest[*e.digest];
        if (!d.origin) {
          d.origin = e.src;
          d.origin_time = e.time;
        }
      } else if (e.kind == EventKind::frame_sent && e.protocol == "relay"
                 && e.detail == "MESSAGE") {
        auto &d = m.per_digest[*e.digest];
        if (!d.origin) {
          d.origin = e.src;
          d.origin_time = e.time;
        }
        ++d.message_sends;
      } else if (e.kind == EventKind::app_delivery && e.protocol == "relay") {
        auto &d = m.per_digest[*e.digest];
        if (d.origin && *d.origin == e.src) {
          continue;
        }
        ++d.reach;
        if (d.origin) {
          d.max_latency = std::max(d.max_latency, e.time - d.origin_time);
        }
      }
    }
    for (auto &[digest, d] : m.per_digest) {
      d.redundancy = d.reach == 0 ? 0.0
                                  : static_cast<double>(d.message_sends)
                                        / static_cast<double>(d.reach);
      m.total_reach += d.reach;
      m.total_message_sends += d.message_sends;
      m.max_latency = std::max(m.max_latency, d.max_latency);
    }
    return m;
  }

  std::string SimMetrics::csv() const {
    auto ratio = [](std::size_t a, std::size_t b) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f",
                    b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b));
      return std::string(buf);
    };
    const std::string p = partial ? "true" : "false";
    std::string out =
        "digest,origin_time_ns,reach,message_sends,redundancy,max_latency_ns,partial\n";
    for (const auto &[digest, d] : per_digest) {
      out += digest.hex() + ',' + std::to_string(d.origin_time) + ','
             + std::to_string(d.reach) + ',' + std::to_string(d.message_sends) + ','
             + ratio(d.message_sends, d.reach) + ',' + std::to_string(d.max_latency)
             + ',' + p + '\n';
    }
    out += "total,-," + std::to_string(total_reach) + ','
           + std::to_string(total_message_sends) + ','
           + ratio(total_message_sends, total_reach) + ',' + std::to_string(max_latency)
           + ',' + p + '\n';
    return out;
  }

  // ---------------------------------------------------------------------------

  class Sim::NodeRuntime final : public Runtime {
   public:
    NodeRuntime(Sim &sim, std::size_t host) : sim_(sim), host_(host) {}

    std::int64_t now() const override {
      return sim_.now_;
    }
    TimerId schedule(std::int64_t delay_ns, std::string label, std::function<void()> fn,
                     bool background) override {
      return sim_.enqueue(sim_.now_ + std::max<std::int64_t>(delay_ns, 0),
                          Queued{host_, background, std::move(label), true, std::move(fn)});
    }
    void cancel(TimerId id) override {
      sim_.cancel(id);
    }
    std::mt19937_64 &rng() override {
      return sim_.rng_;
    }

   private:
    Sim &sim_;
    std::size_t host_;
  };

  class Sim::SimLink final : public Link {
   public:
    SimLink(Sim &sim, std::size_t from, std::size_t to, std::int64_t latency)
        : sim(sim), from(from), to(to), latency(latency) {}

    void send(Bytes bytes) override {
      if (!closed) {
        sim.transmit(*this, std::move(bytes));
      }
    }
    void close() override {
      sim.close_end(*this);
    }

    Sim &sim;
    std::size_t from;
    std::size_t to;
    std::int64_t latency;
    std::int64_t last_arrival = 0;
    /// Connection id of this link on the sending node.
    ConnectionId own_conn = 0;
    bool closed = false;
    std::weak_ptr<SimLink> reverse;
  };

  struct Sim::Host {
    std::string name;
    PeerId id;
    std::unique_ptr<NodeRuntime> runtime;
    std::unique_ptr<Node> node;
  };

  namespace {
    PeerId sim_identity(const std::string &name) {
      std::string material = "wakusim-node:" + name;
      std::array<std::uint8_t, crypto_hash_sha256_BYTES> seed{};
      crypto_hash_sha256(seed.data(),
                         reinterpret_cast<const unsigned char *>(material.data()),
                         material.size());
      return peer_id_from_key(SigningKey::from_seed(seed).public_key());
    }
  }  // namespace

  Sim::Sim(SimConfig config) : config_(config), rng_(config.seed) {
    config_.validate();
  }

  Sim::~Sim() {
    for (auto &h : hosts_) {
      h->node.reset();
    }
  }

  PeerId Sim::add_node(NodeConfig config, const std::string &name, NodeTimeouts timeouts) {
    if (name.empty() || by_name_.contains(name)) {
      throw InvalidArgument("duplicate or empty node name '" + name + "'");
    }
    config.data_dir.clear();
    auto idx = hosts_.size();
    auto host = std::make_unique<Host>(Host{name, sim_identity(name), nullptr, nullptr});
    host->runtime = std::make_unique<NodeRuntime>(*this, idx);
    host->node = std::make_unique<Node>(std::move(config), host->id, *host->runtime, timeouts);
    auto id = host->id;
    auto *node = host->node.get();
    hosts_.push_back(std::move(host));

    node->on_delivery([this, id](const PubsubTopic &topic, const WakuMessage &,
                                 const MessageDigest &d) {
      record(SimEvent{now_, EventKind::app_delivery, id, id, "relay", topic.str(), d});
    });
    node->on_filter_push([this, id](const std::string &sub, const PubsubTopic &,
                                    const WakuMessage &msg) {
      record(SimEvent{now_, EventKind::app_delivery, id, id, "filter", sub, digest(msg)});
    });
    try {
      node->start();
    } catch (...) {
      hosts_.pop_back();
      throw;
    }
    by_name_[name] = idx;
    by_peer_[id] = idx;
    return id;
  }

  Node &Sim::node(const PeerId &id) {
    auto it = by_peer_.find(id);
    if (it == by_peer_.end()) {
      throw InvalidArgument("unknown node " + id.str());
    }
    return *hosts_[it->second]->node;
  }

  Node &Sim::node(const std::string &name) {
    return node(peer(name));
  }

  const PeerId &Sim::peer(const std::string &name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) {
      throw InvalidArgument("unknown node '" + name + "'");
    }
    return hosts_[it->second]->id;
  }

  const std::string &Sim::name_of(const PeerId &id) const {
    auto it = by_peer_.find(id);
    if (it == by_peer_.end()) {
      throw InvalidArgument("unknown node " + id.str());
    }
    return hosts_[it->second]->name;
  }

  std::vector<PeerId> Sim::nodes() const {
    std::vector<PeerId> out;
    for (const auto &h : hosts_) {
      out.push_back(h->id);
    }
    return out;
  }

  std::pair<PeerId, PeerId> Sim::ordered(const PeerId &a, const PeerId &b) const {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  }

  bool Sim::connected(const PeerId &a, const PeerId &b) const {
    auto it = links_.find(ordered(a, b));
    return it != links_.end() && !it->second.ab->closed && !it->second.ba->closed;
  }

  void Sim::connect(const PeerId &a, const PeerId &b, std::optional<std::int64_t> latency) {
    if (a == b) {
      throw InvalidArgument("cannot connect a node to itself");
    }
    auto ia = by_peer_.at(node(a).id());
    auto ib = by_peer_.at(node(b).id());
    if (connected(a, b)) {
      throw InvalidArgument("duplicate link " + name_of(a) + "-" + name_of(b));
    }
    auto lat = latency.value_or(config_.default_latency);
    if (lat < 0) {
      throw InvalidArgument("negative link latency");
    }
    auto ab = std::make_shared<SimLink>(*this, ia, ib, lat);
    auto ba = std::make_shared<SimLink>(*this, ib, ia, lat);
    ab->reverse = ba;
    ba->reverse = ab;
    links_[ordered(a, b)] = LinkState{ab, ba};
    ab->own_conn = hosts_[ia]->node->attach(ab);
    ba->own_conn = hosts_[ib]->node->attach(ba);
  }

  void Sim::disconnect(const PeerId &a, const PeerId &b) {
    auto it = links_.find(ordered(a, b));
    if (it == links_.end()) {
      throw InvalidArgument("no link " + name_of(a) + "-" + name_of(b));
    }
    auto state = it->second;
    links_.erase(it);
    for (auto &end : {state.ab, state.ba}) {
      if (!end->closed) {
        end->closed = true;
        hosts_[end->from]->node->detach(end->own_conn);
      }
    }
  }

  void Sim::close_end(SimLink &end) {
    if (end.closed) {
      return;
    }
    end.closed = true;
    auto rev = end.reverse.lock();
    if (!rev || rev->closed) {
      return;
    }
    auto at = std::max(now_ + end.latency, end.last_arrival);
    enqueue(at, Queued{end.to, false, "link-close", false, [this, rev] {
                         if (!rev->closed) {
                           rev->closed = true;
                           hosts_[rev->from]->node->detach(rev->own_conn);
                         }
                       }});
  }

  PublishReceipt Sim::publish(const PeerId &id, const PubsubTopic &topic,
                              const WakuMessage &msg) {
    auto &n = node(id);
    validate(msg);
    record(SimEvent{now_, EventKind::timer, id, std::nullopt, "", "publish", digest(msg)});
    return n.publish(topic, msg);
  }

  void Sim::record(SimEvent e) {
    transcript_.events.push_back(std::move(e));
  }

  void Sim::annotate(SimEvent &e, BytesView bytes) {
    Frame f;
    try {
      f = decode_frame(bytes);
    } catch (const CodecError &) {
      e.protocol = "?";
      e.detail = "MALFORMED";
      return;
    }
    e.protocol = std::string(protocol_name(f.protocol));
    try {
      if (f.kind == FrameKind::response) {
        auto env = decode_response(f.body);
        e.detail = env.ok ? "RESPONSE" : "ERROR";
        return;
      }
      switch (f.protocol) {
        case Protocol::handshake:
          e.detail = "ADVERTISE";
          break;
        case Protocol::relay: {
          auto rf = decode_relay_frame(f.body);
          e.detail = std::string(relay_frame_name(rf));
          if (auto *m = std::get_if<relay::Message>(&rf)) {
            e.digest = digest(m->message);
          } else if (auto *ih = std::get_if<relay::IHave>(&rf)) {
            e.detail += ":" + std::to_string(ih->digests.size());
            if (ih->digests.size() == 1) {
              e.digest = ih->digests.front();
            }
          } else if (auto *iw = std::get_if<relay::IWant>(&rf)) {
            e.detail += ":" + std::to_string(iw->digests.size());
            if (iw->digests.size() == 1) {
              e.digest = iw->digests.front();
            }
          }
          break;
        }
        case Protocol::store:
          e.detail = "QUERY";
          break;
        case Protocol::filter: {
          auto ff = decode_filter_frame(f.body);
          e.detail = std::string(filter_frame_name(ff));
          if (auto *p = std::get_if<filter::MessagePush>(&ff)) {
            e.digest = digest(p->message);
          }
          break;
        }
        case Protocol::lightpush: {
          auto req = decode_push_request(f.body);
          e.detail = "PUSH";
          e.digest = digest(req.msg);
          break;
        }
      }
    } catch (const CodecError &) {
      e.detail = "MALFORMED";
    }
  }

  void Sim::transmit(SimLink &from, Bytes bytes) {
    auto &src = *hosts_[from.from];
    auto &dst = *hosts_[from.to];
    SimEvent e{now_, EventKind::frame_sent, src.id, dst.id, "", "", std::nullopt};
    annotate(e, bytes);
    record(e);

    try {
      auto f = decode_frame(bytes);
      if (f.kind == FrameKind::request && !dst.node->capabilities().serves(f.protocol)) {
        violations_.push_back(src.name + " sent a " + std::string(protocol_name(f.protocol))
                              + " request to " + dst.name);
      }
      if (f.protocol == Protocol::handshake) {
        auto caps = decode_capabilities(f.body);
        if (caps.peer != src.id
            || caps.protocols != mounted_protocols(src.node->config())) {
          violations_.push_back(src.name + " advertised a set other than its mounted one");
        }
      }
    } catch (const Error &ex) {
      violations_.push_back(src.name + " sent an undecodable frame: " + ex.what());
    }

    if (config_.loss_rate > 0.0 && uniform_unit(rng_) < config_.loss_rate) {
      e.kind = EventKind::frame_dropped;
      record(std::move(e));
      return;
    }
    std::int64_t lat = from.latency;
    if (config_.jitter > 0) {
      lat += static_cast<std::int64_t>(
          uniform_below(rng_, static_cast<std::uint64_t>(config_.jitter) + 1));
    }
    auto at = std::max(now_ + lat, from.last_arrival);
    from.last_arrival = at;

    auto link = from.reverse.lock();
    enqueue(at, Queued{from.to, false, "", false,
                       [this, link, e = std::move(e), bytes = std::move(bytes)]() mutable {
                         e.time = now_;
                         if (!link || link->closed) {
                           e.kind = EventKind::frame_dropped;
                           record(std::move(e));
                           return;
                         }
                         e.kind = EventKind::frame_delivered;
                         record(std::move(e));
                         hosts_[link->from]->node->receive(link->own_conn, bytes);
                       }});
  }

  TimerId Sim::enqueue(std::int64_t at, Queued q) {
    auto seq = next_seq_++;
    if (!q.background) {
      ++foreground_;
    }
    queue_.emplace(std::pair{at, seq}, std::move(q));
    timer_time_[seq] = at;
    return seq;
  }

  void Sim::cancel(TimerId id) {
    auto t = timer_time_.find(id);
    if (t == timer_time_.end()) {
      return;
    }
    auto it = queue_.find({t->second, id});
    timer_time_.erase(t);
    if (it != queue_.end()) {
      if (!it->second.background) {
        --foreground_;
      }
      queue_.erase(it);
    }
  }

  bool Sim::idle() const {
    if (foreground_ > 0) {
      return false;
    }
    return std::none_of(hosts_.begin(), hosts_.end(),
                        [](const auto &h) { return h->node->has_pending_gossip(); });
  }

  bool Sim::step(std::int64_t horizon) {
    if (queue_.empty()) {
      return false;
    }
    auto it = queue_.begin();
    if (it->first.first > horizon) {
      return false;
    }
    auto [key, q] = std::move(*it);
    queue_.erase(it);
    timer_time_.erase(key.second);
    if (!q.background) {
      --foreground_;
    }
    now_ = key.first;
    if (q.record) {
      record(SimEvent{now_, EventKind::timer, hosts_[q.host]->id, std::nullopt, "", q.label,
                      std::nullopt});
    }
    q.fn();
    return true;
  }

  const Transcript &Sim::run_until_idle(std::int64_t budget) {
    const auto horizon = now_ + budget;
    while (!queue_.empty() && !idle()) {
      if (!step(horizon)) {
        transcript_.truncated = true;
        now_ = horizon;
        break;
      }
    }
    return transcript_;
  }

  void Sim::run_for(std::int64_t duration) {
    const auto until = now_ + duration;
    while (step(until)) {
    }
    now_ = until;
  }

  std::vector<std::pair<std::string, std::string>> random_topology(
      Sim &sim, std::size_t count, const std::string &prefix, double extra_edge_p,
      const NodeConfig &config) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < count; ++i) {
      names.push_back(prefix + std::to_string(i));
      sim.add_node(config, names.back());
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 1; i < count; ++i) {
      edges.emplace(uniform_below(sim.rng(), i), i);
    }
    if (extra_edge_p > 0.0) {
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = i + 1; j < count; ++j) {
          if (!edges.contains({i, j}) && uniform_unit(sim.rng()) < extra_edge_p) {
            edges.emplace(i, j);
          }
        }
      }
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (auto [i, j] : edges) {
      sim.connect(sim.peer(names[i]), sim.peer(names[j]));
      out.emplace_back(names[i], names[j]);
    }
    return out;
  }

  // ---------------------------------------------------------------------------
  // scenarios

  namespace {
    struct StepFailure : std::runtime_error {
      using std::runtime_error::runtime_error;
    };

    const Json &need(const Json &step, const char *key) {
      if (!step.contains(key)) {
        throw InvalidArgument(std::string("missing field '") + key + "'");
      }
      return step.at(key);
    }

    std::string need_str(const Json &step, const char *key) {
      const auto &v = need(step, key);
      if (!v.is_string()) {
        throw InvalidArgument(std::string("field '") + key + "' must be a string");
      }
      return v.get<std::string>();
    }

    std::vector<std::string> str_list(const Json &step, const char *key) {
      std::vector<std::string> out;
      if (!step.contains(key)) {
        return out;
      }
      const auto &v = step.at(key);
      if (!v.is_array()) {
        throw InvalidArgument(std::string("field '") + key + "' must be an array");
      }
      for (const auto &s : v) {
        if (!s.is_string()) {
          throw InvalidArgument(std::string("field '") + key + "' must hold strings");
        }
        out.push_back(s.get<std::string>());
      }
      return out;
    }

    std::int64_t ms_field(const Json &step, const char *key, std::int64_t fallback) {
      if (!step.contains(key)) {
        return fallback * kMillisecond;
      }
      const auto &v = step.at(key);
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw InvalidArgument(std::string("field '") + key
                              + "' must be a non-negative integer");
      }
      return v.get<std::int64_t>() * kMillisecond;
    }

    WakuMessage scenario_message(const Json &step) {
      Json m = need(step, "message");
      if (m.is_object() && m.contains("text")) {
        if (!m.at("text").is_string()) {
          throw InvalidArgument("message text must be a string");
        }
        m["payload"] = to_base64(to_bytes(m.at("text").get<std::string>()));
        m.erase("text");
      }
      return message_from_json(m);
    }

    NodeConfig scenario_node_config(const Json &step) {
      auto args = str_list(step, "args");
      try {
        return parse_config(args);
      } catch (const ConfigError &e) {
        throw InvalidArgument(e.what());
      }
    }

    class ScenarioRunner {
     public:
      ScenarioRunner(Sim &sim, ScenarioReport &report) : sim_(sim), report_(report) {}

      void run(const Json &scenario) {
        if (!scenario.is_object() || !scenario.contains("steps")
            || !scenario.at("steps").is_array()) {
          throw InvalidArgument("scenario must be an object with a 'steps' array");
        }
        const auto &steps = scenario.at("steps");
        for (std::size_t i = 0; i < steps.size(); ++i) {
          const auto &step = steps[i];
          StepOutcome out{i, "", true, ""};
          try {
            if (!step.is_object()) {
              throw InvalidArgument("step must be an object");
            }
            out.op = need_str(step, "op");
            out.detail = execute(out.op, step, i);
          } catch (const InvalidArgument &e) {
            throw InvalidArgument("step " + std::to_string(i) + " (" + out.op
                                  + "): " + e.what());
          } catch (const StepFailure &e) {
            out.ok = false;
            out.detail = e.what();
          } catch (const Error &e) {
            out.ok = false;
            out.detail = e.what();
          }
          report_.steps.push_back(out);
          if (!out.ok) {
            report_.success = false;
            report_.failure =
                "step " + std::to_string(i) + " (" + out.op + "): " + out.detail;
            break;
          }
        }
      }

     private:
      const PeerId &peer(const Json &step, const char *key) {
        return sim_.peer(need_str(step, key));
      }

      const WakuMessage &labelled(const std::string &label) {
        auto it = labels_.find(label);
        if (it == labels_.end()) {
          throw InvalidArgument("unknown message label '" + label + "'");
        }
        return it->second;
      }

      void settle() {
        sim_.run_until_idle();
        if (sim_.transcript().truncated) {
          throw StepFailure("network did not go idle");
        }
      }

      std::string execute(const std::string &op, const Json &step, std::size_t index) {
        if (op == "add_node") {
          auto id = sim_.add_node(scenario_node_config(step), need_str(step, "name"));
          return id.str();
        }
        if (op == "connect") {
          std::optional<std::int64_t> lat;
          if (step.contains("latency_ms")) {
            lat = ms_field(step, "latency_ms", 0);
          }
          sim_.connect(peer(step, "a"), peer(step, "b"), lat);
          return {};
        }
        if (op == "disconnect") {
          sim_.disconnect(peer(step, "a"), peer(step, "b"));
          return {};
        }
        if (op == "random_topology") {
          const auto &count = need(step, "count");
          if (!count.is_number_unsigned() || count.get<std::size_t>() == 0) {
            throw InvalidArgument("count must be a positive integer");
          }
          double p = step.value("extra_edge_p", 0.15);
          auto edges = random_topology(sim_, count.get<std::size_t>(),
                                       step.value("prefix", std::string("n")), p,
                                       scenario_node_config(step));
          return std::to_string(edges.size()) + " edges";
        }
        if (op == "subscribe" || op == "unsubscribe") {
          auto &n = sim_.node(peer(step, "node"));
          PubsubTopic topic(need_str(step, "topic"));
          op == "subscribe" ? n.subscribe(topic) : n.unsubscribe(topic);
          return {};
        }
        if (op == "publish") {
          auto msg = scenario_message(step);
          if (step.contains("as")) {
            labels_.insert_or_assign(need_str(step, "as"), msg);
          }
          auto r = sim_.publish(peer(step, "node"), PubsubTopic(need_str(step, "topic")), msg);
          return r.digest.hex();
        }
        if (op == "lightpush") {
          auto msg = scenario_message(step);
          if (step.contains("as")) {
            labels_.insert_or_assign(need_str(step, "as"), msg);
          }
          std::optional<Result<PushResponse>> result;
          sim_.node(peer(step, "node"))
              .lightpush(peer(step, "server"),
                         PushRequest{PubsubTopic(need_str(step, "topic")), msg},
                         [&](Result<PushResponse> r) { result = std::move(r); });
          settle();
          if (!result) {
            throw StepFailure("no lightpush response");
          }
          if (!result->ok()) {
            throw StepFailure(result->error());
          }
          if (!result->value().is_success) {
            throw StepFailure("lightpush refused: " + result->value().info);
          }
          return result->value().info;
        }
        if (op == "store_query") {
          auto q = query_from_json(need(step, "query"));
          std::optional<Result<HistoryResponse>> result;
          sim_.node(peer(step, "node"))
              .store_query(peer(step, "server"), q,
                           [&](Result<HistoryResponse> r) { result = std::move(r); });
          settle();
          if (!result) {
            throw StepFailure("no store response");
          }
          if (!result->ok()) {
            throw StepFailure(result->error());
          }
          std::vector<WakuMessage> got;
          for (const auto &m : result->value().messages) {
            got.push_back(m.msg);
          }
          auto name = step.value("as", "q" + std::to_string(index));
          report_.queries[name] = got;
          if (step.contains("expect")) {
            std::vector<WakuMessage> want;
            for (const auto &l : str_list(step, "expect")) {
              want.push_back(labelled(l));
            }
            if (got != want) {
              throw StepFailure("expected " + std::to_string(want.size())
                                + " message(s), got " + std::to_string(got.size())
                                + " or different content");
            }
          }
          return std::to_string(got.size()) + " message(s)";
        }
        if (op == "filter_subscribe") {
          ContentFilter f{str_list(step, "contentTopics")};
          std::optional<Result<std::string>> result;
          sim_.node(peer(step, "node"))
              .filter_subscribe(peer(step, "server"), PubsubTopic(need_str(step, "topic")), f,
                                [&](Result<std::string> r) { result = std::move(r); });
          settle();
          if (!result || !result->ok()) {
            throw StepFailure(result ? result->error() : "no filter response");
          }
          subscriptions_[step.value("as", "sub" + std::to_string(index))] = result->value();
          return result->value();
        }
        if (op == "filter_unsubscribe") {
          auto alias = need_str(step, "subscription");
          auto it = subscriptions_.find(alias);
          if (it == subscriptions_.end()) {
            throw InvalidArgument("unknown subscription '" + alias + "'");
          }
          std::optional<Result<Ack>> result;
          sim_.node(peer(step, "node"))
              .filter_unsubscribe(peer(step, "server"), it->second,
                                  [&](Result<Ack> r) { result = std::move(r); });
          settle();
          if (!result || !result->ok()) {
            throw StepFailure(result ? result->error() : "no filter response");
          }
          return {};
        }
        if (op == "run") {
          sim_.run_until_idle(ms_field(step, "max_ms", 600'000));
          return sim_.transcript().truncated ? "truncated" : "idle";
        }
        if (op == "advance") {
          sim_.run_for(ms_field(step, "ms", 0));
          return {};
        }
        if (op == "expect_delivered" || op == "expect_not_delivered") {
          const auto &id = peer(step, "node");
          auto d = digest(labelled(need_str(step, "message")));
          const auto &ev = sim_.transcript().events;
          bool seen = std::any_of(ev.begin(), ev.end(), [&](const SimEvent &e) {
            return e.kind == EventKind::app_delivery && e.src == id && e.digest == d;
          });
          if (seen != (op == "expect_delivered")) {
            throw StepFailure(need_str(step, "node")
                              + (seen ? " delivered " : " did not deliver ")
                              + need_str(step, "message"));
          }
          return {};
        }
        if (op == "expect_archived" || op == "expect_not_archived") {
          const auto *archive = sim_.node(peer(step, "node")).archive();
          if (!archive) {
            throw StepFailure(need_str(step, "node") + " has no full-mode store");
          }
          auto d = digest(labelled(need_str(step, "message")));
          auto contents = archive->contents();
          bool found = std::any_of(contents.begin(), contents.end(),
                                   [&](const StoredMessage &m) { return m.digest == d; });
          if (found != (op == "expect_archived")) {
            throw StepFailure(need_str(step, "node")
                              + (found ? " archived " : " did not archive ")
                              + need_str(step, "message"));
          }
          return {};
        }
        throw InvalidArgument("unknown op");
      }

      Sim &sim_;
      ScenarioReport &report_;
      std::map<std::string, WakuMessage> labels_;
      std::map<std::string, std::string> subscriptions_;
    };
  }  // namespace

  SimConfig scenario_config(const Json &scenario, std::optional<std::uint64_t> seed) {
    SimConfig c;
    if (scenario.is_object() && scenario.contains("sim")) {
      const auto &s = scenario.at("sim");
      if (!s.is_object()) {
        throw InvalidArgument("'sim' must be an object");
      }
      try {
        c.seed = s.value("seed", c.seed);
        c.default_latency = ms_field(s, "latency_ms", c.default_latency / kMillisecond);
        c.jitter = ms_field(s, "jitter_ms", 0);
        c.loss_rate = s.value("loss_rate", 0.0);
      } catch (const Json::exception &e) {
        throw InvalidArgument(std::string("bad sim block: ") + e.what());
      }
    }
    if (seed) {
      c.seed = *seed;
    }
    c.validate();
    return c;
  }

  ScenarioReport run_scenario(Sim &sim, const Json &scenario) {
    ScenarioReport report;
    try {
      ScenarioRunner(sim, report).run(scenario);
    } catch (const Json::exception &e) {
      throw InvalidArgument(std::string("malformed scenario: ") + e.what());
    }
    report.transcript = sim.transcript();
    return report;
  }

  Json figure2_scenario(const Figure2Options &o) {
    Json a_args = {"--relay:true"};
    if (o.a_subscribed) {
      a_args.push_back("--topics:pub1");
    }
    Json steps = Json::array();
    steps.push_back({{"op", "add_node"}, {"name", "A"}, {"args", a_args}});
    steps.push_back({{"op", "add_node"},
                     {"name", "B"},
                     {"args",
                      {"--relay:true", "--topics:pub1", "--store:true",
                       "--persist-messages:true",
                       "--store-capacity:" + std::to_string(o.b_capacity)}}});
    steps.push_back({{"op", "connect"}, {"a", "A"}, {"b", "B"}});
    steps.push_back({{"op", "run"}});

    std::vector<std::string> published = {"msg1"};
    if (o.second_message) {
      published.push_back("msg2");
    }
    std::int64_t ts = 1;
    for (const auto &label : published) {
      steps.push_back({{"op", "publish"},
                       {"node", "A"},
                       {"topic", "pub1"},
                       {"message",
                        {{"text", label}, {"contentTopic", "content1"}, {"timestamp", ts++}}},
                       {"as", label}});
      steps.push_back({{"op", "run"}});
    }
    steps.push_back({{"op", "expect_delivered"}, {"node", "B"}, {"message", "msg1"}});

    // B keeps the newest b_capacity messages; all of them carry content1.
    auto kept_from = published.size() > o.b_capacity ? published.size() - o.b_capacity : 0;
    Json expect = Json::array();
    for (std::size_t i = 0; i < published.size(); ++i) {
      bool kept = i >= kept_from;
      steps.push_back({{"op", kept ? "expect_archived" : "expect_not_archived"},
                       {"node", "B"},
                       {"message", published[i]}});
      bool wanted = std::find(o.query_content.begin(), o.query_content.end(), "content1")
                    != o.query_content.end();
      if (kept && wanted) {
        expect.push_back(published[i]);
      }
    }

    steps.push_back({{"op", "add_node"}, {"name", "C"}, {"args", {"--store:true"}}});
    steps.push_back({{"op", "connect"}, {"a", "C"}, {"b", "B"}});
    steps.push_back({{"op", "run"}});
    steps.push_back({{"op", "store_query"},
                     {"node", "C"},
                     {"server", "B"},
                     {"query", {{"pubsubTopic", "pub1"}, {"contentFilters", o.query_content}}},
                     {"expect", expect},
                     {"as", "C"}});

    return {{"name", "figure2"},
            {"sim", {{"seed", 1}, {"latency_ms", 10}, {"jitter_ms", 0}, {"loss_rate", 0.0}}},
            {"steps", steps}};
  }

  ScenarioReport run_figure2_scenario(Sim &sim, const Figure2Options &options) {
    return run_scenario(sim, figure2_scenario(options));
  }

}  // namespace waku
