/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <charconv>

#include <waku/node.hpp>

namespace waku {

  namespace {
    bool parse_bool(const std::string &flag, std::string_view v) {
      if (v == "true") {
        return true;
      }
      if (v == "false") {
        return false;
      }
      throw ConfigError(flag, "expected true or false, got '" + std::string(v) + "'");
    }

    template <class T>
    T parse_uint(const std::string &flag, std::string_view v, T min, T max) {
      std::uint64_t out = 0;
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError(flag, "expected an unsigned integer, got '"
                                    + std::string(v) + "'");
      }
      if (out < static_cast<std::uint64_t>(min) || out > static_cast<std::uint64_t>(max)) {
        throw ConfigError(flag, "value " + std::to_string(out) + " outside ["
                                    + std::to_string(min) + ", "
                                    + std::to_string(max) + "]");
      }
      return static_cast<T>(out);
    }

    std::string str(bool b) {
      return b ? "true" : "false";
    }
  }  // namespace

  NodeConfig parse_config(std::span<const std::string> args) {
    NodeConfig c;
    for (const auto &arg : args) {
      if (!arg.starts_with("--")) {
        throw ConfigError(arg, "flags must have the form --name:value");
      }
      auto colon = arg.find(':');
      if (colon == std::string::npos) {
        throw ConfigError(arg.substr(2), "missing ':value'");
      }
      std::string name = arg.substr(2, colon - 2);
      std::string_view value = std::string_view(arg).substr(colon + 1);

      if (name == "staticnode") {
        try {
          c.staticnode.push_back(parse_multiaddr(value));
        } catch (const InvalidArgument &e) {
          throw ConfigError(name, e.what());
        }
      } else if (name == "relay") {
        c.relay = parse_bool(name, value);
      } else if (name == "topics") {
        std::size_t start = 0;
        while (start <= value.size()) {
          auto end = value.find_first_of(" ,", start);
          if (end == std::string_view::npos) {
            end = value.size();
          }
          auto t = value.substr(start, end - start);
          if (!t.empty()) {
            try {
              c.topics.emplace_back(std::string(t));
            } catch (const InvalidArgument &e) {
              throw ConfigError(name, e.what());
            }
          }
          start = end + 1;
        }
      } else if (name == "store") {
        c.store = parse_bool(name, value);
      } else if (name == "persist-messages") {
        c.persist_messages = parse_bool(name, value);
      } else if (name == "store-capacity") {
        c.store_capacity =
            parse_uint<std::size_t>(name, value, 1, std::size_t{1} << 32);
      } else if (name == "filter") {
        c.filter = parse_bool(name, value);
      } else if (name == "lightpush") {
        c.lightpush = parse_bool(name, value);
      } else if (name == "filter-light") {
        c.filter_light = parse_bool(name, value);
      } else if (name == "lightpush-light") {
        c.lightpush_light = parse_bool(name, value);
      } else if (name == "rpc") {
        c.rpc = parse_bool(name, value);
      } else if (name == "rpcAddress" || name == "rpc-address") {
        auto ip = Ipv4::parse(value);
        if (!ip) {
          throw ConfigError(name, "bad ip4 address '" + std::string(value) + "'");
        }
        c.rpc_address = *ip;
      } else if (name == "rpc-port" || name == "rpcPort") {
        c.rpc_port = parse_uint<std::uint16_t>(name, value, 1, 65535);
      } else if (name == "listen-port") {
        c.listen_port = parse_uint<std::uint16_t>(name, value, 0, 65535);
      } else if (name == "peer-list-url") {
        c.peer_list_url = std::string(value);
      } else if (name == "peer-list-key") {
        try {
          parse_public_key(value);
        } catch (const DiscoveryError &e) {
          throw ConfigError(name, e.what());
        }
        c.peer_list_key = std::string(value);
      } else if (name == "data-dir") {
        c.data_dir = std::string(value);
      } else if (name == "nodekey") {
        try {
          SigningKey::from_seed(from_hex(value));
        } catch (const Error &e) {
          throw ConfigError(name, e.what());
        }
        c.nodekey = std::string(value);
      } else if (name == "mesh-degree") {
        c.relay_params.mesh_degree = parse_uint<std::size_t>(name, value, 1, 64);
      } else if (name == "heartbeat-interval-ms") {
        c.relay_params.heartbeat_interval =
            parse_uint<std::int64_t>(name, value, 1, 3'600'000) * kMillisecond;
      } else if (name == "seen-ttl-ms") {
        c.relay_params.seen_ttl =
            parse_uint<std::int64_t>(name, value, 1, 86'400'000) * kMillisecond;
      } else if (name == "gossip-window") {
        c.relay_params.gossip_window = parse_uint<std::size_t>(name, value, 1, 64);
      } else {
        throw ConfigError(name, "unknown flag");
      }
    }

    if (c.persist_messages && !c.store) {
      throw ConfigError("persist-messages", "requires --store:true");
    }
    if (c.relay_params.seen_ttl <= c.relay_params.heartbeat_interval) {
      throw ConfigError("seen-ttl-ms", "must exceed the heartbeat interval");
    }
    return c;
  }

  std::vector<std::string> format_config(const NodeConfig &c) {
    std::vector<std::string> out;
    for (const auto &a : c.staticnode) {
      out.push_back("--staticnode:" + a.str());
    }
    out.push_back("--relay:" + str(c.relay));
    for (const auto &t : c.topics) {
      out.push_back("--topics:" + t.str());
    }
    out.push_back("--store:" + str(c.store));
    out.push_back("--persist-messages:" + str(c.persist_messages));
    out.push_back("--store-capacity:" + std::to_string(c.store_capacity));
    out.push_back("--filter:" + str(c.filter));
    out.push_back("--lightpush:" + str(c.lightpush));
    out.push_back("--filter-light:" + str(c.filter_light));
    out.push_back("--lightpush-light:" + str(c.lightpush_light));
    out.push_back("--rpc:" + str(c.rpc));
    out.push_back("--rpcAddress:" + c.rpc_address.str());
    out.push_back("--rpc-port:" + std::to_string(c.rpc_port));
    out.push_back("--listen-port:" + std::to_string(c.listen_port));
    if (c.peer_list_url) {
      out.push_back("--peer-list-url:" + *c.peer_list_url);
    }
    if (c.peer_list_key) {
      out.push_back("--peer-list-key:" + *c.peer_list_key);
    }
    out.push_back("--data-dir:" + c.data_dir);
    if (c.nodekey) {
      out.push_back("--nodekey:" + *c.nodekey);
    }
    out.push_back("--mesh-degree:" + std::to_string(c.relay_params.mesh_degree));
    out.push_back("--heartbeat-interval-ms:"
                  + std::to_string(c.relay_params.heartbeat_interval / kMillisecond));
    out.push_back("--seen-ttl-ms:"
                  + std::to_string(c.relay_params.seen_ttl / kMillisecond));
    out.push_back("--gossip-window:" + std::to_string(c.relay_params.gossip_window));
    return out;
  }

  std::map<Protocol, Mode> mounted_protocols(const NodeConfig &c) {
    std::map<Protocol, Mode> out;
    auto require_relay = [&](std::string_view what) {
      if (!c.relay) {
        throw StartupError(std::string(what)
                           + " in full mode requires relay (--relay:true)");
      }
    };
    if (c.relay) {
      out[Protocol::relay] = Mode::full;
    } else if (!c.topics.empty()) {
      throw StartupError("--topics requires relay (--relay:true)");
    }
    if (c.store) {
      if (c.persist_messages) {
        require_relay("store");
        out[Protocol::store] = Mode::full;
      } else {
        out[Protocol::store] = Mode::light;
      }
    }
    if (c.filter) {
      require_relay("filter");
      out[Protocol::filter] = Mode::full;
    } else if (c.filter_light) {
      out[Protocol::filter] = Mode::light;
    }
    if (c.lightpush) {
      require_relay("lightpush");
      out[Protocol::lightpush] = Mode::full;
    } else if (c.lightpush_light) {
      out[Protocol::lightpush] = Mode::light;
    }
    return out;
  }

}  // namespace waku
