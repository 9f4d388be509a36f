/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <memory>

#include <waku/node.hpp>

namespace waku {

  /// Loads the 32-byte identity seed: `--nodekey`, else `<data_dir>/nodekey`
  /// (created on first start), else a fresh ephemeral key.
  SigningKey load_or_create_identity(const NodeConfig &config);

  /**
   * A node on real sockets. One I/O thread runs the node's event loop; TCP
   * links, timers and RPC requests are all serialized onto it. Dials the
   * bootstrap list once at start and drops dialed connections whose
   * handshake names a peer other than the one in the multiaddr.
   */
  class Daemon {
   public:
    explicit Daemon(NodeConfig config);
    ~Daemon();
    Daemon(const Daemon &) = delete;
    Daemon &operator=(const Daemon &) = delete;

    /// Throws StartupError (mount rules, bind failures).
    void start();
    /// Closes links, flushes the store snapshot, stops RPC. Idempotent.
    void stop();

    const PeerId &id() const;
    std::uint16_t listen_port() const;
    /// 0 unless RPC is enabled.
    std::uint16_t rpc_port() const;

    /// Asynchronous; failures are logged.
    void dial(const Multiaddr &addr);
    /// Runs `fn` on the node loop and waits for it to return.
    void with_node(const std::function<void(Node &)> &fn);

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
  };

}  // namespace waku
