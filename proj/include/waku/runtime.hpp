/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include <waku/bytes.hpp>

namespace waku {

  using TimerId = std::uint64_t;

  constexpr std::int64_t kMillisecond = 1'000'000;
  constexpr std::int64_t kSecond = 1'000'000'000;

  /**
   * Everything a node needs from its host: a clock, timers, and randomness.
   * All callbacks run on the node's serialized event stream. The simulator
   * provides virtual time and a seeded generator; the daemon provides wall
   * time and an OS-seeded one.
   */
  class Runtime {
   public:
    virtual ~Runtime() = default;

    /// Nanoseconds since the Unix epoch (virtual in simulation).
    virtual std::int64_t now() const = 0;

    /// `background` timers (periodic maintenance) do not keep a simulation
    /// from being considered idle.
    virtual TimerId schedule(std::int64_t delay_ns, std::string label,
                             std::function<void()> fn, bool background = false) = 0;
    virtual void cancel(TimerId id) = 0;

    virtual std::mt19937_64 &rng() = 0;
  };

  /// One end of a bidirectional byte channel to a remote node.
  class Link {
   public:
    virtual ~Link() = default;
    virtual void send(Bytes bytes) = 0;
    virtual void close() = 0;
  };

}  // namespace waku
