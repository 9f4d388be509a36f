/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <waku/bytes.hpp>

namespace waku {

  /// Opaque base58 token identifying a node, e.g. "16Uiu2HAm...".
  class PeerId {
   public:
    /// Throws InvalidArgument unless nonempty, at most 128 chars, and drawn
    /// from the base58 alphabet.
    explicit PeerId(std::string value);

    const std::string &str() const {
      return value_;
    }

    auto operator<=>(const PeerId &) const = default;

   private:
    std::string value_;
  };

  enum class Protocol : std::uint8_t {
    relay,
    store,
    filter,
    lightpush,
    handshake,
  };

  /// "/vac/waku/<name>/2.0.0"
  std::string_view protocol_id(Protocol p);
  std::optional<Protocol> parse_protocol_id(std::string_view id);
  std::string_view protocol_name(Protocol p);

  enum class FrameKind : std::uint8_t {
    request = 0,
    response = 1,
    push = 2,
  };

  constexpr std::size_t kDefaultMaxFrame = 2u << 20;

  struct Frame {
    Protocol protocol = Protocol::handshake;
    std::uint64_t request_id = 0;
    FrameKind kind = FrameKind::push;
    Bytes body;

    bool operator==(const Frame &) const = default;
  };

  /**
   * `len:u32be | idlen:u8 | protocol-id | request_id:u64be | kind:u8 | body`
   * where `len` counts everything after itself.
   */
  Bytes encode_frame(const Frame &f, std::size_t max_frame = kDefaultMaxFrame);
  /// Decodes exactly one frame occupying all of `bytes`.
  Frame decode_frame(BytesView bytes, std::size_t max_frame = kDefaultMaxFrame);

  /// Reassembles frames from an arbitrary chunking of a byte stream.
  class FrameReader {
   public:
    explicit FrameReader(std::size_t max_frame = kDefaultMaxFrame)
        : max_frame_(max_frame) {}

    void feed(BytesView chunk);
    /// Next complete frame, if buffered. Throws CodecError on a malformed or
    /// oversize frame; the stream is unusable afterwards.
    std::optional<Frame> next();

   private:
    std::size_t max_frame_;
    Bytes buffer_;
  };

  /// Body of every response frame: `status:u8` then either the protocol
  /// payload (status 0) or a length-prefixed UTF-8 reason (status 1).
  struct ResponseEnvelope {
    bool ok = true;
    std::string error;
    Bytes payload;
  };

  Bytes encode_ok(BytesView payload);
  Bytes encode_error(std::string_view reason);
  ResponseEnvelope decode_response(BytesView body);

  enum class Mode : std::uint8_t {
    full = 0,
    light = 1,
  };

  /// What a node advertises in its handshake. Relay is always full.
  struct Capabilities {
    PeerId peer;
    std::map<Protocol, Mode> protocols;

    bool has(Protocol p) const {
      return protocols.contains(p);
    }
    bool serves(Protocol p) const {
      auto it = protocols.find(p);
      return it != protocols.end() && it->second == Mode::full;
    }
    bool operator==(const Capabilities &) const = default;
  };

  Bytes encode_capabilities(const Capabilities &caps);
  Capabilities decode_capabilities(BytesView bytes);

  /// Which protocols a connection can carry, from one side's perspective.
  struct ConnectionUsage {
    /// Protocols both sides advertise (any mode).
    std::set<Protocol> shared;
    /// Protocols the local side may issue requests for: mounted locally in
    /// either mode and served by the remote in full mode, or relay on both.
    std::set<Protocol> requestable;

    bool operator==(const ConnectionUsage &) const = default;
  };

  ConnectionUsage usable_protocols(const Capabilities &local,
                                   const Capabilities &remote);

  /// Minimal blocking byte stream.
  class ByteStream {
   public:
    virtual ~ByteStream() = default;
    virtual void write(BytesView data) = 0;
    /// Empty on timeout; nullopt once the stream is closed.
    virtual std::optional<Bytes> read_some(std::chrono::milliseconds timeout) = 0;
  };

  constexpr std::chrono::milliseconds kHandshakeTimeout{5000};

  /**
   * Sends our advertisement and waits for the remote's. Throws ProtocolError
   * on timeout or a malformed/non-handshake first frame; callers close the
   * connection in that case.
   */
  Capabilities handshake(const Capabilities &local, ByteStream &remote,
                         std::chrono::milliseconds timeout = kHandshakeTimeout);

}  // namespace waku
