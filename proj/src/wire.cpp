/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/wire.hpp>

#include <algorithm>
#include <array>

#include <waku/error.hpp>

namespace waku {

  namespace {
    constexpr std::string_view kBase58 =
        "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

    constexpr std::array kProtocolIds = {
        std::pair{Protocol::relay, std::string_view{"/vac/waku/relay/2.0.0"}},
        std::pair{Protocol::store, std::string_view{"/vac/waku/store/2.0.0"}},
        std::pair{Protocol::filter, std::string_view{"/vac/waku/filter/2.0.0"}},
        std::pair{Protocol::lightpush,
                  std::string_view{"/vac/waku/lightpush/2.0.0"}},
        std::pair{Protocol::handshake,
                  std::string_view{"/vac/waku/handshake/2.0.0"}},
    };

    // idlen + request_id + kind
    constexpr std::size_t kMinFrameLen = 1 + 8 + 1;
  }  // namespace

  PeerId::PeerId(std::string value) : value_(std::move(value)) {
    if (value_.empty() || value_.size() > 128) {
      throw InvalidArgument("peer id must be 1..128 characters");
    }
    for (char c : value_) {
      if (kBase58.find(c) == std::string_view::npos) {
        throw InvalidArgument("peer id has non-base58 character '"
                              + std::string(1, c) + "'");
      }
    }
  }

  std::string_view protocol_id(Protocol p) {
    for (auto [proto, id] : kProtocolIds) {
      if (proto == p) {
        return id;
      }
    }
    return {};
  }

  std::optional<Protocol> parse_protocol_id(std::string_view id) {
    for (auto [proto, s] : kProtocolIds) {
      if (s == id) {
        return proto;
      }
    }
    return std::nullopt;
  }

  std::string_view protocol_name(Protocol p) {
    switch (p) {
      case Protocol::relay:
        return "relay";
      case Protocol::store:
        return "store";
      case Protocol::filter:
        return "filter";
      case Protocol::lightpush:
        return "lightpush";
      case Protocol::handshake:
        return "handshake";
    }
    return "?";
  }

  Bytes encode_frame(const Frame &f, std::size_t max_frame) {
    if (f.body.size() > max_frame) {
      throw CodecError("frame body exceeds max frame size");
    }
    auto id = protocol_id(f.protocol);
    ByteWriter w;
    w.u32_be(static_cast<std::uint32_t>(kMinFrameLen + id.size() + f.body.size()));
    w.u8(static_cast<std::uint8_t>(id.size()));
    w.raw(BytesView(reinterpret_cast<const std::uint8_t *>(id.data()), id.size()));
    w.u64_be(f.request_id);
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.raw(f.body);
    return std::move(w).take();
  }

  namespace {
    Frame decode_frame_payload(ByteReader &r, std::size_t len,
                               std::size_t max_frame) {
      auto start = r.position();
      auto idlen = r.u8();
      auto id_view = r.raw(idlen);
      std::string id(id_view.begin(), id_view.end());
      auto proto = parse_protocol_id(id);
      if (!proto) {
        throw CodecError("unknown protocol id '" + id + "'", start + 1);
      }
      Frame f;
      f.protocol = *proto;
      f.request_id = r.u64_be();
      auto kind_pos = r.position();
      auto kind = r.u8();
      if (kind > static_cast<std::uint8_t>(FrameKind::push)) {
        throw CodecError("unknown frame kind " + std::to_string(kind), kind_pos);
      }
      f.kind = static_cast<FrameKind>(kind);
      auto consumed = r.position() - start;
      if (consumed > len) {
        throw CodecError("frame header overruns length prefix", start);
      }
      auto body_len = len - consumed;
      if (body_len > max_frame) {
        throw CodecError("frame body exceeds max frame size", start);
      }
      auto body = r.raw(body_len);
      f.body.assign(body.begin(), body.end());
      return f;
    }
  }  // namespace

  Frame decode_frame(BytesView bytes, std::size_t max_frame) {
    ByteReader r(bytes);
    auto len = r.u32_be();
    if (len < kMinFrameLen) {
      throw CodecError("frame length below minimum", 0);
    }
    if (len != r.remaining()) {
      throw CodecError("frame length prefix " + std::to_string(len)
                           + " does not match " + std::to_string(r.remaining())
                           + " available bytes",
                       0);
    }
    // a length prefix bounded by the buffer size cannot overrun, but the
    // header may still claim more than the prefix allows
    ByteReader inner(bytes.subspan(4));
    auto f = decode_frame_payload(inner, len, max_frame);
    inner.expect_done("frame");
    return f;
  }

  void FrameReader::feed(BytesView chunk) {
    buffer_.insert(buffer_.end(), chunk.begin(), chunk.end());
  }

  std::optional<Frame> FrameReader::next() {
    if (buffer_.size() < 4) {
      return std::nullopt;
    }
    ByteReader prefix(buffer_);
    auto len = prefix.u32_be();
    if (len < kMinFrameLen || len > max_frame_ + kMinFrameLen + 255) {
      throw CodecError("invalid frame length " + std::to_string(len), 0);
    }
    if (buffer_.size() < 4 + static_cast<std::size_t>(len)) {
      return std::nullopt;
    }
    auto f = decode_frame(BytesView(buffer_).first(4 + len), max_frame_);
    buffer_.erase(buffer_.begin(), buffer_.begin() + 4 + len);
    return f;
  }

  Bytes encode_ok(BytesView payload) {
    ByteWriter w;
    w.u8(0);
    w.raw(payload);
    return std::move(w).take();
  }

  Bytes encode_error(std::string_view reason) {
    ByteWriter w;
    w.u8(1);
    w.str(reason);
    return std::move(w).take();
  }

  ResponseEnvelope decode_response(BytesView body) {
    ByteReader r(body);
    auto status = r.u8();
    ResponseEnvelope env;
    if (status == 0) {
      auto rest = r.raw(r.remaining());
      env.payload.assign(rest.begin(), rest.end());
    } else if (status == 1) {
      env.ok = false;
      env.error = r.str(4096);
      r.expect_done("error response");
    } else {
      throw CodecError("unknown response status " + std::to_string(status), 0);
    }
    return env;
  }

  Bytes encode_capabilities(const Capabilities &caps) {
    for (auto [proto, mode] : caps.protocols) {
      if (proto == Protocol::handshake) {
        throw CodecError("handshake is not an advertisable protocol");
      }
      if (proto == Protocol::relay && mode != Mode::full) {
        throw CodecError("relay can only be advertised in full mode");
      }
    }
    ByteWriter w;
    w.str(caps.peer.str());
    w.u8(static_cast<std::uint8_t>(caps.protocols.size()));
    for (auto [proto, mode] : caps.protocols) {
      w.str(protocol_id(proto));
      w.u8(static_cast<std::uint8_t>(mode));
    }
    return std::move(w).take();
  }

  Capabilities decode_capabilities(BytesView bytes) {
    ByteReader r(bytes);
    auto peer_pos = r.position();
    auto peer = r.str(128);
    std::optional<PeerId> id;
    try {
      id.emplace(std::move(peer));
    } catch (const InvalidArgument &e) {
      throw CodecError(e.what(), peer_pos);
    }
    Capabilities caps{*id, {}};
    auto count = r.u8();
    std::optional<Protocol> prev;
    for (unsigned i = 0; i < count; ++i) {
      auto pos = r.position();
      auto proto = parse_protocol_id(r.str(64));
      if (!proto || *proto == Protocol::handshake) {
        throw CodecError("unknown advertised protocol", pos);
      }
      if (prev && *proto <= *prev) {
        throw CodecError("advertised protocols not in canonical order", pos);
      }
      auto mode_pos = r.position();
      auto mode = r.u8();
      if (mode > static_cast<std::uint8_t>(Mode::light)) {
        throw CodecError("unknown protocol mode", mode_pos);
      }
      if (*proto == Protocol::relay && mode != static_cast<std::uint8_t>(Mode::full)) {
        throw CodecError("relay can only be advertised in full mode", mode_pos);
      }
      caps.protocols.emplace(*proto, static_cast<Mode>(mode));
      prev = proto;
    }
    r.expect_done("capabilities");
    return caps;
  }

  ConnectionUsage usable_protocols(const Capabilities &local,
                                   const Capabilities &remote) {
    ConnectionUsage usage;
    for (auto [proto, mode] : local.protocols) {
      if (remote.has(proto)) {
        usage.shared.insert(proto);
      }
    }
    for (auto [proto, mode] : remote.protocols) {
      if (proto == Protocol::relay) {
        if (local.has(Protocol::relay)) {
          usage.requestable.insert(proto);
        }
      } else if (mode == Mode::full && local.has(proto)) {
        usage.requestable.insert(proto);
      }
    }
    return usage;
  }

  Capabilities handshake(const Capabilities &local, ByteStream &remote,
                         std::chrono::milliseconds timeout) {
    remote.write(encode_frame(
        Frame{Protocol::handshake, 0, FrameKind::push, encode_capabilities(local)}));
    FrameReader reader;
    auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) {
        throw ProtocolError("handshake timed out");
      }
      auto chunk = remote.read_some(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now));
      if (!chunk) {
        throw ProtocolError("stream closed during handshake");
      }
      if (chunk->empty()) {
        continue;
      }
      reader.feed(*chunk);
      try {
        if (auto f = reader.next()) {
          if (f->protocol != Protocol::handshake) {
            throw ProtocolError("first frame is not a handshake");
          }
          return decode_capabilities(f->body);
        }
      } catch (const CodecError &e) {
        throw ProtocolError(std::string("malformed advertisement: ") + e.what());
      }
    }
  }

}  // namespace waku
