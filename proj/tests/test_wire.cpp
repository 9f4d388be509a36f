/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch2/catch_amalgamated.hpp>

#include <condition_variable>
#include <mutex>
#include <thread>

#include "support.hpp"

using namespace waku;
using waku::test::read_fixture;

namespace {
  const PeerId kA("12D3KooWA");
  const PeerId kB("12D3KooWB");

  /// In-memory duplex pipe; each end reads what the other wrote.
  struct Pipe {
    struct Queue {
      std::mutex mu;
      std::condition_variable cv;
      Bytes data;
      bool closed = false;
    };

    class End : public ByteStream {
     public:
      End(Queue &in, Queue &out) : in_(in), out_(out) {}
      void write(BytesView d) override {
        std::lock_guard lock(out_.mu);
        out_.data.insert(out_.data.end(), d.begin(), d.end());
        out_.cv.notify_all();
      }
      std::optional<Bytes> read_some(std::chrono::milliseconds timeout) override {
        std::unique_lock lock(in_.mu);
        in_.cv.wait_for(lock, timeout, [&] { return !in_.data.empty() || in_.closed; });
        if (in_.data.empty()) {
          return in_.closed ? std::nullopt : std::optional<Bytes>(Bytes{});
        }
        Bytes out;
        std::swap(out, in_.data);
        return out;
      }

     private:
      Queue &in_;
      Queue &out_;
    };

    Queue ab, ba;
    End a{ba, ab};
    End b{ab, ba};
  };
}  // namespace

TEST_CASE("protocol ids") {
  CHECK(protocol_id(Protocol::relay) == "/vac/waku/relay/2.0.0");
  CHECK(protocol_id(Protocol::handshake) == "/vac/waku/handshake/2.0.0");
  for (auto p : {Protocol::relay, Protocol::store, Protocol::filter, Protocol::lightpush,
                 Protocol::handshake}) {
    CHECK(parse_protocol_id(protocol_id(p)) == p);
  }
  CHECK_FALSE(parse_protocol_id("/vac/waku/swap/2.0.0"));
}

TEST_CASE("peer id validation") {
  CHECK_NOTHROW(PeerId("16Uiu2HAmPLe7Mzm8TsYUubgCAW1aJoeFScxrLj8ppHFivPo97bUZ"));
  CHECK_THROWS_AS(PeerId(""), InvalidArgument);
  CHECK_THROWS_AS(PeerId("has space"), InvalidArgument);
  CHECK_THROWS_AS(PeerId("0OIl"), InvalidArgument);
}

TEST_CASE("fixture frame matches the golden vector") {
  auto j = Json::parse(read_fixture("frame_store_request.json"));
  Frame f{*parse_protocol_id(j["protocol"].get<std::string>()), j["requestId"].get<std::uint64_t>(),
          FrameKind::request, from_hex(j["body"].get<std::string>())};
  auto golden = from_hex(read_fixture("frame_store_request.hex"));
  CHECK(encode_frame(f) == golden);
  CHECK(decode_frame(golden) == f);
}

TEST_CASE("frame codec rejects bad input") {
  Frame f{Protocol::relay, 1, FrameKind::push, Bytes{1, 2}};
  auto enc = encode_frame(f);
  CHECK_THROWS_AS(decode_frame(BytesView(enc.data(), enc.size() - 1)), CodecError);
  auto extra = enc;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_frame(extra), CodecError);

  Frame unknown{Protocol::relay, 1, FrameKind::push, {}};
  auto u = encode_frame(unknown);
  // "/vac/waku/relay/2.0.0" -> "/vac/waku/rel4y/2.0.0"
  u[4 + 1 + 13] = '4';
  CHECK_THROWS_AS(decode_frame(u), CodecError);

  auto bad_kind = enc;
  bad_kind[4 + 1 + protocol_id(Protocol::relay).size() + 8] = 3;
  CHECK_THROWS_AS(decode_frame(bad_kind), CodecError);

  Frame big{Protocol::relay, 1, FrameKind::push, Bytes(kDefaultMaxFrame + 1)};
  CHECK_THROWS_AS(encode_frame(big), CodecError);
  Frame small{Protocol::relay, 1, FrameKind::push, Bytes(100)};
  CHECK_THROWS_AS(decode_frame(encode_frame(small), 50), CodecError);
}

TEST_CASE("frame reader reassembles arbitrary chunking") {
  std::mt19937_64 rng(5);
  std::vector<Frame> frames;
  Bytes stream;
  for (int i = 0; i < 50; ++i) {
    Frame f{static_cast<Protocol>(rng() % 5), rng(), static_cast<FrameKind>(rng() % 3),
            Bytes(rng() % 64, static_cast<std::uint8_t>(i))};
    frames.push_back(f);
    auto e = encode_frame(f);
    stream.insert(stream.end(), e.begin(), e.end());
  }
  FrameReader reader;
  std::vector<Frame> got;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    auto n = std::min<std::size_t>(1 + rng() % 40, stream.size() - pos);
    reader.feed(BytesView(stream.data() + pos, n));
    pos += n;
    while (auto f = reader.next()) {
      got.push_back(*f);
    }
  }
  CHECK(got == frames);
}

TEST_CASE("fuzzed frame decoding never crashes") {
  std::mt19937_64 rng(9);
  auto base = encode_frame(Frame{Protocol::store, 7, FrameKind::request, Bytes{1, 2, 3}});
  for (int i = 0; i < 5000; ++i) {
    auto b = base;
    b[rng() % b.size()] = static_cast<std::uint8_t>(rng());
    if (rng() % 3 == 0) {
      b.resize(rng() % (b.size() + 1));
    }
    try {
      auto f = decode_frame(b);
      CHECK(encode_frame(f) == b);
    } catch (const CodecError &) {
    }
  }
}

TEST_CASE("capabilities codec and rules") {
  Capabilities c{kA, {{Protocol::relay, Mode::full}, {Protocol::store, Mode::light}}};
  CHECK(decode_capabilities(encode_capabilities(c)) == c);
  Capabilities none{kB, {}};
  CHECK(decode_capabilities(encode_capabilities(none)) == none);

  Capabilities light_relay{kA, {{Protocol::relay, Mode::light}}};
  CHECK_THROWS_AS(encode_capabilities(light_relay), CodecError);
  Capabilities hs{kA, {{Protocol::handshake, Mode::full}}};
  CHECK_THROWS_AS(encode_capabilities(hs), CodecError);

  CHECK(c.has(Protocol::store));
  CHECK_FALSE(c.serves(Protocol::store));
  CHECK(c.serves(Protocol::relay));
}

TEST_CASE("usable protocols follow the intersection rules") {
  Capabilities relay_only{kA, {{Protocol::relay, Mode::full}}};
  Capabilities store_full{kB, {{Protocol::relay, Mode::full}, {Protocol::store, Mode::full}}};

  auto u = usable_protocols(relay_only, store_full);
  CHECK(u.shared == std::set<Protocol>{Protocol::relay});
  CHECK(u.requestable == std::set<Protocol>{Protocol::relay});

  Capabilities store_light{kA, {{Protocol::store, Mode::light}}};
  auto client = usable_protocols(store_light, store_full);
  CHECK(client.requestable == std::set<Protocol>{Protocol::store});
  auto server = usable_protocols(store_full, store_light);
  CHECK(server.requestable.empty());

  auto same = usable_protocols(store_full, Capabilities{kA, store_full.protocols});
  CHECK(same.shared == std::set<Protocol>{Protocol::relay, Protocol::store});

  auto empty = usable_protocols(relay_only, Capabilities{kB, {}});
  CHECK(empty.shared.empty());
  CHECK(empty.requestable.empty());
}

TEST_CASE("blocking handshake over a byte stream") {
  Pipe pipe;
  Capabilities a{kA, {{Protocol::relay, Mode::full}}};
  Capabilities b{kB, {{Protocol::store, Mode::light}}};
  std::optional<Capabilities> got_b;
  std::thread t([&] { got_b = handshake(b, pipe.b, std::chrono::milliseconds(2000)); });
  auto got_a = handshake(a, pipe.a, std::chrono::milliseconds(2000));
  t.join();
  CHECK(got_a == b);
  CHECK(got_b == a);
}

TEST_CASE("handshake times out and rejects malformed advertisements") {
  {
    Pipe pipe;
    Capabilities a{kA, {}};
    CHECK_THROWS_AS(handshake(a, pipe.a, std::chrono::milliseconds(50)), ProtocolError);
  }
  {
    Pipe pipe;
    auto junk = encode_frame(Frame{Protocol::handshake, 0, FrameKind::push, Bytes{0xff}});
    pipe.b.write(junk);
    CHECK_THROWS(handshake(Capabilities{kA, {}}, pipe.a, std::chrono::milliseconds(500)));
  }
}
