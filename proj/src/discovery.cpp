/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/discovery.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>
#include <sodium.h>

namespace waku {

  namespace {
    constexpr std::string_view kHeader = "waku-peer-list/1";

    void ensure_sodium() {
      static const bool ok = sodium_init() >= 0;
      if (!ok) {
        throw Error("libsodium initialisation failed");
      }
    }

    /// Canonical unsigned decimal: "0" or no leading zero.
    template <class T>
    std::optional<T> parse_canonical_uint(std::string_view s) {
      if (s.empty() || (s.size() > 1 && s[0] == '0')) {
        return std::nullopt;
      }
      T v{};
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
      }
      return v;
    }

    std::vector<std::string_view> split(std::string_view s, char sep) {
      std::vector<std::string_view> out;
      std::size_t start = 0;
      while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
          out.push_back(s.substr(start));
          return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
      }
    }

    [[noreturn]] void malformed(const std::string &what) {
      throw DiscoveryError(DiscoveryError::Kind::malformed, what);
    }
  }  // namespace

  std::optional<Ipv4> Ipv4::parse(std::string_view s) {
    auto parts = split(s, '.');
    if (parts.size() != 4) {
      return std::nullopt;
    }
    Ipv4 ip;
    for (std::size_t i = 0; i < 4; ++i) {
      auto v = parse_canonical_uint<unsigned>(parts[i]);
      if (!v || *v > 255) {
        return std::nullopt;
      }
      ip.octets[i] = static_cast<std::uint8_t>(*v);
    }
    return ip;
  }

  std::string Ipv4::str() const {
    return std::to_string(octets[0]) + "." + std::to_string(octets[1]) + "."
        + std::to_string(octets[2]) + "." + std::to_string(octets[3]);
  }

  std::string Multiaddr::str() const {
    return "/ip4/" + ip.str() + "/tcp/" + std::to_string(port) + "/p2p/"
        + peer.str();
  }

  Multiaddr parse_multiaddr(std::string_view s) {
    auto parts = split(s, '/');
    // leading '/' yields an empty first segment
    if (parts.size() < 2 || !parts[0].empty()) {
      throw InvalidArgument("multiaddr must start with '/'");
    }
    if (parts[1] != "ip4") {
      throw InvalidArgument("unsupported address protocol '"
                            + std::string(parts[1]) + "' (expected ip4)");
    }
    if (parts.size() < 3) {
      throw InvalidArgument("missing ip4 address");
    }
    auto ip = Ipv4::parse(parts[2]);
    if (!ip) {
      throw InvalidArgument("bad ip4 address '" + std::string(parts[2]) + "'");
    }
    if (parts.size() < 4 || parts[3] != "tcp") {
      throw InvalidArgument(
          "unsupported transport '"
          + (parts.size() < 4 ? std::string() : std::string(parts[3]))
          + "' (expected tcp)");
    }
    if (parts.size() < 5) {
      throw InvalidArgument("missing tcp port");
    }
    auto port = parse_canonical_uint<unsigned>(parts[4]);
    if (!port || *port == 0 || *port > 65535) {
      throw InvalidArgument("tcp port out of range '" + std::string(parts[4])
                            + "'");
    }
    if (parts.size() < 7 || parts[5] != "p2p") {
      throw InvalidArgument("missing /p2p/<peerid> segment");
    }
    if (parts.size() > 7) {
      throw InvalidArgument("trailing segments after peer id");
    }
    try {
      return Multiaddr{*ip, static_cast<std::uint16_t>(*port),
                       PeerId(std::string(parts[6]))};
    } catch (const InvalidArgument &e) {
      throw InvalidArgument(std::string("bad peer id: ") + e.what());
    }
  }

  SigningKey SigningKey::from_seed(BytesView seed) {
    ensure_sodium();
    if (seed.size() != crypto_sign_SEEDBYTES) {
      throw DiscoveryError(DiscoveryError::Kind::invalid_key,
                           "signing key seed must be 32 bytes");
    }
    SigningKey k;
    std::copy(seed.begin(), seed.end(), k.seed_.begin());
    crypto_sign_seed_keypair(k.public_.data(), k.secret_.data(), k.seed_.data());
    return k;
  }

  SigningKey SigningKey::generate() {
    ensure_sodium();
    std::array<std::uint8_t, 32> seed{};
    randombytes_buf(seed.data(), seed.size());
    return from_seed(seed);
  }

  Bytes SigningKey::sign(BytesView message) const {
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         secret_.data());
    return sig;
  }

  PublicKey parse_public_key(std::string_view hex) {
    Bytes raw;
    try {
      raw = from_hex(hex);
    } catch (const CodecError &) {
      throw DiscoveryError(DiscoveryError::Kind::invalid_key,
                           "public key is not lowercase hex");
    }
    if (raw.size() != 32) {
      throw DiscoveryError(DiscoveryError::Kind::invalid_key,
                           "public key must be 32 bytes");
    }
    PublicKey k;
    std::copy(raw.begin(), raw.end(), k.begin());
    return k;
  }

  PeerId peer_id_from_key(const PublicKey &key) {
    Bytes mh = {0x00, 0x24, 0x08, 0x01, 0x12, 0x20};
    mh.insert(mh.end(), key.begin(), key.end());
    return PeerId(to_base58(mh));
  }

  std::string canonical_peer_list_body(std::uint64_t seq,
                                       const std::vector<Multiaddr> &peers) {
    std::string out(kHeader);
    out += "\nseq=" + std::to_string(seq) + "\n";
    for (const auto &p : peers) {
      out += "peer=" + p.str() + "\n";
    }
    return out;
  }

  std::string format_peer_list(const SignedPeerList &doc) {
    return canonical_peer_list_body(doc.seq, doc.peers) + "signer="
        + to_hex(doc.signer) + "\nsig=" + to_hex(doc.signature) + "\n";
  }

  SignedPeerList parse_peer_list(std::string_view text) {
    if (text.empty() || text.back() != '\n') {
      malformed("document must end with a newline");
    }
    auto lines = split(text.substr(0, text.size() - 1), '\n');
    if (lines.size() < 4) {
      malformed("document too short");
    }
    if (lines[0] != kHeader) {
      malformed("bad header line");
    }
    SignedPeerList doc;
    if (!lines[1].starts_with("seq=")) {
      malformed("missing seq line");
    }
    auto seq = parse_canonical_uint<std::uint64_t>(lines[1].substr(4));
    if (!seq) {
      malformed("bad seq value");
    }
    doc.seq = *seq;
    std::set<PeerId> ids;
    std::size_t i = 2;
    for (; i + 2 < lines.size(); ++i) {
      if (!lines[i].starts_with("peer=")) {
        malformed("expected peer line " + std::to_string(i + 1));
      }
      try {
        auto addr = parse_multiaddr(lines[i].substr(5));
        if (!ids.insert(addr.peer).second) {
          malformed("duplicate peer id " + addr.peer.str());
        }
        doc.peers.push_back(std::move(addr));
      } catch (const InvalidArgument &e) {
        malformed("line " + std::to_string(i + 1) + ": " + e.what());
      }
    }
    if (!lines[i].starts_with("signer=") || !lines[i + 1].starts_with("sig=")) {
      malformed("missing signer/sig lines");
    }
    try {
      doc.signer = parse_public_key(lines[i].substr(7));
      doc.signature = from_hex(lines[i + 1].substr(4));
    } catch (const Error &e) {
      malformed(e.what());
    }
    if (doc.signature.size() != crypto_sign_BYTES) {
      malformed("signature must be 64 bytes");
    }
    return doc;
  }

  SignedPeerList PeerListPublisher::build(std::vector<Multiaddr> peers,
                                          std::uint64_t seq) {
    if (last_seq_ && seq <= *last_seq_) {
      throw DiscoveryError(DiscoveryError::Kind::sequence,
                           "seq " + std::to_string(seq)
                               + " does not exceed previous "
                               + std::to_string(*last_seq_));
    }
    std::set<PeerId> ids;
    for (const auto &p : peers) {
      if (!ids.insert(p.peer).second) {
        malformed("duplicate peer id " + p.peer.str());
      }
    }
    SignedPeerList doc;
    doc.seq = seq;
    doc.peers = std::move(peers);
    doc.signer = key_.public_key();
    auto body = canonical_peer_list_body(doc.seq, doc.peers);
    doc.signature = key_.sign(to_bytes(body));
    last_seq_ = seq;
    return doc;
  }

  std::vector<Multiaddr> verify_peer_list(std::string_view text,
                                          const PublicKey &trusted,
                                          std::uint64_t last_seen_seq,
                                          std::uint64_t *seq_out) {
    ensure_sodium();
    auto doc = parse_peer_list(text);
    if (doc.signer != trusted) {
      throw DiscoveryError(DiscoveryError::Kind::unauthenticated,
                           "unauthenticated: signer is not the trusted key");
    }
    auto body = canonical_peer_list_body(doc.seq, doc.peers);
    if (crypto_sign_verify_detached(
            doc.signature.data(),
            reinterpret_cast<const unsigned char *>(body.data()), body.size(),
            trusted.data())
        != 0) {
      throw DiscoveryError(DiscoveryError::Kind::unauthenticated,
                           "unauthenticated: bad signature");
    }
    if (doc.seq <= last_seen_seq) {
      throw DiscoveryError(DiscoveryError::Kind::stale,
                           "stale list: seq " + std::to_string(doc.seq)
                               + " <= " + std::to_string(last_seen_seq));
    }
    if (seq_out) {
      *seq_out = doc.seq;
    }
    return doc.peers;
  }

  std::string fetch_peer_list(const std::string &source) {
    if (source.starts_with("http://")) {
      auto path_start = source.find('/', 7);
      auto host = source.substr(0, path_start);
      auto path = path_start == std::string::npos ? std::string("/")
                                                  : source.substr(path_start);
      httplib::Client cli(host);
      cli.set_connection_timeout(5);
      cli.set_read_timeout(5);
      auto res = cli.Get(path);
      if (!res) {
        throw Error("fetching " + source + " failed: "
                    + httplib::to_string(res.error()));
      }
      if (res->status != 200) {
        throw Error("fetching " + source + " returned HTTP "
                    + std::to_string(res->status));
      }
      return res->body;
    }
    std::ifstream in(source, std::ios::binary);
    if (!in) {
      throw Error("cannot read peer list " + source);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  BootstrapResult bootstrap(const std::vector<Multiaddr> &static_nodes,
                            const std::optional<std::string> &list_source,
                            const std::optional<std::string> &list_key,
                            std::uint64_t last_seen_seq,
                            const PeerListFetcher &fetch) {
    BootstrapResult result;
    result.last_seen_seq = last_seen_seq;
    std::set<PeerId> seen;
    auto add = [&](const Multiaddr &a) {
      if (seen.insert(a.peer).second) {
        result.dial_list.push_back(a);
      }
    };
    for (const auto &a : static_nodes) {
      add(a);
    }
    if (!list_source) {
      return result;
    }
    try {
      if (!list_key) {
        throw Error("peer list configured without a trusted key");
      }
      auto key = parse_public_key(*list_key);
      std::uint64_t seq = last_seen_seq;
      auto peers = verify_peer_list(fetch(*list_source), key, last_seen_seq, &seq);
      result.last_seen_seq = seq;
      for (const auto &a : peers) {
        add(a);
      }
    } catch (const std::exception &e) {
      result.error = e.what();
    }
    return result;
  }

}  // namespace waku
