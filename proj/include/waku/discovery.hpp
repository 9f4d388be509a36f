/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <waku/bytes.hpp>
#include <waku/error.hpp>
#include <waku/wire.hpp>

namespace waku {

  struct Ipv4 {
    std::array<std::uint8_t, 4> octets{};

    /// Canonical dotted quad only: no leading zeros, no whitespace.
    static std::optional<Ipv4> parse(std::string_view s);
    std::string str() const;

    auto operator<=>(const Ipv4 &) const = default;
  };

  /// `/ip4/<a.b.c.d>/tcp/<port>/p2p/<peerid>`; the only grammar supported.
  struct Multiaddr {
    Ipv4 ip;
    std::uint16_t port = 0;
    PeerId peer;

    std::string str() const;
    bool operator==(const Multiaddr &) const = default;
  };

  /// Throws InvalidArgument naming the offending segment.
  Multiaddr parse_multiaddr(std::string_view s);

  class DiscoveryError : public Error {
   public:
    enum class Kind {
      malformed,
      unauthenticated,
      stale,
      invalid_key,
      sequence,
    };

    DiscoveryError(Kind kind, const std::string &what)
        : Error(what), kind_(kind) {}

    Kind kind() const {
      return kind_;
    }

   private:
    Kind kind_;
  };

  using PublicKey = std::array<std::uint8_t, 32>;

  /// Ed25519 key pair derived from a 32-byte seed.
  class SigningKey {
   public:
    /// Throws DiscoveryError(invalid_key) unless `seed` is 32 bytes.
    static SigningKey from_seed(BytesView seed);
    static SigningKey generate();

    const PublicKey &public_key() const {
      return public_;
    }
    const std::array<std::uint8_t, 32> &seed() const {
      return seed_;
    }
    Bytes sign(BytesView message) const;

   private:
    std::array<std::uint8_t, 32> seed_{};
    std::array<std::uint8_t, 64> secret_{};
    PublicKey public_{};
  };

  /// Throws DiscoveryError(invalid_key) unless 64 lowercase hex digits.
  PublicKey parse_public_key(std::string_view hex);

  /// libp2p-style identity: base58 of the ed25519 identity multihash of the
  /// public key, so ids read "12D3KooW...".
  PeerId peer_id_from_key(const PublicKey &key);

  struct SignedPeerList {
    std::uint64_t seq = 0;
    std::vector<Multiaddr> peers;
    PublicKey signer{};
    Bytes signature;

    bool operator==(const SignedPeerList &) const = default;
  };

  /// The exact bytes covered by the signature: header, seq and peer lines.
  std::string canonical_peer_list_body(std::uint64_t seq,
                                       const std::vector<Multiaddr> &peers);

  /**
   * Text document, every line '\n'-terminated:
   *   waku-peer-list/1
   *   seq=<decimal>
   *   peer=<multiaddr>        (zero or more)
   *   signer=<64 hex>
   *   sig=<128 hex>
   */
  std::string format_peer_list(const SignedPeerList &doc);
  /// Strict canonical parse; throws DiscoveryError(malformed).
  SignedPeerList parse_peer_list(std::string_view text);

  /// Issues successive lists for one signer; enforces increasing seq.
  class PeerListPublisher {
   public:
    explicit PeerListPublisher(SigningKey key,
                               std::optional<std::uint64_t> last_seq = std::nullopt)
        : key_(std::move(key)), last_seq_(last_seq) {}

    /// Throws DiscoveryError(sequence) if seq does not increase, or
    /// DiscoveryError(malformed) for duplicate peer ids.
    SignedPeerList build(std::vector<Multiaddr> peers, std::uint64_t seq);

   private:
    SigningKey key_;
    std::optional<std::uint64_t> last_seq_;
  };

  /**
   * Returns the peers iff the document parses, is signed by `trusted`, and
   * its seq exceeds `last_seen_seq`. The caller persists the new seq.
   * Throws DiscoveryError: malformed / unauthenticated / stale.
   */
  std::vector<Multiaddr> verify_peer_list(std::string_view doc,
                                          const PublicKey &trusted,
                                          std::uint64_t last_seen_seq,
                                          std::uint64_t *seq_out = nullptr);

  /// Fetches a document from a file path or an http:// URL.
  using PeerListFetcher = std::function<std::string(const std::string &source)>;
  std::string fetch_peer_list(const std::string &source);

  struct BootstrapResult {
    std::vector<Multiaddr> dial_list;
    std::uint64_t last_seen_seq = 0;
    std::optional<std::string> error;
  };

  /**
   * Static nodes first (in configured order), then verified list entries,
   * de-duplicated by peer id. A list that cannot be fetched or verified is
   * reported in `error` and the static nodes are still returned.
   */
  BootstrapResult bootstrap(const std::vector<Multiaddr> &static_nodes,
                            const std::optional<std::string> &list_source,
                            const std::optional<std::string> &list_key,
                            std::uint64_t last_seen_seq,
                            const PeerListFetcher &fetch = fetch_peer_list);

}  // namespace waku
