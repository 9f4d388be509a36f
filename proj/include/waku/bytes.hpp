/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace waku {

  using Bytes = std::vector<std::uint8_t>;
  using BytesView = std::span<const std::uint8_t>;

  inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
  }

  std::string to_hex(BytesView data);
  /// Strict lowercase hex. Throws CodecError on odd length or bad digit.
  Bytes from_hex(std::string_view hex);

  std::string to_base64(BytesView data);
  Bytes from_base64(std::string_view b64);

  std::string to_base58(BytesView data);

  /**
   * Append-only byte sink used by every binary codec in the project.
   * Integers are written little-endian unless the `_be` variant is used.
   */
  class ByteWriter {
   public:
    void u8(std::uint8_t v) {
      out_.push_back(v);
    }
    void u16_be(std::uint16_t v);
    void u32(std::uint32_t v);
    void u32_be(std::uint32_t v);
    void u64(std::uint64_t v);
    void u64_be(std::uint64_t v);
    void i64(std::int64_t v) {
      u64(static_cast<std::uint64_t>(v));
    }
    void raw(BytesView data) {
      out_.insert(out_.end(), data.begin(), data.end());
    }
    /// u32 little-endian length followed by the bytes.
    void blob(BytesView data);
    void str(std::string_view s);

    const Bytes &bytes() const & {
      return out_;
    }
    Bytes take() && {
      return std::move(out_);
    }

   private:
    Bytes out_;
  };

  /// Bounds-checked reader; every failure throws CodecError carrying the
  /// offset at which it happened.
  class ByteReader {
   public:
    explicit ByteReader(BytesView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16_be();
    std::uint32_t u32();
    std::uint32_t u32_be();
    std::uint64_t u64();
    std::uint64_t u64_be();
    std::int64_t i64() {
      return static_cast<std::int64_t>(u64());
    }
    BytesView raw(std::size_t n);
    Bytes blob(std::size_t max_len);
    std::string str(std::size_t max_len);

    std::size_t position() const {
      return pos_;
    }
    std::size_t remaining() const {
      return data_.size() - pos_;
    }
    bool done() const {
      return pos_ == data_.size();
    }
    /// Throws unless every byte was consumed.
    void expect_done(std::string_view what) const;

   private:
    void need(std::size_t n, std::string_view what) const;

    BytesView data_;
    std::size_t pos_ = 0;
  };

}  // namespace waku
