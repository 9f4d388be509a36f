/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/bytes.hpp>

#include <sodium.h>

#include <waku/error.hpp>

namespace waku {

  std::string to_hex(BytesView data) {
    std::string out(data.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data.data(), data.size());
    out.pop_back();
    return out;
  }

  Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
      throw CodecError("odd-length hex string");
    }
    for (std::size_t i = 0; i < hex.size(); ++i) {
      char c = hex[i];
      bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
      if (!ok) {
        throw CodecError("invalid lowercase hex digit", i);
      }
    }
    Bytes out(hex.size() / 2);
    std::size_t len = 0;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr,
                       &len, nullptr)
        != 0) {
      throw CodecError("invalid hex string");
    }
    out.resize(len);
    return out;
  }

  std::string to_base64(BytesView data) {
    constexpr int kVariant = sodium_base64_VARIANT_ORIGINAL;
    std::string out(sodium_base64_ENCODED_LEN(data.size(), kVariant), '\0');
    sodium_bin2base64(out.data(), out.size(), data.data(), data.size(),
                      kVariant);
    out.resize(out.size() - 1);
    return out;
  }

  Bytes from_base64(std::string_view b64) {
    Bytes out(b64.size() / 4 * 3 + 3);
    std::size_t len = 0;
    const char *end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), b64.data(), b64.size(),
                          nullptr, &len, &end, sodium_base64_VARIANT_ORIGINAL)
            != 0
        || end != b64.data() + b64.size()) {
      throw CodecError("invalid base64 string");
    }
    out.resize(len);
    return out;
  }

  std::string to_base58(BytesView data) {
    static constexpr char kAlphabet[] =
        "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
    std::size_t zeros = 0;
    while (zeros < data.size() && data[zeros] == 0) {
      ++zeros;
    }
    // base-256 to base-58 long division, digits little-endian
    std::vector<std::uint8_t> digits;
    for (std::size_t i = zeros; i < data.size(); ++i) {
      unsigned carry = data[i];
      for (auto &d : digits) {
        carry += static_cast<unsigned>(d) << 8;
        d = static_cast<std::uint8_t>(carry % 58);
        carry /= 58;
      }
      while (carry > 0) {
        digits.push_back(static_cast<std::uint8_t>(carry % 58));
        carry /= 58;
      }
    }
    std::string out(zeros, '1');
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
      out.push_back(kAlphabet[*it]);
    }
    return out;
  }

  void ByteWriter::u16_be(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }

  void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  void ByteWriter::u32_be(std::uint32_t v) {
    for (int i = 3; i >= 0; --i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  void ByteWriter::u64_be(std::uint64_t v) {
    for (int i = 7; i >= 0; --i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  void ByteWriter::blob(BytesView data) {
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
  }

  void ByteWriter::str(std::string_view s) {
    blob(BytesView(reinterpret_cast<const std::uint8_t *>(s.data()), s.size()));
  }

  void ByteReader::need(std::size_t n, std::string_view what) const {
    if (remaining() < n) {
      throw CodecError("truncated input reading " + std::string(what), pos_);
    }
  }

  std::uint8_t ByteReader::u8() {
    need(1, "u8");
    return data_[pos_++];
  }

  std::uint16_t ByteReader::u16_be() {
    need(2, "u16");
    std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t ByteReader::u32() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint32_t ByteReader::u32_be() {
    need(4, "u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | data_[pos_ + i];
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t ByteReader::u64() {
    need(8, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::uint64_t ByteReader::u64_be() {
    need(8, "u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v = (v << 8) | data_[pos_ + i];
    }
    pos_ += 8;
    return v;
  }

  BytesView ByteReader::raw(std::size_t n) {
    need(n, "bytes");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  Bytes ByteReader::blob(std::size_t max_len) {
    auto start = pos_;
    auto len = u32();
    if (len > max_len) {
      throw CodecError("length " + std::to_string(len) + " exceeds limit "
                           + std::to_string(max_len),
                       start);
    }
    auto view = raw(len);
    return Bytes(view.begin(), view.end());
  }

  std::string ByteReader::str(std::size_t max_len) {
    auto b = blob(max_len);
    return std::string(b.begin(), b.end());
  }

  void ByteReader::expect_done(std::string_view what) const {
    if (!done()) {
      throw CodecError("trailing bytes after " + std::string(what), pos_);
    }
  }

}  // namespace waku
