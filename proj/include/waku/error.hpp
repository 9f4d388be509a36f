/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace waku {

  class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
  };

  /// Malformed or out-of-bounds binary input/output.
  class CodecError : public Error {
   public:
    CodecError(const std::string &what, std::size_t position)
        : Error(what + " (at byte " + std::to_string(position) + ")"),
          position_(position) {}
    explicit CodecError(const std::string &what)
        : Error(what), position_(0) {}

    std::size_t position() const {
      return position_;
    }

   private:
    std::size_t position_;
  };

  /// A domain value violated its invariants (topic too long, empty peer id).
  class InvalidArgument : public Error {
   public:
    using Error::Error;
  };

  class ConfigError : public Error {
   public:
    ConfigError(std::string flag, const std::string &what)
        : Error("--" + flag + ": " + what), flag_(std::move(flag)) {}

    const std::string &flag() const {
      return flag_;
    }

   private:
    std::string flag_;
  };

  class StartupError : public Error {
   public:
    using Error::Error;
  };

  /// A local precondition for a client request failed; nothing was sent.
  class PreconditionError : public Error {
   public:
    using Error::Error;
  };

  /// A remote answered with an error, timed out, or sent an invalid reply.
  class ProtocolError : public Error {
   public:
    using Error::Error;
  };

}  // namespace waku
