/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <waku/log.hpp>

#include <spdlog/sinks/stdout_sinks.h>

namespace waku {

  spdlog::logger &log() {
    static auto logger = [] {
      auto l = spdlog::stderr_logger_mt("waku");
      l->set_pattern("%Y-%m-%dT%H:%M:%S.%e %l %v");
      l->set_level(spdlog::level::info);
      return l;
    }();
    return *logger;
  }

}  // namespace waku
