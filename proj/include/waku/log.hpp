/**
 * Copyright 2026 The wakulite Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <spdlog/spdlog.h>

namespace waku {

  /// Shared stderr logger. Lines read `<timestamp> <level> peer=<id>
  /// event=<name> key=value...`.
  spdlog::logger &log();

}  // namespace waku
