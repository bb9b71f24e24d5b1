#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cvqss/optimizer.hpp"
#include "cvqss/postprocess.hpp"
#include "cvqss/sweep.hpp"
#include "cvqss/types.hpp"

namespace cvqss {

/// Parsed JSON configuration. Unknown keys anywhere are rejected so that a
/// mistyped physics parameter can never silently fall back to a default.
struct Config {
  SystemParams params;
  std::optional<NetworkLayout> layout;
  std::optional<double> va;
  OptimizeOptions optimizer;
  std::optional<SweepSpec> sweep;  ///< params/optimizer copied from the root sections
  std::size_t pulses = 1000000;
  PostprocessOptions postprocess;

  static Config from_file(const std::string& path);
  static Config from_json_text(const std::string& text);

  const NetworkLayout& require_layout() const;
};

}  // namespace cvqss
