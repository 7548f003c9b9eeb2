#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "cursive/io_json.hpp"
#include "cursive/segmentation.hpp"

namespace cursive {

/// Tunables shared by every subcommand. Sources, later wins: defaults, the
/// file named by CURSIVE_CUT_CONFIG, --config, explicit flags.
struct RunConfig {
  double curvature_threshold = 0.15;  // 1/dots
  double fracture_thickness = 0.25;   // dots
  double entropy_threshold = 1.5;     // bits
  double linear_deviation = 0.2;      // dots
  double classifier_curvature = 0.3;  // 1/dots
  double svg_tolerance = 0.25;        // dots
  int landmarks = 32;
  int bins = 16;
  std::uint64_t seed = 0;
  std::string rules;     // empty: embedded Naskh tables
  std::string out = ".";

  /// InvalidArgument unless thresholds > 0, landmarks >= 3, bins >= 2.
  void validate() const;
  SegmentationConfig segmentation() const;
};

/// Overlays the keys present in `j` onto `base`; unknown keys are SpecInvalid.
RunConfig merge_run_config(RunConfig base, const Json& j);
Json run_config_json(const RunConfig& c);

/// Entry point of the `cursive-cut` tool. Returns 0 on success, 1 on a usage
/// error, 2 when processing fails; the error name goes to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cursive
