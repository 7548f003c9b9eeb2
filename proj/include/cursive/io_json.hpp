#pragma once

#include <string>

#include <json.hpp>

#include "cursive/context_model.hpp"
#include "cursive/quality.hpp"
#include "cursive/segmentation.hpp"
#include "cursive/shape_stats.hpp"
#include "cursive/synth.hpp"

namespace cursive {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaTag = "cursive-cut/v1";

/// Pretty text with a trailing newline; key order as built.
std::string dump_json(const Json& j);
/// Parses text, SpecInvalid on malformed input.
Json parse_json(const std::string& text, const std::string& what);

Json point_json(const Point2<double>& p);
Point2<double> parse_point(const Json& j);
Json polyline_json(const Contour& c);

Json fracture_json(const Fracture& f);
Json quality_json(const QualityReport& q);
Json rule_json(const ElongationRule& r);
Json cuts_json(const CutPoints& c);
Json band_json(const CursiveBand& b);
Json joint_json(const JointResult& j);

Json ground_truth_json(const GroundTruth& g);

/// Letters in reading order: "beh,seen:medial" or the bare characters. A
/// missing position is inferred from the joining behaviour of neighbours.
std::vector<LetterId> parse_letters(const std::string& text, const RuleTables& rules);
Json letter_json(const LetterId& l);

SynthSpec parse_synth_spec(const Json& j);
Json synth_spec_json(const SynthSpec& s);

Json variability_json(const VariabilityReport& r);
VariabilityReport parse_variability(const Json& j);

Json frame_json(const DiacriticFrame& f);

}  // namespace cursive
