#pragma once

#include <optional>
#include <vector>

#include "cursive/band.hpp"
#include "cursive/context_model.hpp"
#include "cursive/quality.hpp"
#include "cursive/raster.hpp"

namespace cursive {

struct SegmentationConfig {
  double kappa_threshold = 0.15;  // 1/dots
  double peak_prominence = 0.075; // 1/dots above the surrounding |kappa| minima
  double min_separation = 0.5;    // dots between split positions and between cuts
  double end_margin = 0.5;        // dots: no splits this close to a band end
  double smoothing = 0.75;        // dots, Gaussian sigma on the raw centreline
  double detection_smoothing = 1.0;  // dots, total sigma of the centreline peaks are detected on
  double band_min_thickness = 0.5;
  double band_max_thickness = 1.5;
  double band_above = 1.5;        // dots above the baseline a band run may sit
  double band_below = 2.5;        // dots below (laid connections)
  double gap_merge = 1.0;         // dots of empty/odd columns bridged inside a band
  double min_band = 0.25;         // dots; shorter runs of band columns are ignored
  double cut_halfwidth = 0.75;    // px: cut line thickness on each side
  QualityConfig quality;
  ClassifierConfig classifier;
};

struct CutPoints {
  double input_second = 0;  // dots along the band path from its right end
  double output_first = 0;
  Point2<double> input_point = Point2<double>::Zero();
  Point2<double> output_point = Point2<double>::Zero();
  Point2<double> input_normal = Point2<double>(0, 1);
  Point2<double> output_normal = Point2<double>(0, 1);
  bool input_fallback = false;
  bool output_fallback = false;
};

struct Decomposition {
  std::vector<double> splits;                    // dots, increasing
  std::vector<std::pair<double, double>> segments;  // [begin, end] in dots
};

struct GraphemePair {
  BinaryRaster left;    // the letter written second (left in the image)
  BinaryRaster right;   // the letter written first
  BinaryRaster common;  // shared region, present in both
  std::vector<Contour> left_contour;
  std::vector<Contour> right_contour;
  CutPoints cuts;
  int joint = 0;
  std::optional<LetterId> first;
  std::optional<LetterId> second;
};

struct JointResult {
  int index = 0;    // joint index in the word, right to left
  int subword = 0;
  CursiveBand band;
  QualityReport quality;
  Decomposition decomposition;
  std::optional<ElongationRule> rule;
  GraphemePair pair;
};

struct WordContext {
  std::vector<LetterId> letters;  // reading order
  std::optional<double> baseline_y;
  /// Expected attachment distance per joint (dots), for the portion check.
  std::vector<std::optional<double>> expected_dots;
  const RuleTables* rules = nullptr;  // nullptr: embedded Naskh tables
};

struct SegmentationResult {
  double dot_px = 0;
  double baseline_y = 0;
  std::vector<JointResult> joints;
  std::vector<BinaryRaster> graphemes;               // one per letter, reading order
  std::vector<std::optional<Point2<double>>> inputs; // input point per letter when known
  std::vector<Component> isolated;                   // marks and single-letter subwords
};

/// Writing line. A rough row comes from the longest horizontal ink run; the
/// median right-end height of the bands found around it refines it.
double estimate_baseline(const BinaryRaster& img);

/// All band candidates of a subword, right to left (no count check).
std::vector<CursiveBand> find_band_candidates(const BinaryRaster& subword, double baseline_y,
                                              const SegmentationConfig& cfg = {});

/// Exactly n_letters - 1 bands, right to left, or BandCountMismatch.
std::vector<CursiveBand> locate_cursive_bands(const BinaryRaster& subword, int n_letters,
                                              std::optional<double> baseline_y = std::nullopt,
                                              const SegmentationConfig& cfg = {});

/// Bridges fractures in the thickness profile and annotates context
/// anomalies. `rule` is the elongation rule of the joint, when known.
CursiveBand mask_anomalies(const CursiveBand& band, const QualityReport& report,
                           const std::optional<ElongationRule>& rule = std::nullopt,
                           double tolerance = 0.5);

Decomposition decompose_band(const CursiveBand& band, double kappa_threshold = 0.15,
                             const SegmentationConfig& cfg = {});

CutPoints select_cut_points(const CursiveBand& band, const Decomposition& segments,
                            const SegmentationConfig& cfg = {});

GraphemePair extract_and_merge(const BinaryRaster& subword, const CursiveBand& band,
                               const CutPoints& cuts, const SegmentationConfig& cfg = {});

/// Per-letter graphemes of one subword from its joint cuts: the interior
/// letter k is left(k-1) intersected with right(k).
std::vector<BinaryRaster> chain_graphemes(const std::vector<GraphemePair>& pairs);

SegmentationResult segment_word(const BinaryRaster& img, const WordContext& ctx,
                                const SegmentationConfig& cfg = {});

}  // namespace cursive
