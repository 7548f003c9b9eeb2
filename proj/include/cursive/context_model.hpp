#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cursive/band.hpp"

namespace cursive {

/// The 28 base letters, in Unicode order.
enum class Letter : std::uint8_t {
  alef, beh, teh, theh, jeem, hah, khah, dal, thal, reh, zain, seen, sheen, sad,
  dad, tah, zah, ain, ghain, feh, qaf, kaf, lam, meem, noon, heh, waw, yeh,
};
inline constexpr std::size_t kLetterCount = 28;

enum class Position { isolated, initial, medial, final };

struct LetterId {
  Letter code = Letter::alef;
  Position position = Position::isolated;
  friend bool operator==(const LetterId&, const LetterId&) = default;
};

std::string_view letter_name(Letter l);     // ASCII name, e.g. "beh"
std::string letter_utf8(Letter l);           // the Arabic character
std::string_view position_name(Position p);
Position parse_position(std::string_view s);
/// Accepts an ASCII name or a single Arabic character.
Letter parse_letter(std::string_view s);

/// A letter or a whole family (named by its head letter).
struct LetterRef {
  bool family = false;
  Letter letter = Letter::alef;
  friend bool operator==(const LetterRef&, const LetterRef&) = default;
};
std::string ref_text(const LetterRef& r);  // "[ب]" or "ل"

enum class ElongationKind { forbidden, recommended, allowed };
std::string_view elongation_name(ElongationKind k);

struct ElongationRule {
  ElongationKind kind = ElongationKind::allowed;
  double default_dots = 2;
  double max_dots = 13;
  bool from_source = false;  // false for defaults of unlisted pairs
};

/// Naskh rule tables: families, non-joiners, toothed letters, elongation
/// contexts and interweaving pairs. Loaded from JSON; the embedded default
/// is data/rules_naskh.json.
class RuleTables {
 public:
  static const RuleTables& naskh();
  static RuleTables from_json(const nlohmann::json& j);
  static RuleTables from_file(const std::filesystem::path& path);

  const nlohmann::json& source() const { return source_; }

  /// Head letter of the family, or the letter itself for singletons.
  Letter family_head(Letter l) const { return head_[static_cast<std::size_t>(l)]; }
  bool in_family(Letter l) const { return grouped_[static_cast<std::size_t>(l)]; }
  /// "[ب]" for family members, the bare character for singletons.
  std::string letter_family(LetterId l) const;
  bool matches(const LetterRef& ref, Letter l) const;

  bool non_joining(Letter l) const { return non_joining_[static_cast<std::size_t>(l)]; }
  bool toothed(Letter l) const;
  /// Whether the letter may take this position (non-joiners: isolated/final only).
  bool admits(LetterId l) const;
  /// True when `first` connects to the following letter.
  bool joins_forward(LetterId first) const;

  /// Rule for the cursive area between `first` and the letter written after
  /// it. NoJoin when `first` does not connect forward.
  ElongationRule elongation_rule(LetterId first, LetterId second) const;

  /// Letters that may interweave with `l` in final or isolated position.
  std::vector<LetterRef> interweaving_partners(LetterId l) const;

 private:
  std::array<Letter, kLetterCount> head_{};
  std::array<bool, kLetterCount> grouped_{};
  std::array<bool, kLetterCount> non_joining_{};
  std::vector<LetterRef> toothed_;
  std::vector<std::pair<LetterRef, LetterRef>> forbidden_;
  ElongationRule recommended_{ElongationKind::recommended, 3, 13, true};
  ElongationRule allowed_{ElongationKind::allowed, 2, 13, false};
  std::vector<std::pair<LetterRef, std::vector<LetterRef>>> interweaving_;
  nlohmann::json source_;
};

struct ClassifierConfig {
  double linear_deviation = 0.2;  // dots, max chord deviation of a straight band
  double curvature = 0.3;         // 1/dots, peak |kappa| of an S-shaped band
  double laying_depth = 1.0;      // dots below the baseline
  double laying_fraction = 0.5;   // of the band length
  double window = 1.0;            // dots, curvature window
};

/// Five-way shape decision on the band centreline (pixel coordinates, dot
/// unit and baseline taken from the band).
ShapeClass classify_cursive_shape(const CursiveBand& band, const ClassifierConfig& cfg = {});

}  // namespace cursive
