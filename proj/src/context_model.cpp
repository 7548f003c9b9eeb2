#include "cursive/context_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rules_naskh_embed.hpp"

namespace cursive {

namespace {

struct LetterInfo {
  std::string_view name;
  std::string_view utf8;
};

constexpr std::array<LetterInfo, kLetterCount> kLetters{{
    {"alef", "ا"}, {"beh", "ب"},   {"teh", "ت"},  {"theh", "ث"},  {"jeem", "ج"}, {"hah", "ح"},
    {"khah", "خ"}, {"dal", "د"},   {"thal", "ذ"}, {"reh", "ر"},   {"zain", "ز"}, {"seen", "س"},
    {"sheen", "ش"}, {"sad", "ص"},  {"dad", "ض"},  {"tah", "ط"},   {"zah", "ظ"},  {"ain", "ع"},
    {"ghain", "غ"}, {"feh", "ف"},  {"qaf", "ق"},  {"kaf", "ك"},   {"lam", "ل"},  {"meem", "م"},
    {"noon", "ن"}, {"heh", "ه"},   {"waw", "و"},  {"yeh", "ي"},
}};

std::size_t idx(Letter l) { return static_cast<std::size_t>(l); }

LetterRef parse_ref(std::string_view s) {
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']')
    return {true, parse_letter(s.substr(1, s.size() - 2))};
  return {false, parse_letter(s)};
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ElongationRule rule_from(const nlohmann::json& j, ElongationKind kind, bool sourced) {
  ElongationRule r;
  r.kind = kind;
  r.default_dots = j.at("default_dots").get<double>();
  r.max_dots = j.at("max_dots").get<double>();
  r.from_source = sourced;
  if (r.default_dots < 0 || r.default_dots > 3 || r.max_dots < 3 || r.max_dots > 13)
    throw Error(ErrorCode::SpecInvalid, "elongation defaults must satisfy 0 <= default <= 3 <= max <= 13");
  return r;
}

}  // namespace

std::string_view letter_name(Letter l) { return kLetters[idx(l)].name; }
std::string letter_utf8(Letter l) { return std::string(kLetters[idx(l)].utf8); }

std::string_view position_name(Position p) {
  switch (p) {
    case Position::isolated: return "isolated";
    case Position::initial: return "initial";
    case Position::medial: return "medial";
    case Position::final: return "final";
  }
  return "isolated";
}

Position parse_position(std::string_view s) {
  for (auto p : {Position::isolated, Position::initial, Position::medial, Position::final})
    if (position_name(p) == s) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown letter position '" + std::string(s) + "'");
}

Letter parse_letter(std::string_view s) {
  for (std::size_t i = 0; i < kLetterCount; ++i)
    if (kLetters[i].name == s || kLetters[i].utf8 == s) return static_cast<Letter>(i);
  throw Error(ErrorCode::UnknownLetter, "unknown letter '" + std::string(s) + "'");
}

std::string ref_text(const LetterRef& r) {
  return r.family ? "[" + letter_utf8(r.letter) + "]" : letter_utf8(r.letter);
}

std::string_view elongation_name(ElongationKind k) {
  switch (k) {
    case ElongationKind::forbidden: return "forbidden";
    case ElongationKind::recommended: return "recommended";
    case ElongationKind::allowed: return "allowed";
  }
  return "allowed";
}

const RuleTables& RuleTables::naskh() {
  static const RuleTables tables = from_json(nlohmann::json::parse(kEmbeddedNaskhRules));
  return tables;
}

RuleTables RuleTables::from_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, path.string() + ": " + e.what());
  }
  return from_json(j);
}

RuleTables RuleTables::from_json(const nlohmann::json& j) {
  RuleTables t;
  t.source_ = j;
  try {
    for (std::size_t i = 0; i < kLetterCount; ++i) t.head_[i] = static_cast<Letter>(i);
    std::array<int, kLetterCount> seen{};
    for (const auto& [head, members] : j.at("families").items()) {
      const Letter h = parse_letter(head);
      for (const auto& m : members) {
        const Letter l = parse_letter(m.get<std::string>());
        if (seen[idx(l)]++) throw Error(ErrorCode::SpecInvalid, "letter listed twice in families");
        t.head_[idx(l)] = h;
        t.grouped_[idx(l)] = true;
      }
    }
    for (const auto& s : j.at("singletons")) {
      const Letter l = parse_letter(s.get<std::string>());
      if (seen[idx(l)]++) throw Error(ErrorCode::SpecInvalid, "singleton also listed in a family");
    }
    for (std::size_t i = 0; i < kLetterCount; ++i)
      if (!seen[i])
        throw Error(ErrorCode::SpecInvalid,
                    "letter " + std::string(kLetters[i].name) + " has no family or singleton entry");
    for (const auto& s : j.at("non_joining")) t.non_joining_[idx(parse_letter(s.get<std::string>()))] = true;
    for (const auto& s : j.at("toothed").at("letters")) t.toothed_.push_back(parse_ref(s.get<std::string>()));
    const auto& el = j.at("elongation");
    for (const auto& f : el.at("forbidden"))
      t.forbidden_.emplace_back(parse_ref(f.at("first").get<std::string>()),
                                parse_ref(f.at("second").get<std::string>()));
    t.recommended_ = rule_from(el.at("recommended"), ElongationKind::recommended, true);
    t.allowed_ = rule_from(el.at("allowed"), ElongationKind::allowed, false);
    for (const auto& e : j.at("interweaving")) {
      std::vector<LetterRef> partners;
      for (const auto& p : e.at("partners")) partners.push_back(parse_ref(p.get<std::string>()));
      t.interweaving_.emplace_back(parse_ref(e.at("letter").get<std::string>()), std::move(partners));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, std::string("rule table: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SpecInvalid) throw;
    throw Error(ErrorCode::SpecInvalid, std::string("rule table: ") + e.what());
  }
  return t;
}

std::string RuleTables::letter_family(LetterId l) const {
  if (!in_family(l.code)) return letter_utf8(l.code);
  return ref_text({true, family_head(l.code)});
}

bool RuleTables::matches(const LetterRef& ref, Letter l) const {
  if (ref.family) return family_head(l) == family_head(ref.letter);
  return ref.letter == l;
}

bool RuleTables::toothed(Letter l) const {
  return std::any_of(toothed_.begin(), toothed_.end(),
                     [&](const LetterRef& r) { return matches(r, l); });
}

bool RuleTables::admits(LetterId l) const {
  if (!non_joining(l.code)) return true;
  return l.position == Position::isolated || l.position == Position::final;
}

bool RuleTables::joins_forward(LetterId first) const {
  return !non_joining(first.code) &&
         (first.position == Position::initial || first.position == Position::medial);
}

ElongationRule RuleTables::elongation_rule(LetterId first, LetterId second) const {
  if (non_joining(first.code))
    throw Error(ErrorCode::NoJoin,
                std::string(letter_name(first.code)) + " does not connect to the next letter");
  for (const auto& [a, b] : forbidden_)
    if (matches(a, first.code) && matches(b, second.code))
      return {ElongationKind::forbidden, 0, 0, true};
  if (toothed(first.code) && toothed(second.code)) return recommended_;
  return allowed_;
}

std::vector<LetterRef> RuleTables::interweaving_partners(LetterId l) const {
  if (l.position != Position::final && l.position != Position::isolated) return {};
  for (const auto& [key, partners] : interweaving_)
    if (matches(key, l.code)) return partners;
  return {};
}

// --- shape classifier --------------------------------------------------------

ShapeClass classify_cursive_shape(const CursiveBand& band, const ClassifierConfig& cfg) {
  if (band.path.size() < 5)
    throw Error(ErrorCode::BandTooShort, "band centreline has fewer than 5 samples");
  const double dot = band.dot_px;
  Contour q = scaled(band.path, 1.0 / dot);
  q.closed = false;
  const double base = band.baseline_y / dot;
  const auto cum = cumulative_length(q);
  const double total = cum.back();
  if (!(total > 0)) throw Error(ErrorCode::BandTooShort, "band centreline has zero length");

  // Laid connection: most of the band runs well below the baseline.
  double below = 0;
  for (Eigen::Index i = 0; i + 1 < q.size(); ++i) {
    const double mid_y = 0.5 * (q.points(1, i) + q.points(1, i + 1));
    if (mid_y - base > cfg.laying_depth) below += cum[static_cast<std::size_t>(i) + 1] - cum[static_cast<std::size_t>(i)];
  }
  if (below > cfg.laying_fraction * total) return ShapeClass::laying;

  // Signed deviation from the chord, positive downward.
  const Point2<double> a = q.points.col(0);
  const Point2<double> b = q.points.col(q.size() - 1);
  Point2<double> chord = b - a;
  if (chord.norm() < 1e-9) chord = Point2<double>(-1, 0);
  chord.normalize();
  Point2<double> n(-chord.y(), chord.x());
  if (n.y() < 0) n = -n;
  double down = 0, up = 0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double d = (Point2<double>(q.points.col(i)) - a).dot(n);
    down = std::max(down, d);
    up = std::max(up, -d);
  }
  if (std::max(down, up) < cfg.linear_deviation) return ShapeClass::linear;
  if (down >= cfg.linear_deviation && up < cfg.linear_deviation) return ShapeClass::concave;

  const auto prof = curvature_profile(q, cfg.window);
  double kmax = 0, kmin = 0;
  const double margin = std::min(0.5, 0.25 * total);
  for (std::size_t i = 0; i < prof.kappa.size(); ++i) {
    if (prof.arc[i] < margin || prof.arc[i] > total - margin) continue;
    kmax = std::max(kmax, prof.kappa[i]);
    kmin = std::min(kmin, prof.kappa[i]);
  }
  const bool sign_change = kmax > 0.5 * cfg.curvature && kmin < -0.5 * cfg.curvature;
  if (sign_change && std::max(kmax, -kmin) > cfg.curvature) return ShapeClass::curvilinear_with_curvature;
  return ShapeClass::curvilinear_no_curvature;
}

}  // namespace cursive
