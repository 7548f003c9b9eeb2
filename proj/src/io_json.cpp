#include "cursive/io_json.hpp"

#include <cctype>

namespace cursive {

namespace {

Json bbox_json(const std::array<int, 4>& b) { return Json::array({b[0], b[1], b[2], b[3]}); }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::vector<std::string> utf8_chars(const std::string& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : 4;
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, what + ": " + e.what());
  }
}

Json point_json(const Point2<double>& p) { return Json::array({p.x(), p.y()}); }

Point2<double> parse_point(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::SpecInvalid, "a point is [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json polyline_json(const Contour& c) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < c.size(); ++i) a.push_back(point_json(c.points.col(i)));
  return a;
}

Json fracture_json(const Fracture& f) { return Json{{"arc_dots", f.arc}, {"gap_dots", f.gap}}; }

Json quality_json(const QualityReport& q) {
  Json fr = Json::array();
  for (const auto& f : q.fractures) fr.push_back(fracture_json(f));
  Json pv = Json::array();
  for (const auto& p : q.portion_distance_violations)
    pv.push_back({{"expected_dots", p.expected}, {"measured_dots", p.measured}, {"deviation_dots", p.deviation()}});
  return Json{{"fractures", fr},
              {"regularity_entropy_bits", q.regularity_entropy},
              {"regular", q.regular},
              {"portion_distance_violations", pv}};
}

Json rule_json(const ElongationRule& r) {
  return Json{{"kind", elongation_name(r.kind)},
              {"default_dots", r.default_dots},
              {"max_dots", r.max_dots},
              {"from_source", r.from_source}};
}

Json cuts_json(const CutPoints& c) {
  return Json{{"input_second_dots", c.input_second},  {"output_first_dots", c.output_first},
              {"input_point", point_json(c.input_point)}, {"output_point", point_json(c.output_point)},
              {"input_normal", point_json(c.input_normal)}, {"output_normal", point_json(c.output_normal)},
              {"input_fallback", c.input_fallback},     {"output_fallback", c.output_fallback}};
}

Json band_json(const CursiveBand& b) {
  Json ann = Json::array();
  for (auto a : b.annotations) ann.push_back(annotation_name(a));
  Json an = Json::array();
  for (const auto& f : b.anomalies) an.push_back(fracture_json(f));
  return Json{{"shape", shape_name(b.shape)},
              {"length_dots", b.length_dots},
              {"arc_length_dots", b.arc_length_dots()},
              {"mean_thickness_dots", b.thickness.mean()},
              {"columns", Json::array({b.column_begin, b.column_end})},
              {"nominal", b.nominal},
              {"cleaned", b.cleaned},
              {"annotations", ann},
              {"anomalies", an},
              {"path", polyline_json(b.path)}};
}

Json joint_json(const JointResult& j) {
  Json splits = Json::array();
  for (double s : j.decomposition.splits) splits.push_back(s);
  Json out{{"index", j.index}, {"subword", j.subword}};
  if (j.pair.first) out["first"] = letter_json(*j.pair.first);
  if (j.pair.second) out["second"] = letter_json(*j.pair.second);
  out["rule"] = j.rule ? rule_json(*j.rule) : Json(nullptr);
  out["band"] = band_json(j.band);
  out["splits_dots"] = splits;
  out["cuts"] = cuts_json(j.pair.cuts);
  out["common_pixels"] = j.pair.common.foreground_count();
  out["quality"] = quality_json(j.quality);
  return out;
}

Json ground_truth_json(const GroundTruth& g) {
  Json joints = Json::array();
  for (const auto& j : g.joints) {
    Json peaks = Json::array();
    for (double p : j.curvature_peaks) peaks.push_back(p);
    Json fr = Json::array();
    for (const auto& f : j.fractures) fr.push_back(fracture_json(f));
    joints.push_back({{"shape", shape_name(j.shape)},
                      {"stacked", j.stacked},
                      {"length_dots", j.length_dots},
                      {"arc_length_dots", j.arc_length_dots},
                      {"x_right", j.x_right},
                      {"x_left", j.x_left},
                      {"amplitude_dots", j.amplitude_dots},
                      {"curvature_peaks_dots", peaks},
                      {"input_arc_dots", j.input_arc},
                      {"output_arc_dots", j.output_arc},
                      {"input_point", point_json(j.input_point)},
                      {"output_point", point_json(j.output_point)},
                      {"fractures", fr}});
  }
  Json letters = Json::array();
  for (const auto& l : g.letters)
    letters.push_back({{"kind", archetype_name(l.kind)},
                       {"input_point", point_json(l.input_point)},
                       {"baseline_y", l.baseline_y},
                       {"bbox", bbox_json(l.bbox)},
                       {"frame", {{"origin", point_json(l.frame_origin)}, {"unit", point_json(l.frame_unit)}}}});
  Json marks = Json::array();
  for (const auto& m : g.marks)
    marks.push_back({{"letter", m.letter},
                     {"kind", m.kind == MarkKind::dot ? "dot" : "fatha"},
                     {"center", point_json(m.center)},
                     {"x_units", m.x_units},
                     {"y_units", m.y_units}});
  return Json{{"schema", kSchemaTag},  {"kind", "synth_truth"},      {"ink_count", g.ink_count},
              {"pen_width_px", g.pen_width_px}, {"baseline_y", g.baseline_y}, {"tremor_dots", g.tremor_dots},
              {"joints", joints},      {"letters", letters},         {"marks", marks}};
}

std::vector<LetterId> parse_letters(const std::string& text, const RuleTables& rules) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!trim(cur).empty()) tokens.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) tokens.push_back(trim(cur));
  if (tokens.empty()) throw Error(ErrorCode::InvalidArgument, "no letters given");

  std::vector<Letter> codes;
  std::vector<std::optional<Position>> pos;
  for (const auto& t : tokens) {
    const auto colon = t.find(':');
    const std::string name = t.substr(0, colon);
    std::optional<Position> p;
    if (colon != std::string::npos) p = parse_position(t.substr(colon + 1));
    try {
      codes.push_back(parse_letter(name));
      pos.push_back(p);
    } catch (const Error&) {
      // A run of letter characters written together.
      const auto chars = utf8_chars(name);
      if (chars.size() < 2 || p) throw;
      for (const auto& ch : chars) {
        codes.push_back(parse_letter(ch));
        pos.push_back(std::nullopt);
      }
    }
  }
  std::vector<LetterId> out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (pos[i]) {
      out.push_back({codes[i], *pos[i]});
      continue;
    }
    const bool from_prev = i > 0 && !rules.non_joining(codes[i - 1]) &&
                           (!pos[i - 1] || *pos[i - 1] == Position::initial || *pos[i - 1] == Position::medial);
    const bool to_next = i + 1 < codes.size() && !rules.non_joining(codes[i]) &&
                         (!pos[i + 1] || *pos[i + 1] == Position::medial || *pos[i + 1] == Position::final);
    const Position p = from_prev ? (to_next ? Position::medial : Position::final)
                                 : (to_next ? Position::initial : Position::isolated);
    out.push_back({codes[i], p});
  }
  return out;
}

Json letter_json(const LetterId& l) {
  return Json{{"letter", letter_name(l.code)}, {"char", letter_utf8(l.code)}, {"position", position_name(l.position)}};
}

SynthSpec parse_synth_spec(const Json& j) {
  try {
    SynthSpec s;
    s.pen_width_px = get_or(j, "pen_width_px", 10.0);
    s.margin_dots = get_or(j, "margin_dots", 3.0);
    s.seed = get_or<std::uint64_t>(j, "seed", 0);
    for (const auto& l : j.at("letters")) {
      LetterPrimitive p;
      p.kind = parse_archetype(l.at("kind").get<std::string>());
      p.height_dots = get_or(l, "height_dots", 0.0);
      p.width_dots = get_or(l, "width_dots", 0.0);
      s.letters.push_back(p);
    }
    if (j.contains("joints"))
      for (const auto& js : j.at("joints")) {
        JointSpec p;
        p.shape = parse_shape(js.at("shape").get<std::string>());
        p.length_dots = get_or(js, "length_dots", 2.0);
        p.tremor_dots = get_or(js, "tremor_dots", 0.0);
        p.amplitude_dots = get_or(js, "amplitude_dots", 0.0);
        p.warp = get_or(js, "warp", 0.0);
        p.taper = get_or(js, "taper", 1.0);
        if (js.contains("fractures"))
          for (const auto& f : js.at("fractures"))
            p.fractures.push_back({static_cast<int>(s.joints.size()), f.at("arc_dots").get<double>(),
                                   get_or(f, "gap_px", 2.0)});
        s.joints.push_back(p);
      }
    if (j.contains("marks"))
      for (const auto& m : j.at("marks")) {
        MarkSpec p;
        p.letter = m.at("letter").get<int>();
        const auto kind = get_or<std::string>(m, "kind", "dot");
        if (kind == "dot") p.kind = MarkKind::dot;
        else if (kind == "fatha") p.kind = MarkKind::fatha;
        else throw Error(ErrorCode::SpecInvalid, "unknown mark kind '" + kind + "'");
        p.x_units = get_or(m, "x_units", 0.5);
        p.y_units = get_or(m, "y_units", 1.2);
        s.marks.push_back(p);
      }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, std::string("synth spec: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SpecInvalid) throw;
    throw Error(ErrorCode::SpecInvalid, std::string("synth spec: ") + e.what());
  }
}

Json synth_spec_json(const SynthSpec& s) {
  Json letters = Json::array();
  for (const auto& l : s.letters)
    letters.push_back({{"kind", archetype_name(l.kind)}, {"height_dots", l.height_dots}, {"width_dots", l.width_dots}});
  Json joints = Json::array();
  for (const auto& js : s.joints) {
    Json fr = Json::array();
    for (const auto& f : js.fractures) fr.push_back({{"arc_dots", f.arc_dots}, {"gap_px", f.gap_px}});
    joints.push_back({{"shape", shape_name(js.shape)},
                      {"length_dots", js.length_dots},
                      {"tremor_dots", js.tremor_dots},
                      {"amplitude_dots", js.amplitude_dots},
                      {"warp", js.warp},
                      {"taper", js.taper},
                      {"fractures", fr}});
  }
  Json marks = Json::array();
  for (const auto& m : s.marks)
    marks.push_back({{"letter", m.letter},
                     {"kind", m.kind == MarkKind::dot ? "dot" : "fatha"},
                     {"x_units", m.x_units},
                     {"y_units", m.y_units}});
  return Json{{"schema", kSchemaTag},       {"kind", "synth_spec"}, {"pen_width_px", s.pen_width_px},
              {"margin_dots", s.margin_dots}, {"seed", s.seed},       {"letters", letters},
              {"joints", joints},           {"marks", marks}};
}

Json variability_json(const VariabilityReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"shape", shape_name(row.shape)},
                    {"size_variability", row.size_variability},
                    {"thickness_variability", row.thickness_variability},
                    {"n_instances", row.n_instances ? Json(*row.n_instances) : Json(nullptr)}});
  return Json{{"schema", kSchemaTag}, {"kind", "variability"}, {"rows", rows}};
}

VariabilityReport parse_variability(const Json& j) {
  try {
    if (j.at("schema").get<std::string>() != kSchemaTag || j.at("kind").get<std::string>() != "variability")
      throw Error(ErrorCode::SpecInvalid, "not a variability report");
    VariabilityReport r;
    for (const auto& row : j.at("rows")) {
      VariabilityRow v;
      v.shape = parse_shape(row.at("shape").get<std::string>());
      v.size_variability = row.at("size_variability").get<double>();
      v.thickness_variability = row.at("thickness_variability").get<double>();
      if (!row.at("n_instances").is_null()) v.n_instances = row.at("n_instances").get<int>();
      if (v.size_variability < 0 || v.thickness_variability < 0)
        throw Error(ErrorCode::SpecInvalid, "variability percentages must be >= 0");
      r.rows.push_back(v);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, std::string("variability report: ") + e.what());
  }
}

Json frame_json(const DiacriticFrame& f) {
  return Json{{"origin", point_json(f.origin)},
              {"x_axis", point_json(f.x_axis)},
              {"y_axis", point_json(f.y_axis)},
              {"unit", point_json(f.unit)}};
}

}  // namespace cursive
