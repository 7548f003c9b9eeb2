#include "cursive/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cursive/bezier_fit.hpp"
#include "cursive/quality.hpp"
#include "cursive/tracing.hpp"

namespace fs = std::filesystem;

namespace cursive {

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnreadableFile, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every output lands directly inside the output directory, named from
// the input stem; no path component of the input survives.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {}

  fs::path write(const std::string& name, const std::string& bytes) {
    if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == ".." || name.empty())
      throw Error(ErrorCode::InvalidArgument, "bad output name '" + name + "'");
    fs::create_directories(dir_);
    const fs::path p = dir_ / name;
    std::ofstream o(p, std::ios::binary | std::ios::trunc);
    if (!o) throw Error(ErrorCode::UnreadableFile, "cannot write " + p.string());
    o.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    written.push_back(p);
    return p;
  }
  fs::path write(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    return write(name, std::string(bytes.begin(), bytes.end()));
  }

  std::vector<fs::path> written;

 private:
  fs::path dir_;
};

RuleTables load_rules(const RunConfig& cfg) {
  return cfg.rules.empty() ? RuleTables::naskh() : RuleTables::from_file(cfg.rules);
}

std::vector<std::optional<double>> parse_expected(const std::string& text) {
  std::vector<std::optional<double>> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item == "-") {
      out.emplace_back();
      continue;
    }
    try {
      std::size_t used = 0;
      out.emplace_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad expected distance '" + item + "'");
    }
  }
  return out;
}

struct JointView {
  int index = 0;
  CursiveBand band;
  QualityReport quality;
};

// Bands of an image: through the full segmentation when the letters are
// known, otherwise every band candidate of every subword body.
std::vector<JointView> analyse_joints(const BinaryRaster& img, const std::string& letters,
                                      std::optional<double> baseline, const RunConfig& cfg, double& dot_out,
                                      double& baseline_out) {
  const SegmentationConfig scfg = cfg.segmentation();
  std::vector<JointView> out;
  if (!letters.empty()) {
    const RuleTables rules = load_rules(cfg);
    WordContext ctx;
    ctx.letters = parse_letters(letters, rules);
    ctx.baseline_y = baseline;
    ctx.rules = &rules;
    auto res = segment_word(img, ctx, scfg);
    dot_out = res.dot_px;
    baseline_out = res.baseline_y;
    for (auto& j : res.joints) out.push_back({j.index, std::move(j.band), std::move(j.quality)});
    return out;
  }
  if (img.foreground_count() == 0) throw Error(ErrorCode::NoForeground, "image has no ink");
  BinaryRaster work = img;
  dot_out = img.dot_px() ? *img.dot_px() : estimate_dot_unit(img);
  work.set_dot_px(dot_out);
  BinaryRaster bodies(img.width(), img.height(), dot_out);
  std::vector<Component> parts;
  for (auto& c : connected_components(work, 8)) {
    if (c.role_hint == RoleHint::dot_mark) continue;
    for (const auto& p : c.pixels) bodies.set(p.x, p.y);
    parts.push_back(std::move(c));
  }
  if (parts.empty()) throw Error(ErrorCode::NoForeground, "no subword bodies");
  baseline_out = baseline ? *baseline : estimate_baseline(bodies);
  int index = 0;
  for (const auto& c : parts) {
    const BinaryRaster sub = c.to_raster(img.width(), img.height(), dot_out);
    for (auto& b : find_band_candidates(sub, baseline_out, scfg)) {
      try {
        JointView v;
        v.index = index;
        v.quality = assess_band(b, sub, std::nullopt, scfg.quality);
        v.band = mask_anomalies(b, v.quality);
        v.band.shape = classify_cursive_shape(v.band, scfg.classifier);
        out.push_back(std::move(v));
      } catch (const Error& e) {
        throw e.with_joint(index);
      }
      ++index;
    }
  }
  return out;
}

Json grapheme_record(const std::string& pbm, const std::string& svg, int index, const LetterId& l,
                     const BinaryRaster& g, const std::optional<Point2<double>>& input, double baseline, double dot) {
  Json j{{"schema", kSchemaTag}, {"kind", "grapheme"}, {"index", index}};
  j["letter"] = letter_json(l);
  j["pbm"] = pbm;
  j["svg"] = svg;
  j["width"] = g.width();
  j["height"] = g.height();
  const auto bb = ink_bbox(g);
  j["bbox"] = bb ? Json::array({(*bb)[0], (*bb)[1], (*bb)[2], (*bb)[3]}) : Json(nullptr);
  j["pixels"] = g.foreground_count();
  j["input_point"] = input ? point_json(*input) : Json(nullptr);
  j["baseline_y"] = baseline;
  j["dot_px"] = dot;
  return j;
}

int cmd_segment(const std::string& image, const std::string& letters, std::optional<double> baseline,
                const std::string& expected, const RunConfig& cfg, std::ostream& out) {
  const RuleTables rules = load_rules(cfg);
  const BinaryRaster img = load_raster(image);
  WordContext ctx;
  ctx.letters = parse_letters(letters, rules);
  ctx.baseline_y = baseline;
  ctx.expected_dots = parse_expected(expected);
  ctx.rules = &rules;
  const SegmentationResult res = segment_word(img, ctx, cfg.segmentation());
  const std::string stem = fs::path(image).stem().string();
  OutputDir dir(cfg.out);
  Json letters_json = Json::array();
  for (std::size_t i = 0; i < res.graphemes.size(); ++i) {
    const auto& g = res.graphemes[i];
    const std::string base = stem + ".letter" + std::to_string(i);
    dir.write(base + ".pbm", encode_pbm(g));
    dir.write(base + ".svg", grapheme_svg(trace_boundary(g), g.width(), g.height(), cfg.svg_tolerance * res.dot_px));
    Json rec = grapheme_record(base + ".pbm", base + ".svg", static_cast<int>(i), ctx.letters[i], g,
                               res.inputs[i], res.baseline_y, res.dot_px);
    dir.write(base + ".json", dump_json(rec));
    letters_json.push_back(rec);
  }
  Json joints = Json::array();
  for (const auto& j : res.joints) joints.push_back(joint_json(j));
  Json marks = Json::array();
  for (const auto& c : res.isolated)
    marks.push_back({{"bbox", Json::array({c.bbox[0], c.bbox[1], c.bbox[2], c.bbox[3]})},
                     {"area", c.area},
                     {"role", role_name(c.role_hint)}});
  Json doc{{"schema", kSchemaTag},
           {"kind", "segmentation"},
           {"image", fs::path(image).filename().string()},
           {"width", img.width()},
           {"height", img.height()},
           {"dot_px", res.dot_px},
           {"baseline_y", res.baseline_y},
           {"letters", letters_json},
           {"joints", joints},
           {"isolated", marks}};
  dir.write(stem + ".joints.json", dump_json(doc));
  for (const auto& p : dir.written) out << p.string() << "\n";
  return 0;
}

int cmd_quality(const std::string& image, const std::string& letters, std::optional<double> baseline,
                const RunConfig& cfg, bool classify_only, std::ostream& out) {
  const BinaryRaster img = load_raster(image);
  double dot = 0, base = 0;
  const auto joints = analyse_joints(img, letters, baseline, cfg, dot, base);
  Json arr = Json::array();
  for (const auto& j : joints) {
    if (classify_only) {
      arr.push_back({{"index", j.index},
                     {"shape", shape_name(j.band.shape)},
                     {"length_dots", j.band.length_dots},
                     {"nominal", j.band.nominal}});
    } else {
      Json ann = Json::array();
      for (auto a : j.band.annotations) ann.push_back(annotation_name(a));
      arr.push_back({{"index", j.index},
                     {"shape", shape_name(j.band.shape)},
                     {"length_dots", j.band.length_dots},
                     {"mean_thickness_dots", j.band.thickness.mean()},
                     {"annotations", ann},
                     {"quality", quality_json(j.quality)}});
    }
  }
  Json doc{{"schema", kSchemaTag},
           {"kind", classify_only ? "classification" : "quality"},
           {"image", fs::path(image).filename().string()},
           {"dot_px", dot},
           {"baseline_y", base},
           {"joints", arr}};
  out << dump_json(doc);
  return 0;
}

int cmd_synth(const std::string& spec_path, std::optional<std::uint64_t> seed, const RunConfig& cfg,
              bool config_seed, std::ostream& out) {
  const Json j = parse_json(read_file(spec_path), spec_path);
  SynthSpec spec = parse_synth_spec(j);
  if (seed) spec.seed = *seed;
  else if (!j.contains("seed") && config_seed) spec.seed = cfg.seed;
  const auto [img, truth] = synth_subword(spec);
  const std::string stem = fs::path(spec_path).stem().string();
  OutputDir dir(cfg.out);
  dir.write(stem + ".pbm", encode_pbm(img));
  Json t = ground_truth_json(truth);
  t["seed"] = spec.seed;
  dir.write(stem + ".truth.json", dump_json(t));
  for (const auto& p : dir.written) out << p.string() << "\n";
  return 0;
}

std::vector<fs::path> sorted_entries(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::UnreadableFile, dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

LandmarkShape<double> landmarks_from_image(const fs::path& p, int k) {
  const BinaryRaster img = load_raster(p);
  const auto contours = trace_boundary(img);
  const Contour* best = nullptr;
  for (const auto& c : contours)
    if (signed_area(c) > 0 && (!best || signed_area(c) > signed_area(*best))) best = &c;
  if (!best) throw Error(ErrorCode::NoForeground, p.filename().string() + " has no outline");
  double sigma = 1.0;
  try {
    sigma = 0.25 * estimate_dot_unit(img);
  } catch (const Error&) {
    // ambiguous pen width: keep a one-pixel smoothing
  }
  return resample_arclength(smoothed_outline(*best, sigma), k);
}

LandmarkShape<double> landmarks_from_json(const fs::path& p) {
  const Json j = parse_json(read_file(p), p.string());
  if (!j.contains("landmarks") || !j["landmarks"].is_array())
    throw Error(ErrorCode::SpecInvalid, p.filename().string() + ": missing \"landmarks\"");
  const auto& a = j["landmarks"];
  LandmarkShape<double> s(2, static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) s.col(static_cast<Eigen::Index>(i)) = parse_point(a[i]);
  return s;
}

int cmd_mean_shape(const std::string& dir_in, double tol, int max_iter, const RunConfig& cfg, std::ostream& out) {
  std::vector<LandmarkShape<double>> shapes;
  std::vector<std::string> names;
  for (const auto& p : sorted_entries(dir_in)) {
    const std::string ext = p.extension().string();
    if (ext == ".json") shapes.push_back(landmarks_from_json(p));
    else if (ext == ".pbm" || ext == ".pgm") shapes.push_back(landmarks_from_image(p, cfg.landmarks));
    else continue;
    names.push_back(p.filename().string());
  }
  const auto r = procrustes_mean(shapes, tol, max_iter);
  Json lm = Json::array();
  for (Eigen::Index i = 0; i < r.mean.cols(); ++i) lm.push_back(point_json(r.mean.col(i)));
  Json dist = Json::array();
  for (std::size_t i = 0; i < shapes.size(); ++i)
    dist.push_back({{"file", names[i]}, {"procrustes_distance", procrustes_distance(r.mean, shapes[i])}});
  Json doc{{"schema", kSchemaTag}, {"kind", "mean_shape"},    {"k", r.mean.cols()},
           {"n_shapes", shapes.size()}, {"iterations", r.iterations}, {"converged", r.converged},
           {"landmarks", lm},        {"distances", dist}};
  OutputDir dir(cfg.out);
  dir.write("mean_shape.json", dump_json(doc));
  std::string pts;
  char buf[64];
  for (Eigen::Index i = 0; i < r.mean.cols(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.6f,%.6f", i ? " " : "", r.mean(0, i), r.mean(1, i));
    pts += buf;
  }
  dir.write("mean_shape.svg",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"-1 -1 2 2\">\n"
            "  <polygon fill=\"none\" stroke=\"black\" stroke-width=\"0.01\" points=\"" +
                pts + "\"/>\n</svg>\n");
  for (const auto& p : dir.written) out << p.string() << "\n";
  return 0;
}

int cmd_variability(const std::string& dir_in, std::ostream& out, std::ostream& err) {
  std::vector<VariabilitySample> samples;
  for (const auto& p : sorted_entries(dir_in)) {
    if (p.extension() != ".json") continue;
    const Json j = parse_json(read_file(p), p.string());
    const std::string kind = j.value("kind", "");
    try {
      if (kind == "segmentation") {
        for (const auto& jt : j.at("joints")) {
          const auto& b = jt.at("band");
          if (b.at("nominal").get<bool>()) continue;
          samples.push_back({parse_shape(b.at("shape").get<std::string>()), b.at("length_dots").get<double>(),
                             b.at("mean_thickness_dots").get<double>()});
        }
      } else if (kind == "variability_samples") {
        for (const auto& s : j.at("samples"))
          samples.push_back({parse_shape(s.at("shape").get<std::string>()), s.at("length_dots").get<double>(),
                             s.at("thickness_dots").get<double>()});
      } else {
        err << "skipping " << p.filename().string() << ": kind '" << kind << "' carries no bands\n";
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SpecInvalid, p.filename().string() + ": " + e.what());
    }
  }
  out << dump_json(variability_json(variability_report(samples)));
  return 0;
}

int cmd_diacritics(const std::string& image, const std::string& base_path, std::ostream& out) {
  const BinaryRaster img = load_raster(image);
  const Json rec = parse_json(read_file(base_path), base_path);
  std::optional<Point2<double>> input;
  double baseline = 0;
  fs::path pbm;
  try {
    if (!rec.at("input_point").is_null()) input = parse_point(rec.at("input_point"));
    baseline = rec.at("baseline_y").get<double>();
    pbm = fs::path(base_path).parent_path() / rec.at("pbm").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, base_path + ": " + e.what());
  }
  BinaryRaster base = load_raster(pbm);
  if (rec.contains("dot_px") && rec["dot_px"].is_number()) base.set_dot_px(rec["dot_px"].get<double>());
  if (base.width() != img.width() || base.height() != img.height())
    throw Error(ErrorCode::InvalidArgument, "base grapheme and image differ in size");
  const DiacriticFrame frame = diacritic_frame(base, input, baseline);
  Json marks = Json::array();
  for (const auto& c : connected_components(img, 8)) {
    const bool touches = std::any_of(c.pixels.begin(), c.pixels.end(), [&](const Pixel& p) { return base.at(p.x, p.y); });
    if (touches) continue;
    const DiacriticCoords d = diacritic_coords(frame, c);
    marks.push_back({{"bbox", Json::array({c.bbox[0], c.bbox[1], c.bbox[2], c.bbox[3]})},
                     {"area", c.area},
                     {"x_units", d.x},
                     {"y_units", d.y},
                     {"extent_units", d.extent}});
  }
  Json doc{{"schema", kSchemaTag},
           {"kind", "diacritics"},
           {"image", fs::path(image).filename().string()},
           {"frame", frame_json(frame)},
           {"marks", marks}};
  out << dump_json(doc);
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be > 0");
  };
  positive(curvature_threshold, "curvature_threshold");
  positive(fracture_thickness, "fracture_thickness");
  positive(entropy_threshold, "entropy_threshold");
  positive(linear_deviation, "linear_deviation");
  positive(classifier_curvature, "classifier_curvature");
  positive(svg_tolerance, "svg_tolerance");
  if (landmarks < 3) throw Error(ErrorCode::InvalidArgument, "landmarks must be >= 3");
  if (bins < 2) throw Error(ErrorCode::InvalidArgument, "bins must be >= 2");
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "output directory is empty");
}

SegmentationConfig RunConfig::segmentation() const {
  SegmentationConfig s;
  s.kappa_threshold = curvature_threshold;
  s.quality.fracture_thickness = fracture_thickness;
  s.quality.entropy_threshold = entropy_threshold;
  s.quality.bins = bins;
  s.classifier.linear_deviation = linear_deviation;
  s.classifier.curvature = classifier_curvature;
  return s;
}

RunConfig merge_run_config(RunConfig c, const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SpecInvalid, "run config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "schema" || key == "kind") continue;
      if (key == "curvature_threshold") c.curvature_threshold = v.get<double>();
      else if (key == "fracture_thickness") c.fracture_thickness = v.get<double>();
      else if (key == "entropy_threshold") c.entropy_threshold = v.get<double>();
      else if (key == "linear_deviation") c.linear_deviation = v.get<double>();
      else if (key == "classifier_curvature") c.classifier_curvature = v.get<double>();
      else if (key == "svg_tolerance") c.svg_tolerance = v.get<double>();
      else if (key == "landmarks") c.landmarks = v.get<int>();
      else if (key == "bins") c.bins = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "rules") c.rules = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else throw Error(ErrorCode::SpecInvalid, "unknown run config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, std::string("run config: ") + e.what());
  }
  return c;
}

Json run_config_json(const RunConfig& c) {
  return Json{{"schema", kSchemaTag},
              {"kind", "run_config"},
              {"curvature_threshold", c.curvature_threshold},
              {"fracture_thickness", c.fracture_thickness},
              {"entropy_threshold", c.entropy_threshold},
              {"linear_deviation", c.linear_deviation},
              {"classifier_curvature", c.classifier_curvature},
              {"svg_tolerance", c.svg_tolerance},
              {"landmarks", c.landmarks},
              {"bins", c.bins},
              {"seed", c.seed},
              {"rules", c.rules},
              {"out", c.out}};
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation of cursive Arabic subwords into letter graphemes", "cursive-cut"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir, rules_path, letters, expected;
  std::uint64_t seed = 0;
  double baseline = 0;
  app.add_option("--config", config_path, "Run configuration JSON");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--rules", rules_path, "Rule table JSON (default: embedded Naskh tables)");
  auto* seed_opt = app.add_option("--seed", seed, "Generator seed");

  std::string image, base_path, spec_path, dir_in;
  double tol = 1e-8;
  int max_iter = 100;

  auto* seg = app.add_subcommand("segment", "Cut a subword image into letter graphemes");
  seg->add_option("image", image, "PBM/PGM image")->required();
  seg->add_option("--letters", letters, "Letters in reading order, e.g. beh,seen:medial")->required();
  auto* seg_base = seg->add_option("--baseline", baseline, "Baseline row (px)");
  seg->add_option("--expected", expected, "Expected attachment distance per joint (dots), comma separated");

  auto* qual = app.add_subcommand("quality", "Fractures, regularity and portion checks per joint");
  qual->add_option("image", image, "PBM/PGM image")->required();
  qual->add_option("--letters", letters, "Letters in reading order");
  auto* qual_base = qual->add_option("--baseline", baseline, "Baseline row (px)");

  auto* cls = app.add_subcommand("classify", "Shape class of every joint");
  cls->add_option("image", image, "PBM/PGM image")->required();
  cls->add_option("--letters", letters, "Letters in reading order");
  auto* cls_base = cls->add_option("--baseline", baseline, "Baseline row (px)");

  auto* syn = app.add_subcommand("synth", "Render a synthetic subword with ground truth");
  syn->add_option("spec", spec_path, "Synthesis spec JSON")->required();

  auto* mean = app.add_subcommand("mean-shape", "Procrustes mean of landmark shapes in a directory");
  mean->add_option("dir", dir_in, "Directory of landmark JSON or PBM outlines")->required();
  mean->add_option("--tol", tol, "Convergence tolerance");
  mean->add_option("--max-iter", max_iter, "Iteration cap");

  auto* var = app.add_subcommand("variability", "Size and thickness variability per shape class");
  var->add_option("dir", dir_in, "Directory of segmentation or sample JSON")->required();

  auto* dia = app.add_subcommand("diacritics", "Mark coordinates in the base letter frame");
  dia->add_option("image", image, "PBM/PGM image with base letter and marks")->required();
  dia->add_option("--base", base_path, "Grapheme JSON of the base letter")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  RunConfig cfg;
  try {
    if (const char* env = std::getenv("CURSIVE_CUT_CONFIG"); env && *env)
      cfg = merge_run_config(cfg, parse_json(read_file(env), env));
    if (!config_path.empty()) cfg = merge_run_config(cfg, parse_json(read_file(config_path), config_path));
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!rules_path.empty()) cfg.rules = rules_path;
    if (seed_opt->count()) cfg.seed = seed;
    cfg.validate();
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }

  try {
    if (*seg) return cmd_segment(image, letters, seg_base->count() ? std::optional<double>(baseline) : std::nullopt,
                                 expected, cfg, out);
    if (*qual)
      return cmd_quality(image, letters, qual_base->count() ? std::optional<double>(baseline) : std::nullopt, cfg,
                         false, out);
    if (*cls)
      return cmd_quality(image, letters, cls_base->count() ? std::optional<double>(baseline) : std::nullopt, cfg,
                         true, out);
    if (*syn)
      return cmd_synth(spec_path, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, cfg, true,
                       out);
    if (*mean) return cmd_mean_shape(dir_in, tol, max_iter, cfg, out);
    if (*var) return cmd_variability(dir_in, out, err);
    if (*dia) return cmd_diacritics(image, base_path, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "UnreadableFile: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cursive
