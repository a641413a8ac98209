#include "rascore/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rascore/annotate.hpp"
#include "rascore/image_io.hpp"

namespace rascore {

PreprocessResult preprocess_image(const GrayRaster& raw, LimbKind limb,
                                  const PreprocessConfig& cfg) {
  PreprocessResult r;
  r.src_w = raw.width;
  r.src_h = raw.height;
  r.padded_w = cfg.target_w;
  r.padded_h = cfg.target_h;

  // Mirror resize_pad's geometry so truth can follow the image.
  if (raw.width == cfg.target_w && raw.height == cfg.target_h) {
    r.scaled_w = raw.width;
    r.scaled_h = raw.height;
  } else {
    const double s = std::min(static_cast<double>(cfg.target_h) / raw.height,
                              static_cast<double>(cfg.target_w) / raw.width);
    r.scaled_h = std::max(1, std::min(cfg.target_h, static_cast<int>(std::lround(raw.height * s))));
    r.scaled_w = std::max(1, std::min(cfg.target_w, static_cast<int>(std::lround(raw.width * s))));
  }
  r.off_y = (cfg.target_h - r.scaled_h) / 2;
  r.off_x = (cfg.target_w - r.scaled_w) / 2;

  GrayRaster padded = resize_pad(raw, cfg.target_h, cfg.target_w);
  GrayRaster cropped = crop_limb(padded, limb);
  r.cropped_h = cropped.height;
  r.gray = clahe(cropped, cfg.clahe);
  r.unit = normalize(r.gray);
  return r;
}

BBoxNorm map_box_raw_to_pre(const PreprocessResult& pre, const BBoxNorm& box) {
  BBoxNorm out;
  out.cx = (box.cx * pre.scaled_w + pre.off_x) / pre.padded_w;
  out.cy = (box.cy * pre.scaled_h + pre.off_y) / pre.cropped_h;
  out.w = box.w * pre.scaled_w / pre.padded_w;
  out.h = box.h * pre.scaled_h / pre.cropped_h;
  out.validate();
  return out;
}

BinaryMask transform_mask_raw_to_pre(const PreprocessResult& pre, const BinaryMask& mask) {
  if (mask.width != pre.src_w || mask.height != pre.src_h)
    throw InvalidInput("transform_mask_raw_to_pre: mask does not match the raw frame");
  BinaryMask out(pre.padded_w, pre.cropped_h);
  for (int y = 0; y < out.height; ++y) {
    const int cy = y - pre.off_y;
    if (cy < 0 || cy >= pre.scaled_h) continue;
    const int sy = std::min(pre.src_h - 1,
                            static_cast<int>((cy + 0.5) * pre.src_h / pre.scaled_h));
    for (int x = 0; x < out.width; ++x) {
      const int cx = x - pre.off_x;
      if (cx < 0 || cx >= pre.scaled_w) continue;
      const int sx = std::min(pre.src_w - 1,
                              static_cast<int>((cx + 0.5) * pre.src_w / pre.scaled_w));
      out.set(x, y, mask.at(sx, sy));
    }
  }
  return out;
}

JointCrop extract_crop(const UnitRaster& img, const BBoxNorm& box, double margin) {
  box.validate();
  const double side =
      std::max(box.w * img.width, box.h * img.height) * (1.0 + margin);
  if (side <= 0) throw InvalidInput("extract_crop: degenerate box");
  const double cx = box.cx * img.width, cy = box.cy * img.height;
  JointCrop crop{UnitRaster(kCropSize, kCropSize)};
  for (int y = 0; y < kCropSize; ++y) {
    const double fy = cy + ((y + 0.5) / kCropSize - 0.5) * side - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    const double wy = fy - y0;
    int y1 = std::clamp(y0 + 1, 0, img.height - 1);
    y0 = std::clamp(y0, 0, img.height - 1);
    for (int x = 0; x < kCropSize; ++x) {
      const double fx = cx + ((x + 0.5) / kCropSize - 0.5) * side - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      const double wx = fx - x0;
      int x1 = std::clamp(x0 + 1, 0, img.width - 1);
      x0 = std::clamp(x0, 0, img.width - 1);
      crop.image.at(x, y) = (1 - wy) * ((1 - wx) * img.at(x0, y0) + wx * img.at(x1, y0)) +
                            wy * ((1 - wx) * img.at(x0, y1) + wx * img.at(x1, y1));
    }
  }
  return crop;
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>& out) : out_(out) {
    last_ = std::chrono::steady_clock::now();
  }
  void mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.emplace_back(stage, std::chrono::duration<double, std::milli>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& out_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace

PipelineReport run_pipeline(const GrayRaster& raw, LimbKind limb, const std::string& image_id,
                            const ModelBundle& models, const PipelineOptions& opts) {
  if (models.hand != is_hand(limb))
    throw InvalidInput("run_pipeline: model bundle does not match the limb type");

  PipelineReport rep;
  rep.image_id = image_id;
  rep.limb = limb;
  StageTimer timer(rep.timings_ms);

  const PreprocessResult pre = preprocess_image(raw, limb, opts.preprocess);
  timer.mark("preprocess");

  BinaryMask mask = predict_mask(models.unet, pre.unit);
  const double total = static_cast<double>(mask.width) * mask.height;
  double coverage = mask.count() / total;
  if (coverage < opts.mask_min_coverage || coverage > opts.mask_max_coverage) {
    mask = extract_mask(pre.gray);  // throws "no limb found" on failure
    coverage = mask.count() / total;
    rep.mask_provenance = "fallback-entropy";
  } else {
    rep.mask_provenance = "unet";
  }
  rep.mask_coverage = coverage;
  timer.mark("mask");

  const UnitRaster masked = apply_mask(pre.unit, mask);
  timer.mark("apply_mask");

  const std::vector<Detection> dets = detect_joints(models.detector, masked, limb);
  timer.mark("detect");
  const auto identified = identify_joints(dets, limb);
  timer.mark("identify");

  std::vector<JointScoreRow> rows;
  for (const auto& [det, ident] : identified) {
    JointReport jr;
    jr.detection = det;
    jr.identity = ident;
    const JointCrop crop = extract_crop(masked, det.bbox, opts.crop_margin);
    jr.narrowing = score_joint(models.narrowing, crop);
    jr.erosion = score_joint(models.erosion, crop);
    rows.push_back({ident.label(), jr.narrowing.score, jr.erosion.score});
    rep.joints.push_back(std::move(jr));
  }
  timer.mark("score");

  rep.sheet =
      aggregate_totals(rows, models.narrowing.scale.classes, models.erosion.scale.classes);
  timer.mark("aggregate");
  return rep;
}

PipelineReport run_pipeline(const std::string& image_path, LimbKind limb,
                            const ModelBundle& models, const PipelineOptions& opts) {
  const GrayRaster raw = load_gray(image_path);
  const std::string id = std::filesystem::path(image_path).stem().string();
  return run_pipeline(raw, limb, id, models, opts);
}

std::vector<std::string> write_report(const PipelineReport& report, const GrayRaster& raw,
                                      const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  const std::string base = (fs::path(out_dir) / report.image_id).string();

  {
    DatasetRecord rec;
    // image_id convention: {patient_id}-{code}.
    const auto dash = report.image_id.rfind('-');
    rec.patient_id = dash == std::string::npos ? report.image_id : report.image_id.substr(0, dash);
    rec.limb = report.limb;
    for (const auto& j : report.joints)
      if (j.identity.identified())
        rec.joints[j.identity.label()] = {j.narrowing.score, j.erosion.score};
    write_scores_csv({rec}, base + "_scores.csv");
    written.push_back(base + "_scores.csv");
  }

  {
    std::ofstream det(base + "_detections.csv");
    if (!det) throw InvalidInput("write_report: cannot open detections CSV");
    det << "image_id,class,cx,cy,w,h,confidence,digit\n";
    for (const auto& j : report.joints)
      det << report.image_id << "," << joint_class_name(j.detection.joint_class) << ","
          << j.detection.bbox.cx << "," << j.detection.bbox.cy << "," << j.detection.bbox.w << ","
          << j.detection.bbox.h << "," << j.detection.confidence << "," << j.identity.digit
          << "\n";
    written.push_back(base + "_detections.csv");
  }

  {
    std::ofstream tot(base + "_totals.csv");
    if (!tot) throw InvalidInput("write_report: cannot open totals CSV");
    tot << "image_id,limb,mask_provenance,total_narrowing,total_erosion,overall_total\n";
    tot << report.image_id << "," << limb_code(report.limb) << "," << report.mask_provenance << ","
        << report.sheet.total_narrowing << "," << report.sheet.total_erosion << ","
        << report.sheet.overall_total << "\n";
    written.push_back(base + "_totals.csv");
  }

  {
    std::vector<AnnotationBox> boxes;
    for (const auto& j : report.joints) {
      AnnotationBox b;
      b.box = j.detection.bbox;
      b.text = j.identity.label() + " N" + std::to_string(j.narrowing.score) + " E" +
               std::to_string(j.erosion.score);
      boxes.push_back(std::move(b));
    }
    // Boxes live in the preprocessed frame; annotate a matching view.
    PreprocessConfig pc;
    const PreprocessResult pre = preprocess_image(raw, report.limb, pc);
    save_png(annotate_image(pre.gray, boxes), base + "_annotated.png");
    written.push_back(base + "_annotated.png");
  }

  {
    std::ofstream man(base + "_manifest.txt");
    for (const auto& w : written) man << fs::path(w).filename().string() << "\n";
    written.push_back(base + "_manifest.txt");
  }
  return written;
}

namespace {

bool sample_matches(const SynthSample& s, bool hand) { return is_hand(s.limb) == hand; }

}  // namespace

std::vector<MaskSample> make_mask_samples(const std::vector<SynthSample>& samples, bool hand,
                                          int size, const PreprocessConfig& cfg) {
  std::vector<MaskSample> out;
  for (const auto& s : samples) {
    if (!sample_matches(s, hand)) continue;
    const PreprocessResult pre = preprocess_image(s.image, s.limb, cfg);
    MaskSample ms;
    ms.image = resize_bilinear(pre.unit, size, size);
    ms.mask = resize_nearest(transform_mask_raw_to_pre(pre, s.silhouette), size, size);
    out.push_back(std::move(ms));
  }
  return out;
}

std::vector<DetectorSample> make_detector_samples(const std::vector<SynthSample>& samples,
                                                  bool hand, int input_size,
                                                  const PreprocessConfig& cfg) {
  std::vector<DetectorSample> out;
  for (const auto& s : samples) {
    if (!sample_matches(s, hand)) continue;
    const PreprocessResult pre = preprocess_image(s.image, s.limb, cfg);
    const UnitRaster masked = apply_mask(pre.unit, transform_mask_raw_to_pre(pre, s.silhouette));
    DetectorSample ds;
    ds.image = resize_bilinear(masked, input_size, input_size);
    for (const auto& j : s.joints)
      ds.boxes.push_back({map_box_raw_to_pre(pre, j.box), j.joint_class});
    out.push_back(std::move(ds));
  }
  return out;
}

std::vector<PretextSample> make_pretext_samples(const std::vector<SynthSample>& samples, bool hand,
                                                const PreprocessConfig& cfg, double margin) {
  std::vector<PretextSample> out;
  for (const auto& s : samples) {
    if (!sample_matches(s, hand) || s.joints.empty()) continue;
    const PreprocessResult pre = preprocess_image(s.image, s.limb, cfg);
    const UnitRaster masked = apply_mask(pre.unit, transform_mask_raw_to_pre(pre, s.silhouette));
    for (const auto& j : s.joints) {
      PretextSample ps;
      ps.crop = extract_crop(masked, map_box_raw_to_pre(pre, j.box), margin);
      ps.is_lower_row = j.joint_class == JointClass::PIP ? 0 : 1;
      out.push_back(std::move(ps));
    }
  }
  return out;
}

std::vector<ScoreSample> make_score_samples(const std::vector<SynthSample>& samples,
                                            const ScoreScale& scale, const PreprocessConfig& cfg,
                                            double margin) {
  std::vector<ScoreSample> out;
  for (const auto& s : samples) {
    if (!sample_matches(s, scale.hand) || s.joints.empty()) continue;
    const PreprocessResult pre = preprocess_image(s.image, s.limb, cfg);
    const UnitRaster masked = apply_mask(pre.unit, transform_mask_raw_to_pre(pre, s.silhouette));
    for (const auto& j : s.joints) {
      ScoreSample sc;
      sc.crop = extract_crop(masked, map_box_raw_to_pre(pre, j.box), margin);
      sc.score = scale.task == ScoreTask::Narrowing ? j.narrowing : j.erosion;
      out.push_back(std::move(sc));
    }
  }
  return out;
}

}  // namespace rascore
