#include "rascore/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "rascore/image_io.hpp"

namespace rascore {

void SynthConfig::validate() const {
  if (hands < 0 || feet < 0 || negatives < 0 || hands + feet + negatives < 1)
    throw InvalidInput("SynthConfig: need at least one sample");
  if (width < 64 || height < 64) throw InvalidInput("SynthConfig: canvas too small");
  if (noise_density < 0 || noise_density > 0.05) throw InvalidInput("SynthConfig: bad noise density");
  if (gap_base_px <= 0 || gap_step_px <= 0 || notch_radius_px <= 0)
    throw InvalidInput("SynthConfig: rendering parameters must be positive");
  if (gap_base_px - 4 * gap_step_px < 1.0)
    throw InvalidInput("SynthConfig: gap would close before the top narrowing class");
}

namespace {

struct JointGeom {
  std::string label;
  JointClass cls;
  int digit;
  double cx, cy;  // normalized, right-limb orientation
};

double jit(std::mt19937_64& rng, double amp) {
  return std::uniform_real_distribution<double>(-amp, amp)(rng);
}

int sample_class(std::mt19937_64& rng, const std::vector<double>& weights) {
  std::discrete_distribution<int> d(weights.begin(), weights.end());
  return d(rng);
}

std::vector<double> narrowing_weights() { return {0.45, 0.20, 0.15, 0.12, 0.08}; }

std::vector<double> erosion_weights(bool hand) {
  if (hand) return {0.42, 0.18, 0.12, 0.10, 0.10, 0.08};
  return {0.35, 0.065, 0.065, 0.065, 0.065, 0.065, 0.065, 0.065, 0.065, 0.065, 0.065};
}

void fill_capsule(BinaryMask& m, double x, double y0, double y1, double half_w) {
  // Vertical capsule: rectangle plus rounded caps.
  const int W = m.width, H = m.height;
  const int xa = std::max(0, static_cast<int>(std::floor((x - half_w) * W)));
  const int xb = std::min(W - 1, static_cast<int>(std::ceil((x + half_w) * W)));
  const int ya = std::max(0, static_cast<int>(std::floor((y0 - half_w) * H)));
  const int yb = std::min(H - 1, static_cast<int>(std::ceil((y1 + half_w) * H)));
  const double cxp = x * W, hw = half_w * W;
  const double y0p = y0 * H, y1p = y1 * H;
  for (int yy = ya; yy <= yb; ++yy) {
    for (int xx = xa; xx <= xb; ++xx) {
      const double px = xx + 0.5, py = yy + 0.5;
      const double dy = py < y0p ? y0p - py : (py > y1p ? py - y1p : 0.0);
      const double dx = px - cxp;
      if (dx * dx + dy * dy <= hw * hw) m.set(xx, yy, true);
    }
  }
}

void fill_ellipse(BinaryMask& m, double cx, double cy, double rx, double ry) {
  const int W = m.width, H = m.height;
  const double cxp = cx * W, cyp = cy * H, rxp = rx * W, ryp = ry * H;
  const int xa = std::max(0, static_cast<int>(cxp - rxp) - 1);
  const int xb = std::min(W - 1, static_cast<int>(cxp + rxp) + 1);
  const int ya = std::max(0, static_cast<int>(cyp - ryp) - 1);
  const int yb = std::min(H - 1, static_cast<int>(cyp + ryp) + 1);
  for (int yy = ya; yy <= yb; ++yy) {
    for (int xx = xa; xx <= xb; ++xx) {
      const double nx = (xx + 0.5 - cxp) / rxp, ny = (yy + 0.5 - cyp) / ryp;
      if (nx * nx + ny * ny <= 1.0) m.set(xx, yy, true);
    }
  }
}

std::uint8_t level(double v) { return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0)); }

void paint_capsule(GrayRaster& img, const BinaryMask& sil, double x, double y0, double y1,
                   double half_w, double base, std::mt19937_64& rng) {
  BinaryMask cap(img.width, img.height);
  fill_capsule(cap, x, y0, y1, half_w);
  for (int yy = 0; yy < img.height; ++yy)
    for (int xx = 0; xx < img.width; ++xx)
      if (cap.at(xx, yy) && sil.at(xx, yy)) img.at(xx, yy) = level(base + jit(rng, 15));
}

void paint_disk(GrayRaster& img, const BinaryMask& sil, double cxp, double cyp, double r,
                double value, std::mt19937_64& rng) {
  const int xa = std::max(0, static_cast<int>(cxp - r) - 1);
  const int xb = std::min(img.width - 1, static_cast<int>(cxp + r) + 1);
  const int ya = std::max(0, static_cast<int>(cyp - r) - 1);
  const int yb = std::min(img.height - 1, static_cast<int>(cyp + r) + 1);
  for (int yy = ya; yy <= yb; ++yy)
    for (int xx = xa; xx <= xb; ++xx) {
      const double dx = xx + 0.5 - cxp, dy = yy + 0.5 - cyp;
      if (dx * dx + dy * dy <= r * r && sil.at(xx, yy)) img.at(xx, yy) = level(value + jit(rng, 6));
    }
}

struct LimbDraft {
  BinaryMask silhouette;
  std::vector<JointGeom> joints;
};

LimbDraft draft_hand(int W, int H, std::mt19937_64& rng) {
  LimbDraft d{BinaryMask(W, H), {}};
  const double base_cx[5] = {0.16, 0.33, 0.50, 0.67, 0.84};
  for (int f = 0; f < 5; ++f) {
    const bool thumb = f == 0;
    const double cx = base_cx[f] + jit(rng, 0.012);
    const double pip_cy = (thumb ? 0.46 : 0.36 + 0.03 * std::abs(f - 2)) + jit(rng, 0.012);
    const double mcp_cy = (thumb ? 0.68 : 0.60 + 0.02 * std::abs(f - 2)) + jit(rng, 0.010);
    const double tip = pip_cy - (thumb ? 0.12 : 0.16);
    fill_capsule(d.silhouette, cx, tip, mcp_cy + 0.08, thumb ? 0.058 : 0.048);
    d.joints.push_back({"PIP" + std::to_string(f + 1), JointClass::PIP, f + 1, cx, pip_cy});
    d.joints.push_back({"MCP" + std::to_string(f + 1), JointClass::MCP, f + 1, cx, mcp_cy});
  }
  fill_ellipse(d.silhouette, 0.5 + jit(rng, 0.01), 0.80, 0.37, 0.15);
  // Wrist stub, mostly removed later by crop_limb.
  fill_capsule(d.silhouette, 0.5, 0.88, 0.99, 0.14);
  return d;
}

LimbDraft draft_foot(int W, int H, std::mt19937_64& rng) {
  LimbDraft d{BinaryMask(W, H), {}};
  const double base_cx[5] = {0.18, 0.34, 0.50, 0.66, 0.82};
  for (int t = 0; t < 5; ++t) {
    const bool great = t == 0;
    const double cx = base_cx[t] + jit(rng, 0.012);
    const double mtp_cy = 0.40 + 0.035 * t + jit(rng, 0.012);
    const double tip = mtp_cy - (great ? 0.26 : 0.14);
    fill_capsule(d.silhouette, cx, tip, mtp_cy + 0.16, great ? 0.068 : 0.048);
    d.joints.push_back({"MTP" + std::to_string(t + 1), JointClass::MTP, t + 1, cx, mtp_cy});
    if (great)
      d.joints.push_back({"PIP1", JointClass::PIP, 1, cx, 0.22 + jit(rng, 0.010)});
  }
  fill_ellipse(d.silhouette, 0.52 + jit(rng, 0.01), 0.66, 0.35, 0.26);
  fill_capsule(d.silhouette, 0.55, 0.80, 0.97, 0.16);
  return d;
}

void mirror_horizontal(GrayRaster& img) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width / 2; ++x)
      std::swap(img.at(x, y), img.at(img.width - 1 - x, y));
}

void mirror_horizontal(BinaryMask& m) {
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width / 2; ++x) {
      const bool t = m.at(x, y);
      m.set(x, y, m.at(m.width - 1 - x, y));
      m.set(m.width - 1 - x, y, t);
    }
}

SynthSample render_sample(const SynthConfig& cfg, LimbKind limb, bool negative,
                          const std::string& pid, std::mt19937_64& rng) {
  const int W = cfg.width, H = cfg.height;
  SynthSample s;
  s.patient_id = pid;
  s.limb = limb;
  s.image = GrayRaster(W, H, 0);
  s.silhouette = BinaryMask(W, H);

  // Background speckle (kept off the limb below).
  std::vector<std::pair<double, double>> specks;
  const int n_specks = static_cast<int>(cfg.noise_density * W * H);
  for (int i = 0; i < n_specks; ++i)
    specks.emplace_back(std::uniform_real_distribution<double>(0, W)(rng),
                        std::uniform_real_distribution<double>(0, H)(rng));

  if (!negative) {
    const bool hand = is_hand(limb);
    LimbDraft draft = hand ? draft_hand(W, H, rng) : draft_foot(W, H, rng);
    s.silhouette = draft.silhouette;

    // Soft tissue with texture, then brighter bone shafts.
    const double tissue = 90 + jit(rng, 8);
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        if (s.silhouette.at(x, y)) s.image.at(x, y) = level(tissue + jit(rng, 20));
    for (const auto& j : draft.joints)
      paint_capsule(s.image, s.silhouette, j.cx, j.cy - 0.10, j.cy + 0.10, 0.024, 150, rng);

    const auto nw = narrowing_weights();
    const auto ew = erosion_weights(hand);
    for (const auto& j : draft.joints) {
      TruthJoint tj;
      tj.label = j.label;
      tj.joint_class = j.cls;
      tj.digit = j.digit;
      tj.narrowing = sample_class(rng, nw);
      tj.erosion = sample_class(rng, ew);

      const double cxp = j.cx * W, cyp = j.cy * H;
      const double bw = 0.050 * W;   // bone-end half width
      const double hb = 0.040 * H;   // bone-end height
      tj.gap_px = cfg.gap_base_px - tj.narrowing * cfg.gap_step_px;
      const double g2 = tj.gap_px / 2;

      auto block = [&](double ytop, double ybot) {
        const int xa = std::max(0, static_cast<int>(cxp - bw));
        const int xb = std::min(W - 1, static_cast<int>(cxp + bw));
        const int ya = std::max(0, static_cast<int>(ytop));
        const int yb = std::min(H - 1, static_cast<int>(ybot));
        for (int yy = ya; yy <= yb; ++yy)
          for (int xx = xa; xx <= xb; ++xx)
            if (s.silhouette.at(xx, yy)) s.image.at(xx, yy) = level(205 + jit(rng, 10));
      };
      auto band = [&](double ytop, double ybot) {
        const int xa = std::max(0, static_cast<int>(cxp - bw));
        const int xb = std::min(W - 1, static_cast<int>(cxp + bw));
        const int ya = std::max(0, static_cast<int>(ytop));
        const int yb = std::min(H - 1, static_cast<int>(ybot));
        for (int yy = ya; yy <= yb; ++yy)
          for (int xx = xa; xx <= xb; ++xx)
            if (s.silhouette.at(xx, yy)) s.image.at(xx, yy) = level(45 + jit(rng, 8));
      };
      block(cyp - g2 - hb, cyp - g2 - 1);
      band(cyp - g2, cyp + g2);
      block(cyp + g2 + 1, cyp + g2 + hb);

      // Erosion notches carved into the gap-facing bone margins,
      // alternating upper/lower, spread across the width.
      const int upper_n = (tj.erosion + 1) / 2, lower_n = tj.erosion / 2;
      auto notches = [&](int n, double edge_y) {
        for (int i = 0; i < n; ++i) {
          const double nx = cxp - bw + (i + 0.5) * (2 * bw / n);
          paint_disk(s.image, s.silhouette, nx, edge_y, cfg.notch_radius_px, 45, rng);
        }
      };
      if (upper_n) notches(upper_n, cyp - g2 - 2);
      if (lower_n) notches(lower_n, cyp + g2 + 2);

      tj.box.cx = j.cx;
      tj.box.cy = j.cy;
      tj.box.w = (2 * bw + 8) / W;
      tj.box.h = (tj.gap_px + 2 * hb + 8) / H;
      tj.box.validate();
      s.joints.push_back(tj);
    }
  }

  for (auto& [sx, sy] : specks) {
    const int xi = std::min(W - 1, static_cast<int>(sx));
    const int yi = std::min(H - 1, static_cast<int>(sy));
    if (s.silhouette.at(xi, yi)) continue;
    const double v = std::uniform_real_distribution<double>(140, 255)(rng);
    const double r = std::uniform_real_distribution<double>(0.8, 1.8)(rng);
    const int xa = std::max(0, static_cast<int>(sx - r)), xb = std::min(W - 1, static_cast<int>(sx + r));
    const int ya = std::max(0, static_cast<int>(sy - r)), yb = std::min(H - 1, static_cast<int>(sy + r));
    for (int yy = ya; yy <= yb; ++yy)
      for (int xx = xa; xx <= xb; ++xx) {
        const double dx = xx + 0.5 - sx, dy = yy + 0.5 - sy;
        if (dx * dx + dy * dy <= r * r && !s.silhouette.at(xx, yy))
          s.image.at(xx, yy) = level(v);
      }
  }

  if (is_left(limb)) {
    mirror_horizontal(s.image);
    mirror_horizontal(s.silhouette);
    for (auto& j : s.joints) j.box.cx = 1.0 - j.box.cx;
  }
  return s;
}

}  // namespace

std::vector<SynthSample> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SynthSample> out;
  int pid = 0;
  auto next_pid = [&] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%04d", ++pid);
    return std::string(buf);
  };
  auto make = [&](LimbKind limb, bool negative) {
    // Per-sample generator so sample i is independent of the counts
    // of the other limb types.
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (pid + 1)));
    out.push_back(render_sample(cfg, limb, negative, next_pid(), rng));
  };
  for (int i = 0; i < cfg.hands; ++i) make(i % 2 ? LimbKind::HandLeft : LimbKind::HandRight, false);
  for (int i = 0; i < cfg.feet; ++i) make(i % 2 ? LimbKind::FootLeft : LimbKind::FootRight, false);
  for (int i = 0; i < cfg.negatives; ++i)
    make(i % 2 ? LimbKind::FootRight : LimbKind::HandRight, true);
  return out;
}

DatasetRecord record_of(const SynthSample& sample) {
  DatasetRecord rec;
  rec.patient_id = sample.patient_id;
  rec.limb = sample.limb;
  for (const auto& j : sample.joints) rec.joints[j.label] = {j.narrowing, j.erosion};
  return rec;
}

void write_synthetic(const std::vector<SynthSample>& samples, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "masks");

  std::vector<DatasetRecord> records;
  std::ofstream boxes((fs::path(out_dir) / "boxes.csv").string());
  if (!boxes) throw InvalidInput("write_synthetic: cannot open boxes.csv");
  boxes << "image_id,label,class,digit,cx,cy,w,h,narrowing,erosion\n";
  for (const auto& s : samples) {
    const std::string id = s.patient_id + "-" + limb_code(s.limb);
    save_png(s.image, (fs::path(out_dir) / "images" / (id + ".png")).string());
    save_mask_png(s.silhouette, (fs::path(out_dir) / "masks" / (id + ".png")).string());
    for (const auto& j : s.joints)
      boxes << id << "," << j.label << "," << joint_class_name(j.joint_class) << "," << j.digit
            << "," << j.box.cx << "," << j.box.cy << "," << j.box.w << "," << j.box.h << ","
            << j.narrowing << "," << j.erosion << "\n";
    if (!s.joints.empty()) records.push_back(record_of(s));
  }
  write_scores_csv(records, (fs::path(out_dir) / "scores.csv").string());
}

std::vector<SynthSample> read_synthetic(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::exists(root / "images")) throw InvalidInput("read_synthetic: no images/ in " + dir);

  // Truth boxes keyed by image id.
  std::map<std::string, std::vector<TruthJoint>> joints;
  {
    std::ifstream in((root / "boxes.csv").string());
    if (!in) throw InvalidInput("read_synthetic: cannot open boxes.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = split_csv_line(line);
      if (f.size() != 10) throw InvalidInput("read_synthetic: malformed boxes.csv row");
      TruthJoint j;
      j.label = f[1];
      j.joint_class = joint_class_from_name(f[2]);
      j.digit = std::stoi(f[3]);
      j.box = {std::stod(f[4]), std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
      j.narrowing = std::stoi(f[8]);
      j.erosion = std::stoi(f[9]);
      joints[f[0]].push_back(j);
    }
  }

  std::vector<SynthSample> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(root / "images"))
    if (e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    const auto dash = id.rfind('-');
    if (dash == std::string::npos) throw InvalidInput("read_synthetic: bad image name " + id);
    SynthSample s;
    s.patient_id = id.substr(0, dash);
    s.limb = limb_from_code(id.substr(dash + 1));
    s.image = load_gray(f.string());
    s.silhouette = load_mask((root / "masks" / (id + ".png")).string());
    if (auto it = joints.find(id); it != joints.end()) s.joints = it->second;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rascore
