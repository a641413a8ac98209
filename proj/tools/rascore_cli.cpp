// Command-line surface for the joint-damage scoring pipeline.
//
// Subcommands: synth, preprocess, mask, train (unet|detector|scorer),
// score, eval. Common flags: --config (key=value lines), --seed,
// --limb, --out, --deterministic.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rascore/checkpoint.hpp"
#include "rascore/dataset.hpp"
#include "rascore/image_io.hpp"
#include "rascore/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rascore;

namespace {

using ConfigMap = std::map<std::string, std::string>;

ConfigMap load_config(const std::string& path) {
  ConfigMap cfg;
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    const auto stop = line.find_last_not_of(" \t\r");
    line = line.substr(start, stop - start + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(n) + ": expected key=value");
    cfg[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return cfg;
}

// Config values act as defaults; explicit command-line flags win.
template <typename T>
void apply_cfg(const ConfigMap& cfg, const std::string& key, T& value) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return;
  if constexpr (std::is_same_v<T, std::string>) {
    value = it->second;
  } else if constexpr (std::is_same_v<T, bool>) {
    value = it->second == "1" || it->second == "true";
  } else if constexpr (std::is_integral_v<T>) {
    value = static_cast<T>(std::stoll(it->second));
  } else {
    value = static_cast<T>(std::stod(it->second));
  }
}

bool parse_limb_type(const std::string& s) {
  if (s == "hand") return true;
  if (s == "foot") return false;
  throw InvalidInput("limb type must be 'hand' or 'foot', got '" + s + "'");
}

std::string type_name(bool hand) { return hand ? "hand" : "foot"; }

ModelBundle load_bundle(const std::string& dir, bool hand) {
  const std::string t = type_name(hand);
  auto p = [&](const std::string& stem) {
    const std::string path = (fs::path(dir) / (stem + "_" + t + ".ckpt")).string();
    if (!fs::exists(path)) throw InvalidInput("missing checkpoint: " + path);
    return path;
  };
  ModelBundle b;
  b.hand = hand;
  b.unet = unet_from_checkpoint(load_checkpoint(p("unet")));
  b.detector = detector_from_checkpoint(load_checkpoint(p("detector")));
  b.narrowing = scorer_from_checkpoint(load_checkpoint(p("scorer_narrowing")));
  b.erosion = scorer_from_checkpoint(load_checkpoint(p("scorer_erosion")));
  return b;
}

int run(int argc, char** argv) {
  // --config is honoured before CLI11 sees the rest so its values can
  // serve as option defaults.
  ConfigMap cfg;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") cfg = load_config(argv[i + 1]);

  CLI::App app{"Per-joint radiographic damage scoring pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value option defaults");

  std::uint64_t seed = 42;
  bool deterministic = false;
  std::string out_dir = "out";
  std::string limb_str = "RH";
  apply_cfg(cfg, "seed", seed);
  apply_cfg(cfg, "out", out_dir);
  apply_cfg(cfg, "limb", limb_str);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic radiograph dataset");
  SynthConfig sc;
  apply_cfg(cfg, "hands", sc.hands);
  apply_cfg(cfg, "feet", sc.feet);
  apply_cfg(cfg, "negatives", sc.negatives);
  apply_cfg(cfg, "noise", sc.noise_density);
  synth->add_option("--hands", sc.hands, "hand image count");
  synth->add_option("--feet", sc.feet, "foot image count");
  synth->add_option("--negatives", sc.negatives, "background-only image count");
  synth->add_option("--noise", sc.noise_density, "speckle density");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", out_dir, "output directory")->required();

  // ---- preprocess ----
  auto* prep = app.add_subcommand("preprocess", "Resize, crop and enhance one radiograph");
  std::string in_path;
  prep->add_option("--in", in_path, "input image (PNG or PGM)")->required();
  prep->add_option("--limb", limb_str, "limb code LH|RH|LF|RF");
  prep->add_option("--out", out_dir, "output directory");

  // ---- mask ----
  auto* mask_cmd = app.add_subcommand("mask", "Extract the limb mask of one radiograph");
  std::string model_path;
  mask_cmd->add_option("--in", in_path, "input image")->required();
  mask_cmd->add_option("--limb", limb_str, "limb code LH|RH|LF|RF");
  mask_cmd->add_option("--model", model_path, "segmentation checkpoint (default: classical)");
  mask_cmd->add_option("--out", out_dir, "output directory");

  // ---- train ----
  auto* train = app.add_subcommand("train", "Train a pipeline model");
  train->require_subcommand(1);
  std::string data_dir, limb_type = "hand", task = "narrowing", trunk_path, trunk_out, out_path;
  apply_cfg(cfg, "data", data_dir);
  apply_cfg(cfg, "type", limb_type);

  auto* tr_unet = train->add_subcommand("unet", "Train the limb segmentation net");
  UNetSpec uspec;
  uspec.input_size = 48;
  uspec.stages = 2;
  uspec.base_channels = 4;
  TrainConfig utc;
  int patience = 10;
  apply_cfg(cfg, "size", uspec.input_size);
  apply_cfg(cfg, "stages", uspec.stages);
  apply_cfg(cfg, "base_channels", uspec.base_channels);
  apply_cfg(cfg, "epochs", utc.max_epochs);
  apply_cfg(cfg, "batch", utc.batch_size);
  apply_cfg(cfg, "lr", utc.learning_rate);
  apply_cfg(cfg, "patience", patience);
  tr_unet->add_option("--data", data_dir, "synthetic dataset directory")->required();
  tr_unet->add_option("--type", limb_type, "hand|foot");
  tr_unet->add_option("--size", uspec.input_size, "net input size");
  tr_unet->add_option("--stages", uspec.stages, "down/up levels");
  tr_unet->add_option("--base-channels", uspec.base_channels);
  tr_unet->add_option("--epochs", utc.max_epochs);
  tr_unet->add_option("--batch", utc.batch_size);
  tr_unet->add_option("--lr", utc.learning_rate);
  tr_unet->add_option("--patience", patience);
  tr_unet->add_option("--seed", seed);
  tr_unet->add_option("--out", out_path, "checkpoint path")->required();

  auto* tr_det = train->add_subcommand("detector", "Train the joint detector");
  DetectorTrainConfig dtc;
  int det_input = 64;
  apply_cfg(cfg, "batches", dtc.max_batches);
  apply_cfg(cfg, "batch", dtc.batch_size);
  apply_cfg(cfg, "lr", dtc.learning_rate);
  apply_cfg(cfg, "input", det_input);
  tr_det->add_option("--data", data_dir)->required();
  tr_det->add_option("--type", limb_type, "hand|foot");
  tr_det->add_option("--input", det_input, "detector input size");
  tr_det->add_option("--batches", dtc.max_batches);
  tr_det->add_option("--batch", dtc.batch_size);
  tr_det->add_option("--lr", dtc.learning_rate);
  tr_det->add_option("--seed", seed);
  tr_det->add_option("--out", out_path, "checkpoint path")->required();

  auto* tr_sc = train->add_subcommand("scorer", "Train one ordinal scoring model");
  TrainConfig stc;
  stc.max_epochs = 250;
  stc.batch_size = 32;
  int pretext_epochs = 30;
  apply_cfg(cfg, "epochs", stc.max_epochs);
  apply_cfg(cfg, "batch", stc.batch_size);
  apply_cfg(cfg, "lr", stc.learning_rate);
  apply_cfg(cfg, "pretext_epochs", pretext_epochs);
  tr_sc->add_option("--data", data_dir)->required();
  tr_sc->add_option("--type", limb_type, "hand|foot");
  tr_sc->add_option("--task", task, "narrowing|erosion");
  tr_sc->add_option("--trunk", trunk_path, "frozen trunk checkpoint (pretrained if absent)");
  tr_sc->add_option("--trunk-out", trunk_out, "where to save a freshly pretrained trunk");
  tr_sc->add_option("--epochs", stc.max_epochs);
  tr_sc->add_option("--batch", stc.batch_size);
  tr_sc->add_option("--lr", stc.learning_rate);
  tr_sc->add_option("--pretext-epochs", pretext_epochs);
  tr_sc->add_option("--seed", seed);
  tr_sc->add_option("--out", out_path, "checkpoint path")->required();

  // ---- score ----
  auto* score = app.add_subcommand("score", "Run the full pipeline on one radiograph");
  std::string models_dir;
  apply_cfg(cfg, "models", models_dir);
  score->add_option("--in", in_path, "input image")->required();
  score->add_option("--limb", limb_str, "limb code LH|RH|LF|RF");
  score->add_option("--models", models_dir, "checkpoint directory")->required();
  score->add_option("--out", out_dir, "report directory");
  score->add_flag("--deterministic", deterministic, "suppress wall-clock output");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "Score CSV vs truth CSV metrics");
  std::string pred_csv, truth_csv;
  eval->add_option("--pred", pred_csv, "predicted score CSV")->required();
  eval->add_option("--truth", truth_csv, "truth score CSV")->required();
  eval->add_option("--out", out_dir, "confusion matrix output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // bad flags are validation errors
  }

  if (*synth) {
    sc.seed = seed;
    auto samples = generate_synthetic(sc);
    write_synthetic(samples, out_dir);
    std::cout << "wrote " << samples.size() << " samples to " << out_dir << "\n";
    return 0;
  }

  if (*prep) {
    const LimbKind limb = limb_from_code(limb_str);
    const GrayRaster raw = load_gray(in_path);
    const PreprocessResult pre = preprocess_image(raw, limb);
    fs::create_directories(out_dir);
    const std::string stem = fs::path(in_path).stem().string();
    const std::string out = (fs::path(out_dir) / (stem + "_pre.png")).string();
    save_png(pre.gray, out);
    std::cout << "wrote " << out << "\n";
    return 0;
  }

  if (*mask_cmd) {
    const LimbKind limb = limb_from_code(limb_str);
    const GrayRaster raw = load_gray(in_path);
    const PreprocessResult pre = preprocess_image(raw, limb);
    BinaryMask m;
    if (model_path.empty()) {
      m = extract_mask(pre.gray);
    } else {
      m = predict_mask(unet_from_checkpoint(load_checkpoint(model_path)), pre.unit);
    }
    fs::create_directories(out_dir);
    const std::string stem = fs::path(in_path).stem().string();
    save_mask_png(m, (fs::path(out_dir) / (stem + "_mask.png")).string());
    save_png(apply_mask(pre.gray, m), (fs::path(out_dir) / (stem + "_masked.png")).string());
    std::cout << "wrote mask for " << stem << " (coverage "
              << static_cast<double>(m.count()) / (m.width * m.height) << ")\n";
    return 0;
  }

  if (*tr_unet) {
    const bool hand = parse_limb_type(limb_type);
    utc.seed = seed;
    utc.early_stop_patience = patience;
    const auto samples = make_mask_samples(read_synthetic(data_dir), hand, uspec.input_size);
    if (samples.empty()) throw InvalidInput("no matching samples in " + data_dir);
    UnetTrainResult r = train_unet(uspec, samples, utc);
    save_checkpoint(unet_to_checkpoint(r.model, "unet-" + type_name(hand)), out_path);
    std::cout << "best epoch " << r.best_epoch << " val loss " << r.val_loss[r.best_epoch]
              << ", saved " << out_path << "\n";
    return 0;
  }

  if (*tr_det) {
    const bool hand = parse_limb_type(limb_type);
    dtc.seed = seed;
    DetectorSpec spec = DetectorSpec::with_default_anchors();
    spec.input_size = det_input;
    const auto samples = make_detector_samples(read_synthetic(data_dir), hand, spec.input_size);
    if (samples.empty()) throw InvalidInput("no matching samples in " + data_dir);
    DetectorTrainResult r = train_detector(spec, samples, dtc, hand);
    save_checkpoint(detector_to_checkpoint(r.model, "detector-" + type_name(hand)), out_path);
    std::cout << "final batch loss " << r.batch_loss.back() << ", saved " << out_path << "\n";
    return 0;
  }

  if (*tr_sc) {
    const bool hand = parse_limb_type(limb_type);
    stc.seed = seed;
    const auto corpus = read_synthetic(data_dir);

    TrainedTrunk trunk;
    if (!trunk_path.empty()) {
      trunk = trunk_from_checkpoint(load_checkpoint(trunk_path));
    } else {
      TrainConfig ptc = stc;
      ptc.max_epochs = pretext_epochs;
      ptc.early_stop_patience.reset();
      trunk = pretrain_trunk(make_pretext_samples(corpus, hand), hand, ptc);
      if (!trunk_out.empty())
        save_checkpoint(trunk_to_checkpoint(trunk, "trunk-" + type_name(hand)), trunk_out);
    }

    ScoreScale scale = task == "erosion"
                           ? (hand ? ScoreScale::erosion_hand() : ScoreScale::erosion_foot())
                           : (hand ? ScoreScale::narrowing_hand() : ScoreScale::narrowing_foot());
    if (task != "erosion" && task != "narrowing")
      throw InvalidInput("task must be 'narrowing' or 'erosion'");

    auto samples = make_score_samples(corpus, scale);
    if (samples.empty()) throw InvalidInput("no matching samples in " + data_dir);
    std::vector<int> labels;
    for (const auto& s : samples) labels.push_back(s.score);
    std::vector<ScoreSample> kept;
    for (auto i : undersample_indices(labels, seed)) kept.push_back(samples[i]);

    TrainedScorer scorer = build_scorer(trunk, scale, seed);
    ScorerTrainResult r = train_scorer(scorer, kept, stc);
    save_checkpoint(scorer_to_checkpoint(scorer, "scorer-" + task + "-" + type_name(hand)),
                    out_path);
    std::cout << "best epoch " << r.best_epoch << " val loss " << r.val_loss[r.best_epoch]
              << ", saved " << out_path << "\n";
    return 0;
  }

  if (*score) {
    const LimbKind limb = limb_from_code(limb_str);
    const ModelBundle bundle = load_bundle(models_dir, is_hand(limb));
    const GrayRaster raw = load_gray(in_path);
    const std::string id = fs::path(in_path).stem().string();
    PipelineOptions opts;
    opts.collect_timings = !deterministic;
    PipelineReport rep = run_pipeline(raw, limb, id, bundle, opts);
    write_report(rep, raw, out_dir);
    std::cout << id << " (" << limb_code(limb) << ", mask " << rep.mask_provenance << "): "
              << rep.joints.size() << " joints, narrowing " << rep.sheet.total_narrowing
              << ", erosion " << rep.sheet.total_erosion << ", total " << rep.sheet.overall_total
              << "\n";
    if (!deterministic)
      for (const auto& [stage, ms] : rep.timings_ms)
        std::cout << "  " << stage << ": " << ms << " ms\n";
    return 0;
  }

  if (*eval) {
    const auto pred = read_scores_csv(pred_csv);
    const auto truth = read_scores_csv(truth_csv);
    std::map<std::pair<std::string, std::string>, const DatasetRecord*> by_key;
    for (const auto& r : truth) by_key[{r.patient_id, limb_code(r.limb)}] = &r;

    std::vector<int> nt, np, et, ep;
    for (const auto& r : pred) {
      auto it = by_key.find({r.patient_id, limb_code(r.limb)});
      if (it == by_key.end()) continue;
      for (const auto& [label, s] : r.joints) {
        auto jt = it->second->joints.find(label);
        if (jt == it->second->joints.end()) continue;
        nt.push_back(jt->second.narrowing);
        np.push_back(s.narrowing);
        et.push_back(jt->second.erosion);
        ep.push_back(s.erosion);
      }
    }
    if (nt.empty()) throw InvalidInput("eval: no overlapping (patient, limb, joint) entries");

    const ConfusionMatrix cm_n = confusion_matrix(nt, np, 5);
    const ConfusionMatrix cm_e = confusion_matrix(et, ep, 11);
    std::cout << "joints compared: " << nt.size() << "\n";
    std::cout << "narrowing balanced accuracy: " << balanced_accuracy(cm_n) << "\n";
    std::cout << "narrowing +-1 balanced accuracy: " << tolerant_balanced_accuracy(nt, np, 5)
              << "\n";
    std::cout << "erosion balanced accuracy: " << balanced_accuracy(cm_e) << "\n";
    std::cout << "erosion +-1 balanced accuracy: " << tolerant_balanced_accuracy(et, ep, 11)
              << "\n";
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_confusion_csv(cm_n, (fs::path(out_dir) / "confusion_narrowing.csv").string());
      write_confusion_csv(cm_e, (fs::path(out_dir) / "confusion_erosion.csv").string());
    }
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::ParseError&) {
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
