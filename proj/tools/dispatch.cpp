// Copyright 2026 The poseact authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "poseact/dispatch.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "poseact/datagen.hpp"
#include "poseact/detection.hpp"
#include "poseact/eval.hpp"
#include "poseact/image_io.hpp"
#include "poseact/network.hpp"
#include "poseact/serialization.hpp"
#include "poseact/stats.hpp"
#include "poseact/threading.hpp"

namespace fs = std::filesystem;

namespace poseact {

namespace {

// ---------------------------------------------------------------------------
// Config file: flat "section.key = value" lines, '#' comments. CLI flags
// override config values, which override built-in defaults.

class FileConfig {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::bad_config, "cannot open config: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::bad_config,
                    "config line " + std::to_string(lineno) + " has no '='");
      values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  std::optional<std::string> get(const std::string& dotted_key) const {
    auto it = values_.find(dotted_key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::string> values_;
};

FileConfig g_config;

// Applies a config default to an option; the CLI flag still wins.
void config_default(CLI::Option* opt, const std::string& key) {
  if (const auto v = g_config.get(key)) opt->default_val(*v);
}

// ---------------------------------------------------------------------------
// Shared argument bundles.

struct CameraArgs {
  double fx = 550.0, fy = 550.0, cx = 320.0, cy = 240.0;
  int width = 640, height = 480;

  void attach(CLI::App* app, const std::string& section) {
    config_default(app->add_option("--fx", fx, "focal length x, px"), section + ".fx");
    config_default(app->add_option("--fy", fy, "focal length y, px"), section + ".fy");
    config_default(app->add_option("--cx", cx, "principal point x, px"), section + ".cx");
    config_default(app->add_option("--cy", cy, "principal point y, px"), section + ".cy");
    config_default(app->add_option("--width", width, "image width, px"),
                   section + ".width");
    config_default(app->add_option("--height", height, "image height, px"),
                   section + ".height");
  }

  CameraIntrinsics intrinsics() const {
    CameraIntrinsics K{fx, fy, cx, cy, width, height};
    K.validate();
    return K;
  }
};

Mesh resolve_mesh(const std::string& spec, const std::string& texture) {
  if (spec == "builtin:cube") return make_textured_cube();
  return load_obj(spec, texture);
}

std::unique_ptr<Policy> resolve_policy(const std::string& spec) {
  if (spec == "oracle") return std::make_unique<OraclePolicy>();
  const std::string prefix = "network:";
  if (spec.rfind(prefix, 0) == 0)
    return std::make_unique<NetworkPolicy>(
        NetworkPolicy::from_checkpoint(spec.substr(prefix.size())));
  throw Error(ErrorCode::bad_config,
              "--policy must be 'oracle' or 'network:<checkpoint>', got " + spec);
}

void log_resolved(const std::string& command, const Json& resolved) {
  Json j;
  j["command"] = command;
  j["config"] = resolved;
  std::cerr << j.dump() << "\n";
}

Plane heatmap_normalized(const Eigen::ArrayXXd& values) {
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi - lo > 1e-300 ? hi - lo : 1.0;
  return ((values - lo) / span).cast<float>();
}

std::vector<Frame> synthetic_frames(const Mesh& mesh, const CameraIntrinsics& K,
                                    int count, std::uint64_t seed,
                                    const StepSizes& steps, bool with_images) {
  Rng rng(seed);
  const BackgroundPool synth;
  Pose gt = sample_gt_pose(mesh, K, rng, 0.9, 1.4);
  // Start left of centre so one step per frame stays inside the frame.
  gt.translation.x() = (K.width * 0.3 - K.cx) * gt.depth() / K.fx;
  std::vector<Frame> frames;
  Rng bg_rng(seed ^ 0xb6);
  for (int f = 0; f < count; ++f) {
    Frame frame;
    frame.gt = gt;
    if (with_images) {
      Scene scene = make_clean_scene(mesh, K, gt, synth, bg_rng);
      frame.image = std::move(scene.observed);
    }
    frames.push_back(std::move(frame));
    gt.translation.x() += steps.tx_ty * gt.depth() / K.fx;  // one step per frame
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_gen_data(const std::string& mesh_spec, const std::string& texture,
                 const std::string& out_dir, const std::string& backgrounds,
                 int per_group, const std::string& counts_csv, int occluders,
                 int workers, std::uint64_t seed, const CameraArgs& camera,
                 int patch_side) {
  const Mesh mesh = resolve_mesh(mesh_spec, texture);
  const CameraIntrinsics K = camera.intrinsics();
  DatagenConfig cfg;
  cfg.patch_side = patch_side;

  std::map<SeedGroup, int> counts;
  if (!counts_csv.empty()) {
    std::istringstream ss(counts_csv);
    std::string token;
    std::size_t index = 0;
    while (std::getline(ss, token, ',') && index < kAllSeedGroups.size())
      counts[kAllSeedGroups[index++]] = std::stoi(token);
    if (index != kAllSeedGroups.size())
      throw Error(ErrorCode::bad_config, "--counts needs 5 comma-separated values");
  } else {
    for (SeedGroup g : kAllSeedGroups) counts[g] = per_group;
  }

  Json resolved;
  resolved["mesh"] = mesh_spec;
  resolved["out"] = out_dir;
  resolved["seed"] = seed;
  resolved["workers"] = workers;
  for (SeedGroup g : kAllSeedGroups)
    resolved["counts"][seed_group_name(g)] = counts[g];
  log_resolved("gen-data", resolved);

  const DatasetManifest manifest = generate_dataset(
      mesh, K, cfg, counts, out_dir, backgrounds, occluders, workers, seed);
  std::cout << "wrote " << manifest.entries.size() << " samples to " << out_dir
            << "\n";
  return 0;
}

int run_train(const std::string& data_dir, const std::string& out_path,
              int steps, int batch, double lr, std::uint64_t seed, int workers,
              int log_every) {
  TrainingPool pool;
  pool.load(data_dir);
  if (pool.size() == 0)
    throw Error(ErrorCode::bad_config, "dataset is empty: " + data_dir);

  TrainConfig cfg;
  cfg.batch_size = batch;
  cfg.learning_rate = lr;
  cfg.total_steps = steps;

  Json resolved;
  resolved["data"] = data_dir;
  resolved["steps"] = steps;
  resolved["batch"] = batch;
  resolved["lr"] = lr;
  resolved["seed"] = seed;
  resolved["workers"] = workers;
  log_resolved("train", resolved);

  Rng rng(seed);
  PolicyNet<float> net;
  net.init(rng);
  AdamState<float> adam;
  adam.init(net);

  const int side = pool.patch_side();
  MatX<float> input(PolicyNet<float>::kInputChannels,
                    static_cast<Eigen::Index>(batch) * side * side);
  std::vector<int> labels(batch);

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  double window_loss = 0.0;
  int window_count = 0;
  for (int step = 0; step < steps; ++step) {
    for (int b = 0; b < batch; ++b) {
      if (cursor == order.size()) {  // reshuffle each epoch
        for (std::size_t i = order.size(); i > 1; --i)
          std::swap(order[i - 1],
                    order[static_cast<std::size_t>(rng.uniform_int(
                        0, static_cast<std::int64_t>(i) - 1))]);
        cursor = 0;
      }
      const std::size_t pick = order[cursor++];
      pool.fill_input(pick, input, b);
      labels[b] = pool.label(pick);
    }
    const double loss = train_step(net, adam, input, labels, side, cfg, step, workers);
    window_loss += loss;
    ++window_count;
    if (log_every > 0 && (step + 1) % log_every == 0) {
      std::cout << "step " << (step + 1) << "  lr " << cfg.lr_at(step)
                << "  loss " << window_loss / window_count << std::endl;
      window_loss = 0.0;
      window_count = 0;
    }
  }
  save_checkpoint(net, out_path);
  std::cout << "checkpoint written to " << out_path << "\n";
  return 0;
}

int run_track(const std::string& scene_spec, const std::string& policy_spec,
              int frame_count, int reset_every, const std::string& out_path,
              std::uint64_t seed, const CameraArgs& camera) {
  auto policy = resolve_policy(policy_spec);
  const StepSizes steps;

  Mesh mesh;
  CameraIntrinsics K;
  std::vector<Frame> frames;
  if (scene_spec == "synth") {
    mesh = make_textured_cube();
    K = camera.intrinsics();
    frames = synthetic_frames(mesh, K, frame_count, seed, steps,
                              policy->needs_patches());
  } else {
    SequenceData data = load_sequence(scene_spec);
    mesh = std::move(data.mesh);
    K = data.K;
    frames = std::move(data.frames);
  }
  if (frames.empty()) throw Error(ErrorCode::bad_config, "no frames to track");
  if (!frames[0].gt)
    throw Error(ErrorCode::missing_gt, "frame 0 needs a pose to start from");

  Json resolved;
  resolved["scene"] = scene_spec;
  resolved["policy"] = policy_spec;
  resolved["frames"] = frames.size();
  resolved["reset_every"] = reset_every;
  resolved["seed"] = seed;
  log_resolved("track", resolved);

  const auto results = track_sequence(
      *policy, frames, mesh, K, *frames[0].gt,
      reset_every > 0 ? std::optional<int>(reset_every) : std::nullopt,
      LoopConfig{}, steps);

  std::vector<DecisionTrace> traces;
  double total_steps = 0.0;
  for (const auto& r : results) {
    traces.push_back(r.trace);
    total_steps += static_cast<double>(r.trace.length());
  }
  if (!out_path.empty()) write_trace_jsonl(out_path, traces);

  for (std::size_t f = 0; f < results.size(); ++f)
    if (results[f].reset_from_gt)
      std::cout << "frame " << f << ": reset from annotation\n";
  std::cout << "tracked " << results.size() << " frames, mean decisions/frame "
            << total_steps / results.size() << "\n";
  return 0;
}

int run_detect(const std::string& scene_spec, const std::string& policy_spec,
               double grid_spacing, double probe_depth, int rotations,
               const std::string& debug_dir, std::uint64_t seed,
               const CameraArgs& camera, int workers) {
  auto policy = resolve_policy(policy_spec);
  const StepSizes steps;

  Mesh mesh;
  Scene scene;
  Rng rng(seed);
  if (scene_spec == "synth") {
    mesh = make_textured_cube();
    const CameraIntrinsics K = camera.intrinsics();
    const BackgroundPool synth;
    const Pose gt = sample_gt_pose(mesh, K, rng, 0.9, 1.4);
    Rng bg_rng(seed ^ 0xb6);
    scene = make_clean_scene(mesh, K, gt, synth, bg_rng);
  } else {
    SequenceData data = load_sequence(scene_spec);
    mesh = std::move(data.mesh);
    scene.K = data.K;
    scene.observed = data.frames.at(0).image;
    scene.gt = data.frames.at(0).gt;
  }
  scene.mesh = &mesh;

  DetectConfig cfg;
  cfg.grid_spacing = grid_spacing;
  cfg.probe_depth = probe_depth;
  cfg.rotation_count = rotations;
  cfg.workers = workers;

  Json resolved;
  resolved["scene"] = scene_spec;
  resolved["policy"] = policy_spec;
  resolved["grid_spacing"] = grid_spacing;
  resolved["probe_depth"] = probe_depth;
  resolved["rotations"] = rotations;
  resolved["seed"] = seed;
  log_resolved("detect", resolved);

  Pose probe;
  probe.translation = {0.0, 0.0, probe_depth};
  if (scene.gt) probe.rotation = scene.gt->rotation;

  const DetectResult result = detect_pose(scene, *policy, cfg, steps, probe);

  Json out;
  out["crop"] = {{"center", {result.crop.center.x(), result.crop.center.y()}},
                 {"diameter", result.crop.diameter}};
  out["pose"] = pose_to_json(result.pose);
  if (scene.gt) {
    out["center_error_px"] =
        (result.crop.center - project_center(*scene.gt, scene.K)).norm();
  }
  std::cout << out.dump(2) << "\n";

  if (!debug_dir.empty()) {
    fs::create_directories(debug_dir);
    write_png_gray((fs::path(debug_dir) / "divergence.png").string(),
                   heatmap_normalized(-result.map.w));
    Json seeds = Json::array();
    for (int r = 0; r < result.field.rows; ++r)
      for (int c = 0; c < result.field.cols; ++c) {
        const int i = result.field.node_index(r, c);
        const Vec2 node = result.field.node_center(r, c);
        Json s;
        s["x"] = node.x();
        s["y"] = node.y();
        s["vx"] = result.field.vectors[i].x();
        s["vy"] = result.field.vectors[i].y();
        s["valid"] = result.field.valid[i] != 0;
        seeds.push_back(s);
      }
    write_json_file((fs::path(debug_dir) / "seed_field.json").string(), seeds);
    if (!scene.observed.empty())
      write_png_rgb((fs::path(debug_dir) / "overlay.png").string(),
                    render_overlay(scene.observed, mesh, result.pose, scene.K));
  }
  return 0;
}

int run_eval(const std::string& scene_spec, const std::string& policy_spec,
             int reset_every, int frame_count, const std::string& out_path,
             const std::string& csv_path, const std::string& overlay_dir,
             std::uint64_t seed, const CameraArgs& camera, bool symmetric) {
  auto policy = resolve_policy(policy_spec);
  const StepSizes steps;

  Mesh mesh;
  CameraIntrinsics K;
  std::vector<Frame> frames;
  std::string object_name;
  if (scene_spec == "synth") {
    mesh = make_textured_cube();
    K = camera.intrinsics();
    frames = synthetic_frames(mesh, K, frame_count, seed, steps,
                              policy->needs_patches());
    object_name = "builtin_cube";
  } else {
    SequenceData data = load_sequence(scene_spec);
    mesh = std::move(data.mesh);
    K = data.K;
    frames = std::move(data.frames);
    object_name = fs::path(scene_spec).filename().string();
  }
  if (frames.empty() || !frames[0].gt)
    throw Error(ErrorCode::missing_gt, "evaluation needs annotated frames");

  Json resolved;
  resolved["scene"] = scene_spec;
  resolved["policy"] = policy_spec;
  resolved["reset_every"] = reset_every;
  resolved["symmetric"] = symmetric;
  resolved["seed"] = seed;
  log_resolved("eval", resolved);

  const auto results = track_sequence(
      *policy, frames, mesh, K, *frames[0].gt,
      reset_every > 0 ? std::optional<int>(reset_every) : std::nullopt,
      LoopConfig{}, steps);

  const ModelPoints points = ModelPoints::from_mesh(mesh);
  std::vector<double> errors;
  std::vector<Pose> pred, gt;
  double total_steps = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    total_steps += static_cast<double>(results[f].trace.length());
    if (!frames[f].gt) continue;
    const double err = symmetric
                           ? adi_metric(results[f].pose, *frames[f].gt, points)
                           : add_metric(results[f].pose, *frames[f].gt, points);
    errors.push_back(err);
    pred.push_back(results[f].pose);
    gt.push_back(*frames[f].gt);
  }

  EvalReport report;
  report.object_name = object_name;
  report.add_auc = add_auc(errors);
  report.success_at_01d = success_rate(errors, points.diameter);
  report.shift_m = estimate_shift(pred, gt);
  report.mean_steps = total_steps / static_cast<double>(frames.size());
  report.frames = static_cast<int>(frames.size());

  const Json out = eval_report_to_json(report);
  if (!out_path.empty())
    write_json_file(out_path, out);
  else
    std::cout << out.dump(2) << "\n";

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    csv << "frame,error_m,steps\n";
    for (std::size_t f = 0; f < errors.size(); ++f)
      csv << f << "," << errors[f] << "," << results[f].trace.length() << "\n";
  }
  if (!overlay_dir.empty()) {
    fs::create_directories(overlay_dir);
    for (std::size_t f = 0; f < results.size(); ++f) {
      if (frames[f].image.empty()) continue;
      char name[32];
      std::snprintf(name, sizeof(name), "overlay_%04zu.png", f);
      write_png_rgb((fs::path(overlay_dir) / name).string(),
                    render_overlay(frames[f].image, mesh, results[f].pose, K));
    }
  }
  return 0;
}

int run_robustness(const std::string& mesh_spec, const std::string& texture,
                   const std::string& policy_spec, int m_max, int delta,
                   int scene_count, int cap, std::uint64_t seed,
                   const std::string& out_path, int workers,
                   const CameraArgs& camera) {
  auto policy = resolve_policy(policy_spec);
  const Mesh mesh = resolve_mesh(mesh_spec, texture);
  const CameraIntrinsics K = camera.intrinsics();

  Json resolved;
  resolved["mesh"] = mesh_spec;
  resolved["policy"] = policy_spec;
  resolved["m_max"] = m_max;
  resolved["delta"] = delta;
  resolved["scenes"] = scene_count;
  resolved["cap"] = cap;
  resolved["seed"] = seed;
  resolved["workers"] = workers;
  log_resolved("robustness", resolved);

  const ModelPoints points = ModelPoints::from_mesh(mesh);
  const BackgroundPool synth;
  std::vector<RobustnessScene> scenes;
  for (int i = 0; i < scene_count; ++i) {
    Rng rng = Rng::stream(seed ^ 0x5ce9eULL, i);
    RobustnessScene rs;
    const Pose gt = sample_gt_pose(mesh, K, rng, 0.7, 1.6);
    if (policy->needs_patches()) {
      rs.scene = make_clean_scene(mesh, K, gt, synth, rng);
    } else {
      rs.scene.K = K;
      rs.scene.gt = gt;
    }
    rs.points = points;
    scenes.push_back(std::move(rs));
  }
  for (auto& rs : scenes) rs.scene.mesh = &mesh;

  RobustnessConfig cfg;
  cfg.m_max = m_max;
  cfg.deviation_multiplier = delta;
  cfg.fail_cap = cap;
  cfg.seed = seed;
  cfg.workers = workers;

  const auto entries = robustness_sweep(*policy, scenes, cfg);
  const Json report = robustness_report_to_json(entries);
  if (!out_path.empty())
    write_json_file(out_path, report);
  else
    std::cout << report.dump(2) << "\n";
  return 0;
}

int run_render_debug(const std::string& mesh_spec, const std::string& texture,
                     const std::string& pose_json, const std::string& out_dir,
                     std::uint64_t seed, const CameraArgs& camera) {
  const Mesh mesh = resolve_mesh(mesh_spec, texture);
  const CameraIntrinsics K = camera.intrinsics();
  Rng rng(seed);
  const Pose pose = pose_json.empty()
                        ? sample_gt_pose(mesh, K, rng, 0.9, 1.4)
                        : pose_from_json(Json::parse(pose_json));

  Json resolved;
  resolved["mesh"] = mesh_spec;
  resolved["pose"] = pose_to_json(pose);
  resolved["out"] = out_dir;
  log_resolved("render-debug", resolved);

  fs::create_directories(out_dir);
  const RenderPatch patch =
      rasterize(mesh, pose, K, LightConfig::canonical(), MaterialConfig{});
  write_png_rgb((fs::path(out_dir) / "rgb.png").string(), patch.rgb);
  write_png_depth_mm((fs::path(out_dir) / "depth.png").string(), patch.depth);
  write_png_gray((fs::path(out_dir) / "mask.png").string(), patch.mask);

  const CropState crop = compute_crop(pose, K, mesh.vertices);
  const PatchStack stack = render_patch_stack(patch.rgb, mesh, pose, K, crop);
  ImageRGB obs(stack.side, stack.side);
  for (int c = 0; c < 3; ++c) obs.channel(c) = stack.channels[c];
  write_png_rgb((fs::path(out_dir) / "patch_obs.png").string(), obs);
  write_json_file((fs::path(out_dir) / "pose.json").string(), pose_to_json(pose));
  std::cout << "debug renders written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int dispatch(int argc, char** argv) {
  CLI::App app{"pose-act: 6D pose estimation as a discrete action decision process"};
  app.require_subcommand(1);

  // Config file is read before option setup so its values become defaults.
  std::string config_path;
  if (const char* env = std::getenv("POSE_ACT_CONFIG")) config_path = env;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  try {
    if (!config_path.empty()) g_config.load(config_path);
  } catch (const Error& e) {
    Json j;
    j["error"] = "bad_config";
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 2;
  }
  app.add_option("--config", config_path,
                 "flat section.key = value config file (also via POSE_ACT_CONFIG)");

  std::uint64_t seed = 0;
  config_default(app.add_option("--seed", seed, "global rng seed"), "global.seed");
  int workers = default_workers();
  config_default(app.add_option("--workers", workers, "worker threads"),
                 "global.workers");

  // gen-data -----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic training dataset");
  std::string gen_mesh = "builtin:cube", gen_texture, gen_out, gen_backgrounds,
              gen_counts;
  int gen_per_group = 1000, gen_occluders = 64, gen_patch = 128;
  config_default(gen->add_option("--mesh", gen_mesh, "OBJ path or builtin:cube"),
                 "gen-data.mesh");
  gen->add_option("--texture", gen_texture, "PNG texture for the mesh");
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--backgrounds", gen_backgrounds,
                  "directory of background images (synthesized if omitted)");
  config_default(
      gen->add_option("--per-group", gen_per_group, "samples per seed cluster"),
      "gen-data.per-group");
  gen->add_option("--counts", gen_counts,
                  "per-cluster counts: small,large,mixed,random_small,random_large");
  gen->add_option("--occluders", gen_occluders, "occluder pool size");
  gen->add_option("--patch-side", gen_patch, "patch resolution n");
  CameraArgs gen_camera;
  gen_camera.attach(gen, "gen-data");

  // train ----------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train the action decision network");
  std::string train_data, train_out = "policy.ckpt";
  int train_steps = 25000, train_batch = 32, train_log = 200;
  double train_lr = 1e-4;
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "checkpoint output path");
  config_default(train->add_option("--steps", train_steps, "training steps"),
                 "train.steps");
  config_default(train->add_option("--batch", train_batch, "batch size"),
                 "train.batch");
  config_default(train->add_option("--lr", train_lr, "base learning rate"),
                 "train.lr");
  train->add_option("--log-every", train_log, "loss log interval (0 = quiet)");

  // track ----------------------------------------------------------------------
  auto* track = app.add_subcommand("track", "run the decision loop over a sequence");
  std::string track_scene = "synth", track_policy = "oracle", track_out;
  int track_frames = 45, track_reset = 0;
  track->add_option("--scene", track_scene, "sequence directory or 'synth'");
  config_default(
      track->add_option("--policy", track_policy, "oracle | network:<checkpoint>"),
      "track.policy");
  track->add_option("--frames", track_frames, "frame count for synth scenes");
  track->add_option("--reset-every", track_reset,
                    "restart from the annotation every k frames (0 = never)");
  track->add_option("--out", track_out, "trace output (JSON lines)");
  CameraArgs track_camera;
  track_camera.attach(track, "track");

  // detect ---------------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "initialize a pose without a detector");
  std::string detect_scene = "synth", detect_policy = "oracle", detect_debug;
  double detect_spacing = 16.0, detect_depth = 1.0;
  int detect_rotations = 60;
  detect->add_option("--scene", detect_scene, "sequence directory or 'synth'");
  detect->add_option("--policy", detect_policy, "oracle | network:<checkpoint>");
  detect->add_option("--grid-spacing", detect_spacing, "seed grid spacing, px");
  detect->add_option("--probe-depth", detect_depth, "probe pose depth, m");
  detect->add_option("--rotations", detect_rotations, "rotation grid size");
  detect->add_option("--debug-dir", detect_debug,
                     "write divergence heatmap and seed vectors here");
  CameraArgs detect_camera;
  detect_camera.attach(detect, "detect");

  // eval -----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "track a sequence and score it");
  std::string eval_scene = "synth", eval_policy = "oracle", eval_out, eval_csv,
              eval_overlays;
  int eval_reset = 15, eval_frames = 45;
  bool eval_symmetric = false;
  eval->add_option("--scene", eval_scene, "sequence directory or 'synth'");
  eval->add_option("--policy", eval_policy, "oracle | network:<checkpoint>");
  config_default(eval->add_option("--reset-every", eval_reset,
                                  "annotation reset period (0 = never)"),
                 "eval.reset-every");
  eval->add_option("--frames", eval_frames, "frame count for synth scenes");
  eval->add_option("--out", eval_out, "report JSON path (stdout if omitted)");
  eval->add_option("--csv", eval_csv, "optional per-frame CSV export");
  eval->add_option("--overlay-dir", eval_overlays, "write contour overlays here");
  eval->add_flag("--symmetric", eval_symmetric, "score with ADI instead of ADD");
  CameraArgs eval_camera;
  eval_camera.attach(eval, "eval");

  // robustness -------------------------------------------------------------------
  auto* robust = app.add_subcommand("robustness", "convergence-basin sweep");
  std::string robust_mesh = "builtin:cube", robust_texture,
              robust_policy = "oracle", robust_out;
  int robust_m_max = 45, robust_delta = 6, robust_scenes = 20, robust_cap = 200;
  robust->add_option("--mesh", robust_mesh, "OBJ path or builtin:cube");
  robust->add_option("--texture", robust_texture, "PNG texture for the mesh");
  robust->add_option("--policy", robust_policy, "oracle | network:<checkpoint>");
  config_default(robust->add_option("--m-max", robust_m_max, "largest deviation m"),
                 "robustness.m-max");
  robust->add_option("--delta", robust_delta, "action units per unit of m");
  robust->add_option("--scenes", robust_scenes, "number of random scenes");
  robust->add_option("--cap", robust_cap, "step budget before a run fails");
  robust->add_option("--out", robust_out, "report JSON path (stdout if omitted)");
  CameraArgs robust_camera;
  robust_camera.attach(robust, "robustness");

  // render-debug -------------------------------------------------------------------
  auto* render = app.add_subcommand("render-debug", "write debug renders of a pose");
  std::string render_mesh = "builtin:cube", render_texture, render_pose,
              render_out = "render_debug";
  render->add_option("--mesh", render_mesh, "OBJ path or builtin:cube");
  render->add_option("--texture", render_texture, "PNG texture for the mesh");
  render->add_option("--pose", render_pose,
                     "pose JSON {\"q\":[w,x,y,z],\"t\":[x,y,z]} (random if omitted)");
  render->add_option("--out", render_out, "output directory");
  CameraArgs render_camera;
  render_camera.attach(render, "render-debug");

  // Global options (--seed, --workers) may be written after the subcommand.
  for (CLI::App* sub : {gen, train, track, detect, eval, robust, render})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return run_gen_data(gen_mesh, gen_texture, gen_out, gen_backgrounds,
                          gen_per_group, gen_counts, gen_occluders, workers, seed,
                          gen_camera, gen_patch);
    if (train->parsed())
      return run_train(train_data, train_out, train_steps, train_batch, train_lr,
                       seed, workers, train_log);
    if (track->parsed())
      return run_track(track_scene, track_policy, track_frames, track_reset,
                       track_out, seed, track_camera);
    if (detect->parsed())
      return run_detect(detect_scene, detect_policy, detect_spacing, detect_depth,
                        detect_rotations, detect_debug, seed, detect_camera,
                        workers);
    if (eval->parsed())
      return run_eval(eval_scene, eval_policy, eval_reset, eval_frames, eval_out,
                      eval_csv, eval_overlays, seed, eval_camera, eval_symmetric);
    if (robust->parsed())
      return run_robustness(robust_mesh, robust_texture, robust_policy,
                            robust_m_max, robust_delta, robust_scenes, robust_cap,
                            seed, robust_out, workers, robust_camera);
    if (render->parsed())
      return run_render_debug(render_mesh, render_texture, render_pose, render_out,
                              seed, render_camera);
  } catch (const Error& e) {
    Json j;
    j["error"] = static_cast<int>(e.code());
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    Json j;
    j["error"] = "runtime";
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace poseact
