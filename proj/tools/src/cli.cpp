// Copyright 2026 The msadet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "msadet/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "msadet/checkpoint.hpp"
#include "msadet/errors.hpp"
#include "msadet/eval.hpp"
#include "msadet/gradcheck_suite.hpp"
#include "msadet/io.hpp"
#include "msadet/run_config.hpp"
#include "msadet/scene_gen.hpp"
#include "msadet/training.hpp"

namespace msadet {
namespace {

namespace fs = std::filesystem;

constexpr double kGradTolerance = 1e-4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scenes;
  std::string checkpoint;
  std::vector<double> iou;
  std::vector<std::size_t> sizes{1024, 4096};
  std::string op = "all";
  std::optional<std::size_t> steps;
  std::string msa;
  std::vector<std::string> inputs;  // positional detection files
};

RunConfig load_config(const Options& o) {
  if (!o.config.empty()) return load_run_config(o.config, o.seed);
  if (!o.seed) throw ConfigError("a seed is mandatory: pass --seed or --config with train.seed");
  RunConfig cfg = default_run_config();
  cfg.train.seed = *o.seed;
  return cfg;
}

fs::path scenes_path(const Options& o, const RunConfig& cfg) {
  if (!o.scenes.empty()) return o.scenes;
  if (auto it = cfg.paths.find("scenes"); it != cfg.paths.end()) return it->second;
  throw ConfigError("no scenes given: pass --scenes or set paths.scenes");
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw ConfigError("--out is required");
  fs::create_directories(o.out);
  return o.out;
}

// Ground truth from scene files, or from a box list (anything not .lods or a directory).
std::vector<SceneBoxes> load_ground_truth(const fs::path& path) {
  if (!fs::is_directory(path) && path.extension() != ".lods") return parse_boxes(read_file(path), false);
  std::vector<SceneBoxes> out;
  for (auto& s : load_scenes(path)) out.push_back({s.id, std::move(s.boxes)});
  return out;
}

EvalConfig eval_config(const Options& o) {
  EvalConfig cfg = o.config.empty() ? default_run_config().eval : load_run_config(o.config, o.seed.value_or(0)).eval;
  if (!o.iou.empty()) cfg.iou_thresholds = o.iou;
  cfg.validate();
  return cfg;
}

std::string threshold_tag(double iou) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(iou * 100.0 + 0.5));
  return buf;
}

// One table per IoU threshold; one row per detection file.
int emit_reports(const Options& o, std::ostream& out) {
  const EvalConfig cfg = eval_config(o);
  if (o.scenes.empty()) throw ConfigError("--scenes (ground truth) is required");
  const auto gts = load_ground_truth(o.scenes);
  std::vector<std::string> order;
  std::vector<std::vector<Box3D>> gt_boxes;
  for (const auto& s : gts) {
    order.push_back(s.scene_id);
    gt_boxes.push_back(s.boxes);
  }
  std::vector<std::pair<std::string, EvalResult>> results;
  for (const auto& file : o.inputs) {
    const auto dets = parse_boxes(read_file(file), true);
    for (const auto& d : dets) {
      if (std::find(order.begin(), order.end(), d.scene_id) == order.end()) {
        throw std::runtime_error(file + ": scene '" + d.scene_id + "' has no ground truth");
      }
    }
    results.emplace_back(fs::path(file).stem().string(), map_at(align_boxes(dets, order), gt_boxes, cfg));
  }
  const fs::path dir = o.out.empty() ? fs::path{} : out_dir(o);
  for (double iou : cfg.iou_thresholds) {
    std::vector<ReportRow> rows;
    for (const auto& [method, result] : results) {
      rows.push_back(make_report_row(method, result.at(iou), cfg.class_names));
    }
    const auto table = make_report_table("AP@" + threshold_tag(iou), std::move(rows));
    out << render_text(table) << '\n';
    if (!dir.empty()) {
      write_file_atomic(dir / ("report_iou" + threshold_tag(iou) + ".csv"), render_csv(table));
      write_file_atomic(dir / ("report_iou" + threshold_tag(iou) + ".txt"), render_text(table));
    }
  }
  return 0;
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  if (o.seed) cfg.data.scene.seed = *o.seed;
  const fs::path dir = out_dir(o);
  const auto scenes = generate_dataset(cfg.data.scene, cfg.data.n_scenes);
  std::vector<SceneBoxes> gt;
  for (const auto& s : scenes) {
    save_scene(dir / (s.id + ".lods"), s);
    gt.push_back({s.id, s.boxes});
  }
  write_file_atomic(dir / "gt.txt", format_boxes(gt, false));
  out << "wrote " << scenes.size() << " scenes to " << dir.string() << '\n';
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  if (o.steps) cfg.train.steps = *o.steps;
  if (!o.msa.empty()) cfg.model.msa_enabled = o.msa == "on";
  cfg.model.validate();
  const auto scenes = load_scenes(scenes_path(o, cfg));
  const fs::path dir = out_dir(o);
  const fs::path ckpt = o.checkpoint.empty() ? dir / "model.ckpt" : fs::path(o.checkpoint);

  Detector model(cfg.model, cfg.train.seed);
  std::vector<PreparedScene> prepared;
  for (const auto& s : scenes) prepared.push_back(prepare_scene(model, s));
  const std::size_t every = std::max<std::size_t>(cfg.train.steps / 10, 1);
  const auto log = train(model, prepared, cfg.train, [&](const TrainLogEntry& e) {
    if (e.step % every == 0 || e.step + 1 == cfg.train.steps) out << "step " << e.step << " loss " << e.loss << '\n';
  });
  write_file_atomic(dir / "loss.csv", format_loss_log(log));
  save_checkpoint(ckpt, model);
  out << "checkpoint " << ckpt.string() << '\n';
  return 0;
}

int cmd_infer(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  if (o.scenes.empty()) throw ConfigError("--scenes is required");
  const Detector model = load_checkpoint(o.checkpoint);
  const auto scenes = load_scenes(o.scenes);
  std::vector<SceneBoxes> dets;
  std::size_t kept = 0;
  for (const auto& s : scenes) {
    auto r = infer(model, s);
    kept += r.boxes.size();
    dets.push_back({s.id, std::move(r.boxes)});
  }
  const fs::path dir = out_dir(o);
  write_file_atomic(dir / "detections.txt", format_boxes(dets, true));
  out << "wrote " << kept << " detections for " << scenes.size() << " scenes to "
      << (dir / "detections.txt").string() << '\n';
  return 0;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  const auto cases = run_gradcheck_suite(o.seed.value_or(0));
  double worst = 0.0;
  out << "case,n_checked,max_rel_error\n";
  for (const auto& c : cases) {
    out << c.name << ',' << c.report.n_checked << ',' << format_double(c.report.max_rel_error) << '\n';
    worst = std::max(worst, c.report.max_rel_error);
  }
  out << "max_rel_error " << format_double(worst) << '\n';
  if (!(worst < kGradTolerance)) throw std::runtime_error("gradient check exceeded tolerance 1e-4");
  return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
  const std::string csv = bench_csv(o.op, o.sizes, o.seed.value_or(0));
  if (o.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(out_dir(o) / "bench.csv", csv);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-scale attention point-cloud detector", "msadet"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* c) { c->add_option("--config", o.config, "run configuration file")->check(CLI::ExistingFile); };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "random seed"); };
  auto add_out = [&](CLI::App* c, const std::string& what) { return c->add_option("--out", o.out, what); };
  auto add_iou = [&](CLI::App* c) { c->add_option("--iou", o.iou, "IoU thresholds, comma separated")->delimiter(','); };

  auto* gen = app.add_subcommand("gen-data", "generate synthetic scenes");
  add_config(gen);
  add_seed(gen);
  add_out(gen, "output directory")->required();

  auto* tr = app.add_subcommand("train", "train a detector");
  add_config(tr);
  add_seed(tr);
  add_out(tr, "output directory for the checkpoint and loss log")->required();
  tr->add_option("--scenes", o.scenes, "scene file or directory");
  tr->add_option("--checkpoint", o.checkpoint, "checkpoint path (default OUT/model.ckpt)");
  tr->add_option("--steps", o.steps, "training steps");
  tr->add_option("--msa", o.msa, "multi-scale attention on|off")->check(CLI::IsMember({"on", "off"}));

  auto* inf = app.add_subcommand("infer", "run a checkpoint on scenes");
  add_out(inf, "output directory")->required();
  inf->add_option("--checkpoint", o.checkpoint, "checkpoint path")->required()->check(CLI::ExistingFile);
  inf->add_option("--scenes", o.scenes, "scene file or directory")->required()->check(CLI::ExistingPath);

  auto* ev = app.add_subcommand("eval", "evaluate detections against ground truth");
  ev->add_option("detections", o.inputs, "detections file")->required()->expected(1);
  ev->add_option("--scenes", o.scenes, "ground truth: scene file/directory or box list")->required()->check(CLI::ExistingPath);
  add_config(ev);
  add_iou(ev);
  add_out(ev, "output directory for report files");

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  add_seed(gc);

  auto* be = app.add_subcommand("bench", "time geometry and attention kernels");
  be->add_option("--op", o.op, "fps, knn, wid, attention or all")->check(CLI::IsMember({"fps", "knn", "wid", "attention", "all"}));
  be->add_option("--sizes", o.sizes, "point counts, comma separated")->delimiter(',');
  add_seed(be);
  add_out(be, "output directory for bench.csv");

  auto* rep = app.add_subcommand("report", "per-category tables for one or more detection files");
  rep->add_option("detections", o.inputs, "detection files (method name = file stem)")->required();
  rep->add_option("--scenes", o.scenes, "ground truth: scene file/directory or box list")->required()->check(CLI::ExistingPath);
  add_config(rep);
  add_iou(rep);
  add_out(rep, "output directory for report files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (inf->parsed()) return cmd_infer(o, out);
    if (ev->parsed() || rep->parsed()) return emit_reports(o, out);
    if (gc->parsed()) return cmd_gradcheck(o, out);
    if (be->parsed()) return cmd_bench(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace msadet
