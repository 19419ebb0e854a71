// Command-line front end: synth | split | train | infer | eval | experiment.
// Every failure path surfaces as a one-line diagnostic on stderr and a
// nonzero exit status.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patchvote/checkpoint.hpp"
#include "patchvote/codec.hpp"
#include "patchvote/dataset.hpp"
#include "patchvote/experiment.hpp"
#include "patchvote/pipeline.hpp"
#include "patchvote/strings.hpp"
#include "patchvote/synth.hpp"
#include "patchvote/voting.hpp"

namespace pv = patchvote;

namespace {

std::array<int, 3> parse_widths_arg(const std::string& text) {
  std::vector<std::string> parts = pv::split(text, ',');
  if (parts.size() != 3) {
    throw std::runtime_error("widths must be three comma-separated integers");
  }
  std::array<int, 3> w{};
  for (int i = 0; i < 3; ++i) {
    w[i] = pv::parse_int(pv::strip(parts[i]), "width");
  }
  return w;
}

void print_report_summary(const pv::CvReport& rep) {
  for (size_t f = 0; f < rep.fold_accuracy.size(); ++f) {
    std::printf("fold %zu accuracy %.4f\n", f + 1, rep.fold_accuracy[f]);
  }
  std::printf("mean accuracy %.4f\n", rep.mean_accuracy);
  std::printf("misclassified %zu of %zu\n", rep.misclassified, rep.total);
}

struct SynthArgs {
  int classes = 8;
  int per_class = 40;
  int width = 1600;
  int height = 1200;
  double noise = 5.0;
  uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  pv::SynthSpec spec = pv::SynthSpec::preset(a.classes, a.per_class, a.width,
                                             a.height, a.seed);
  spec.noise_level = a.noise;
  pv::DatasetManifest m = pv::synth_generate(spec, a.out);
  std::printf("wrote %zu images across %zu classes to %s\n", m.size(),
              m.label_set.size(), a.out.c_str());
  return 0;
}

struct SplitArgs {
  std::string manifest;
  int k = 5;
  uint64_t seed = 0;
  std::string out;
};

int run_split(const SplitArgs& a) {
  pv::DatasetManifest m = pv::load_manifest(a.manifest);
  pv::FoldAssignment folds = pv::stratified_kfold(m, a.k, a.seed);
  pv::save_folds(m, folds, a.out);
  std::printf("wrote %d-fold assignment for %zu records to %s\n", folds.k,
              m.size(), a.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string folds;
  int fold_id = 0;
  std::string grid = "6x8";
  std::string augment = "none";
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int input_size = 64;
  std::string widths = "16,32,64";
  uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

int run_train(const TrainArgs& a) {
  pv::DatasetManifest m = pv::load_manifest(a.manifest);
  pv::FoldAssignment folds = pv::load_folds(m, a.folds);

  pv::ExperimentConfig cfg;
  cfg.manifest_path = a.manifest;
  cfg.grid = pv::parse_grid(a.grid);
  cfg.augment = pv::parse_augment(a.augment);
  cfg.folds = folds.k;
  cfg.train.epochs = a.epochs;
  cfg.train.batch_size = a.batch_size;
  cfg.train.learning_rate = a.learning_rate;
  cfg.train.momentum = a.momentum;
  cfg.train.input_size = a.input_size;
  cfg.widths = parse_widths_arg(a.widths);
  cfg.seed = a.seed;
  cfg.threads = a.threads;

  // Decode only the records this fold trains on.
  std::vector<char> wanted(m.size(), 0);
  for (size_t r = 0; r < m.size(); ++r) {
    if (folds.fold_of[r] != a.fold_id) wanted[r] = 1;
  }
  bool keep_full = cfg.augment == pv::AugmentKind::kVerlyLopes ||
                   cfg.augment == pv::AugmentKind::kTang;
  pv::ImageCache cache(m, pv::manifest_root(a.manifest), cfg.grid,
                       cfg.train.input_size, keep_full, &wanted, a.threads);

  pv::FoldTrainOutcome outcome =
      pv::train_fold(m, folds, a.fold_id, cfg, cache);
  pv::save_checkpoint(outcome.net, m.label_set,
                      pv::CheckpointMeta{cfg.grid, cfg.augment}, a.out);
  std::printf("fold %d: trained on %zu images, final loss %.4f; wrote %s\n",
              a.fold_id, outcome.train_records.size(),
              outcome.history.epoch_loss.back(), a.out.c_str());
  return 0;
}

struct InferArgs {
  std::string model;
  std::string image;
  std::string grid;  // empty = take from checkpoint metadata
  std::string mode = "vote";
  int threads = 1;
};

int run_infer(const InferArgs& a) {
  pv::LoadedCheckpoint ck = pv::load_checkpoint(a.model);
  pv::GridSpec grid;
  if (!a.grid.empty()) {
    grid = pv::parse_grid(a.grid);
    if (ck.meta.grid && !(grid == *ck.meta.grid)) {
      throw std::runtime_error("grid " + a.grid +
                               " does not match checkpoint grid " +
                               pv::grid_to_string(*ck.meta.grid));
    }
  } else if (ck.meta.grid) {
    grid = *ck.meta.grid;
  } else {
    throw std::runtime_error(
        "checkpoint lacks grid metadata; pass --grid explicitly");
  }
  pv::Raster img = pv::decode_image(a.image);
  pv::CnnClassifier clf(std::move(ck.net));
  pv::Prediction p =
      pv::infer_image(clf, img, grid, pv::parse_infer_mode(a.mode), a.threads);
  pv::write_prediction_record(std::cout, a.image, p, ck.labels);
  return 0;
}

struct EvalArgs {
  std::string manifest;
  std::string folds;
  std::string model_dir;
  std::string mode = "vote";
  std::string report;
  int threads = 1;
};

int run_eval(const EvalArgs& a) {
  pv::CvReport rep = pv::evaluate_checkpoints(
      a.manifest, a.folds, a.model_dir, pv::parse_infer_mode(a.mode),
      a.threads);
  pv::write_report(rep, a.report);
  print_report_summary(rep);
  std::printf("report written to %s\n", a.report.c_str());
  return 0;
}

int run_experiment(const std::string& config_path) {
  pv::ExperimentConfig cfg = pv::read_experiment_config(config_path);
  pv::CvReport rep = pv::run_cv_experiment(cfg);
  print_report_summary(rep);
  if (!cfg.output_dir.empty()) {
    std::printf("report written to %s\n", cfg.output_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patch-grid image classification toolkit"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "generate a synthetic dataset");
  s->add_option("--classes", synth.classes)->capture_default_str();
  s->add_option("--per-class", synth.per_class)->capture_default_str();
  s->add_option("--width", synth.width)->capture_default_str();
  s->add_option("--height", synth.height)->capture_default_str();
  s->add_option("--noise", synth.noise)->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--out", synth.out, "output directory")->required();

  SplitArgs split;
  CLI::App* p = app.add_subcommand("split", "assign manifest records to folds");
  p->add_option("--manifest", split.manifest)->required();
  p->add_option("--k", split.k)->capture_default_str();
  p->add_option("--seed", split.seed)->capture_default_str();
  p->add_option("--out", split.out, "fold CSV path")->required();

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "train one cross-validation fold");
  t->add_option("--manifest", train.manifest)->required();
  t->add_option("--folds", train.folds, "fold CSV path")->required();
  t->add_option("--fold-id", train.fold_id, "held-out fold")->required();
  t->add_option("--grid", train.grid)->capture_default_str();
  t->add_option("--augment", train.augment, "none|tdli|vl|tang")
      ->capture_default_str();
  t->add_option("--epochs", train.epochs)->capture_default_str();
  t->add_option("--batch-size", train.batch_size)->capture_default_str();
  t->add_option("--learning-rate", train.learning_rate)->capture_default_str();
  t->add_option("--momentum", train.momentum)->capture_default_str();
  t->add_option("--input-size", train.input_size)->capture_default_str();
  t->add_option("--widths", train.widths, "conv channel widths")
      ->capture_default_str();
  t->add_option("--seed", train.seed)->capture_default_str();
  t->add_option("--threads", train.threads, "preprocessing threads")
      ->capture_default_str();
  t->add_option("--out", train.out, "checkpoint path")->required();

  InferArgs infer;
  CLI::App* i = app.add_subcommand("infer", "classify one image");
  i->add_option("--model", infer.model, "checkpoint path")->required();
  i->add_option("--image", infer.image)->required();
  i->add_option("--grid", infer.grid, "defaults to checkpoint metadata");
  i->add_option("--mode", infer.mode, "vote|central|mean")
      ->capture_default_str();
  i->add_option("--threads", infer.threads)->capture_default_str();

  EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "evaluate saved fold checkpoints");
  e->add_option("--manifest", eval.manifest)->required();
  e->add_option("--folds", eval.folds, "fold CSV path")->required();
  e->add_option("--model-dir", eval.model_dir, "directory with fold_<i>.pvw")
      ->required();
  e->add_option("--mode", eval.mode, "vote|central|mean")
      ->capture_default_str();
  e->add_option("--threads", eval.threads)->capture_default_str();
  e->add_option("--report", eval.report, "report directory")->required();

  std::string config_path;
  CLI::App* x =
      app.add_subcommand("experiment", "run cross-validation from a config");
  x->add_option("--config", config_path, "key=value file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (s->parsed()) return run_synth(synth);
    if (p->parsed()) return run_split(split);
    if (t->parsed()) return run_train(train);
    if (i->parsed()) return run_infer(infer);
    if (e->parsed()) return run_eval(eval);
    if (x->parsed()) return run_experiment(config_path);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
