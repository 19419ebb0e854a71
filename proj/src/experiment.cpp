#include "patchvote/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "patchvote/checkpoint.hpp"
#include "patchvote/parallel.hpp"
#include "patchvote/strings.hpp"

namespace patchvote {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string format_accuracy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string widths_to_string(const std::array<int, 3>& w) {
  return std::to_string(w[0]) + "," + std::to_string(w[1]) + "," +
         std::to_string(w[2]);
}

std::array<int, 3> parse_widths(const std::string& text) {
  std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 3) {
    throw std::runtime_error("widths must be three comma-separated integers");
  }
  std::array<int, 3> w{};
  for (int i = 0; i < 3; ++i) w[i] = parse_int(strip(parts[i]), "width");
  return w;
}

// Labels whose record count cannot reach every fold.
std::vector<std::string> classes_below_k(const DatasetManifest& m, int k) {
  std::vector<int> counts(m.label_set.size(), 0);
  for (const SampleRecord& r : m.records) counts[m.label_index(r.label)]++;
  std::vector<std::string> small;
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < k) small.push_back(m.label_set[c]);
  }
  return small;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

// One posterior pass per record, shared by every requested mode; predictions
// land index-addressed so the parallel loop stays deterministic.
void evaluate_records(const Classifier& clf, const ImageCache& cache,
                      std::span<const size_t> records,
                      std::span<const InferMode> modes, int threads,
                      std::vector<std::vector<int>>& pred) {
  bool need_patches = false;
  for (InferMode mode : modes) {
    if (mode != InferMode::kCentral) need_patches = true;
  }
  parallel_for(records.size(), threads, [&](size_t t) {
    size_t r = records[t];
    ProbabilityMatrix pm;
    if (need_patches) {
      const std::vector<Raster>& patches = cache.patches(r);
      pm.grid = cache.grid();
      pm.num_classes = clf.num_classes();
      pm.entries.reserve(patches.size());
      for (const Raster& p : patches) pm.entries.push_back(clf.predict_proba(p));
    }
    for (size_t i = 0; i < modes.size(); ++i) {
      switch (modes[i]) {
        case InferMode::kVote:
          pred[i][r] = majority_vote(pm).predicted_class;
          break;
        case InferMode::kMean:
          pred[i][r] = mean_aggregate(pm).predicted_class;
          break;
        case InferMode::kCentral: {
          ProbabilityMatrix one{GridSpec{1, 1}, clf.num_classes(),
                                {clf.predict_proba(cache.central_patch(r))}};
          pred[i][r] = majority_vote(one).predicted_class;
          break;
        }
      }
    }
  });
}

CvReport assemble_report(const DatasetManifest& m, const FoldAssignment& folds,
                         const std::vector<int>& pred, InferMode mode,
                         std::vector<std::string> config_lines,
                         std::vector<std::vector<std::string>> train_paths) {
  int C = int(m.label_set.size());
  CvReport rep;
  rep.mode = mode;
  rep.labels = m.label_set;
  rep.confusion.assign(C, std::vector<int>(C, 0));
  rep.config_lines = std::move(config_lines);
  rep.fold_train_paths = std::move(train_paths);
  std::vector<size_t> fold_total(folds.k, 0);
  std::vector<size_t> fold_correct(folds.k, 0);
  rep.predictions.reserve(m.size());
  for (size_t r = 0; r < m.size(); ++r) {
    int truth = m.label_index(m.records[r].label);
    int guess = pred[r];
    int f = folds.fold_of[r];
    rep.confusion[truth][guess]++;
    fold_total[f]++;
    if (guess == truth) {
      fold_correct[f]++;
    } else {
      rep.misclassified++;
    }
    rep.predictions.push_back({m.records[r].path, f, truth, guess});
  }
  rep.total = m.size();
  for (int f = 0; f < folds.k; ++f) {
    if (fold_total[f] == 0) {
      throw std::invalid_argument("fold " + std::to_string(f) +
                                  " has no evaluation records; reduce folds");
    }
    rep.fold_accuracy.push_back(double(fold_correct[f]) / double(fold_total[f]));
  }
  rep.mean_accuracy =
      std::accumulate(rep.fold_accuracy.begin(), rep.fold_accuracy.end(), 0.0) /
      double(folds.k);
  return rep;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (manifest_path.empty()) {
    throw std::invalid_argument("experiment config is missing the manifest");
  }
  if (grid.rows < 1 || grid.cols < 1) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  if (folds < 2) throw std::invalid_argument("need at least 2 folds");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("conv widths must be positive");
  }
  train.validate();
}

ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string text = strip(line);
    if (text.empty() || text[0] == '#') continue;
    size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("bad config line " + std::to_string(line_no) +
                               ": '" + text + "'");
    }
    std::string key = strip(text.substr(0, eq));
    std::string value = strip(text.substr(eq + 1));
    if (key == "manifest") {
      cfg.manifest_path = value;
    } else if (key == "grid") {
      cfg.grid = parse_grid(value);
    } else if (key == "augment") {
      cfg.augment = parse_augment(value);
    } else if (key == "mode") {
      cfg.mode = parse_infer_mode(value);
    } else if (key == "folds") {
      cfg.folds = parse_int(value, "folds");
    } else if (key == "epochs") {
      cfg.train.epochs = parse_int(value, "epochs");
    } else if (key == "batch_size") {
      cfg.train.batch_size = parse_int(value, "batch_size");
    } else if (key == "learning_rate") {
      cfg.train.learning_rate = parse_double(value, "learning_rate");
    } else if (key == "momentum") {
      cfg.train.momentum = parse_double(value, "momentum");
    } else if (key == "input_size") {
      cfg.train.input_size = parse_int(value, "input_size");
    } else if (key == "widths") {
      cfg.widths = parse_widths(value);
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, "seed");
    } else if (key == "out") {
      cfg.output_dir = value;
    } else if (key == "threads") {
      cfg.threads = parse_int(value, "threads");
    } else {
      throw std::runtime_error("unknown config key '" + key + "'");
    }
  }
  if (cfg.manifest_path.empty()) {
    throw std::runtime_error("config '" + path + "' is missing 'manifest'");
  }
  return cfg;
}

std::vector<std::string> config_echo(
    const ExperimentConfig& cfg, InferMode mode,
    const std::vector<std::string>& small_classes) {
  std::vector<std::string> lines;
  lines.push_back("manifest=" + cfg.manifest_path);
  lines.push_back("grid=" + grid_to_string(cfg.grid));
  lines.push_back("augment=" + augment_to_string(cfg.augment));
  lines.push_back("mode=" + infer_mode_to_string(mode));
  lines.push_back("folds=" + std::to_string(cfg.folds));
  lines.push_back("epochs=" + std::to_string(cfg.train.epochs));
  lines.push_back("batch_size=" + std::to_string(cfg.train.batch_size));
  lines.push_back("learning_rate=" + format_double(cfg.train.learning_rate));
  lines.push_back("momentum=" + format_double(cfg.train.momentum));
  lines.push_back("input_size=" + std::to_string(cfg.train.input_size));
  lines.push_back("widths=" + widths_to_string(cfg.widths));
  lines.push_back("seed=" + std::to_string(cfg.seed));
  lines.push_back("threads=" + std::to_string(cfg.threads));
  lines.push_back("out=" + cfg.output_dir);
  lines.push_back("classes_below_folds=" +
                  (small_classes.empty() ? "none" : join(small_classes, ',')));
  return lines;
}

uint64_t fold_model_seed(uint64_t run_seed, int fold_id) {
  return Rng(run_seed).stream("fold.model", uint64_t(fold_id)).next_u64();
}

FoldTrainOutcome train_fold(const DatasetManifest& m,
                            const FoldAssignment& folds, int fold_id,
                            const ExperimentConfig& cfg,
                            const ImageCache& cache) {
  cfg.validate();
  if (fold_id < 0 || fold_id >= folds.k) {
    throw std::invalid_argument("fold id out of range");
  }
  if (folds.fold_of.size() != m.size()) {
    throw std::invalid_argument("fold assignment does not match the manifest");
  }
  if (!(cache.grid() == cfg.grid) ||
      cache.input_size() != cfg.train.input_size) {
    throw std::invalid_argument("cache does not match the experiment config");
  }
  int num_classes = int(m.label_set.size());
  if (num_classes < 2) throw std::invalid_argument("need at least two classes");

  std::vector<size_t> train_records;
  for (size_t r = 0; r < m.size(); ++r) {
    if (folds.fold_of[r] != fold_id) train_records.push_back(r);
  }
  if (train_records.empty()) {
    throw std::invalid_argument("fold " + std::to_string(fold_id) +
                                " leaves no training records");
  }

  uint64_t seed = fold_model_seed(cfg.seed, fold_id);
  std::unique_ptr<TrainingSource> source;
  std::vector<size_t> contributed;
  switch (cfg.augment) {
    case AugmentKind::kNone:
    case AugmentKind::kTdli: {
      auto s = std::make_unique<PatchTrainSource>(cache, train_records,
                                                  cfg.augment, seed);
      contributed = s->contributing_records();
      source = std::move(s);
      break;
    }
    case AugmentKind::kVerlyLopes: {
      // Keyed by manifest index (run seed, not fold seed), so an image's
      // fixed 20-sample expansion is identical whichever folds include it.
      auto s = std::make_unique<VlTrainSource>(cache, train_records, cfg.seed);
      contributed = s->contributing_records();
      source = std::move(s);
      break;
    }
    case AugmentKind::kTang: {
      auto s = std::make_unique<TangTrainSource>(cache, train_records, seed);
      contributed = s->contributing_records();
      source = std::move(s);
      break;
    }
  }

  FoldTrainOutcome out;
  out.net = SmallCnn<float>(num_classes, cfg.train.input_size, seed,
                            cfg.widths);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  out.history = train(out.net, *source, tc);
  out.train_records = std::move(contributed);
  return out;
}

std::vector<CvReport> run_cv_all_modes(const ExperimentConfig& cfg,
                                       std::span<const InferMode> modes) {
  cfg.validate();
  if (modes.empty()) throw std::invalid_argument("no inference modes given");
  DatasetManifest m = load_manifest(cfg.manifest_path);
  std::string root = manifest_root(cfg.manifest_path);
  FoldAssignment folds = stratified_kfold(m, cfg.folds, cfg.seed);
  bool keep_full = cfg.augment == AugmentKind::kVerlyLopes ||
                   cfg.augment == AugmentKind::kTang;
  ImageCache cache(m, root, cfg.grid, cfg.train.input_size, keep_full,
                   nullptr, cfg.threads);

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    save_folds(m, folds, cfg.output_dir + "/folds.csv");
  }

  size_t n = m.size();
  std::vector<std::vector<int>> pred(modes.size(), std::vector<int>(n, -1));
  std::vector<std::vector<std::string>> fold_train_paths(folds.k);

  for (int f = 0; f < folds.k; ++f) {
    FoldTrainOutcome outcome = train_fold(m, folds, f, cfg, cache);
    for (size_t r : outcome.train_records) {
      fold_train_paths[f].push_back(m.records[r].path);
    }
    if (!cfg.output_dir.empty()) {
      save_checkpoint(outcome.net, m.label_set,
                      CheckpointMeta{cfg.grid, cfg.augment},
                      cfg.output_dir + "/fold_" + std::to_string(f) + ".pvw");
    }
    CnnClassifier clf(std::move(outcome.net));
    std::vector<size_t> test;
    for (size_t r = 0; r < n; ++r) {
      if (folds.fold_of[r] == f) test.push_back(r);
    }
    evaluate_records(clf, cache, test, modes, cfg.threads, pred);
  }

  std::vector<std::string> small = classes_below_k(m, cfg.folds);
  std::vector<CvReport> reports;
  reports.reserve(modes.size());
  for (size_t i = 0; i < modes.size(); ++i) {
    reports.push_back(assemble_report(m, folds, pred[i], modes[i],
                                      config_echo(cfg, modes[i], small),
                                      fold_train_paths));
  }
  return reports;
}

CvReport run_cv_experiment(const ExperimentConfig& cfg) {
  const InferMode one[] = {cfg.mode};
  CvReport rep = std::move(run_cv_all_modes(cfg, one).front());
  if (!cfg.output_dir.empty()) write_report(rep, cfg.output_dir);
  return rep;
}

CvReport evaluate_checkpoints(const std::string& manifest_path,
                              const std::string& folds_path,
                              const std::string& model_dir, InferMode mode,
                              int threads) {
  DatasetManifest m = load_manifest(manifest_path);
  FoldAssignment folds = load_folds(m, folds_path);
  std::vector<LoadedCheckpoint> ckpts;
  ckpts.reserve(folds.k);
  for (int f = 0; f < folds.k; ++f) {
    std::string path = model_dir + "/fold_" + std::to_string(f) + ".pvw";
    LoadedCheckpoint ck = load_checkpoint(path);
    ensure_labels_match(ck.labels, m.label_set);
    if (!ck.meta.grid) {
      throw std::runtime_error("checkpoint '" + path +
                               "' lacks grid metadata");
    }
    if (f > 0) {
      const LoadedCheckpoint& first = ckpts.front();
      if (!(*ck.meta.grid == *first.meta.grid) ||
          ck.net.input_size() != first.net.input_size() ||
          ck.meta.augment != first.meta.augment) {
        throw std::runtime_error(
            "fold checkpoints disagree on grid/input/protocol");
      }
    }
    ckpts.push_back(std::move(ck));
  }

  GridSpec grid = *ckpts.front().meta.grid;
  int input_size = ckpts.front().net.input_size();
  ImageCache cache(m, manifest_root(manifest_path), grid, input_size,
                   /*keep_full=*/false, nullptr, threads);

  const InferMode modes[] = {mode};
  std::vector<std::vector<int>> pred(1, std::vector<int>(m.size(), -1));
  for (int f = 0; f < folds.k; ++f) {
    CnnClassifier clf(std::move(ckpts[f].net));
    std::vector<size_t> test;
    for (size_t r = 0; r < m.size(); ++r) {
      if (folds.fold_of[r] == f) test.push_back(r);
    }
    evaluate_records(clf, cache, test, modes, threads, pred);
  }

  std::vector<std::string> lines;
  lines.push_back("manifest=" + manifest_path);
  lines.push_back("folds_file=" + folds_path);
  lines.push_back("model_dir=" + model_dir);
  lines.push_back("grid=" + grid_to_string(grid));
  lines.push_back("augment=" +
                  (ckpts.front().meta.augment
                       ? augment_to_string(*ckpts.front().meta.augment)
                       : std::string("unrecorded")));
  lines.push_back("mode=" + infer_mode_to_string(mode));
  lines.push_back("folds=" + std::to_string(folds.k));
  lines.push_back("input_size=" + std::to_string(input_size));
  lines.push_back("widths=" +
                  widths_to_string(ckpts.front().net.conv_widths()));
  std::vector<std::string> small = classes_below_k(m, folds.k);
  lines.push_back("classes_below_folds=" +
                  (small.empty() ? "none" : join(small, ',')));

  return assemble_report(m, folds, pred[0], mode, std::move(lines), {});
}

void write_report(const CvReport& r, const std::string& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream out = open_for_write(dir + "/report.csv");
    out << "fold,accuracy\n";
    for (size_t f = 0; f < r.fold_accuracy.size(); ++f) {
      out << (f + 1) << "," << format_accuracy(r.fold_accuracy[f]) << "\n";
    }
    out << "mean," << format_accuracy(r.mean_accuracy) << "\n";
  }
  {
    std::ofstream out = open_for_write(dir + "/confusion.csv");
    out << "true_label";
    for (const std::string& l : r.labels) out << "," << l;
    out << "\n";
    for (size_t t = 0; t < r.confusion.size(); ++t) {
      out << r.labels[t];
      for (int count : r.confusion[t]) out << "," << count;
      out << "\n";
    }
  }
  {
    std::ofstream out = open_for_write(dir + "/predictions.csv");
    out << "path,fold,true_label,predicted_label\n";
    for (const CvReport::Row& row : r.predictions) {
      out << row.path << "," << row.fold << "," << r.labels[row.true_class]
          << "," << r.labels[row.predicted] << "\n";
    }
  }
  {
    std::ofstream out = open_for_write(dir + "/config.txt");
    for (const std::string& line : r.config_lines) out << line << "\n";
  }
}

void ensure_labels_match(const std::vector<std::string>& model_labels,
                         const std::vector<std::string>& manifest_labels) {
  if (model_labels != manifest_labels) {
    throw std::runtime_error(
        "label set mismatch between checkpoint and manifest");
  }
}

std::string manifest_root(const std::string& manifest_path) {
  return std::filesystem::path(manifest_path).parent_path().string();
}

}  // namespace patchvote
