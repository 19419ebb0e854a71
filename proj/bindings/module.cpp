// Python bindings. Images cross the boundary as (H, W, 3) uint8 numpy
// arrays; everything heavier (training, cross-validation, dataset
// generation) releases the GIL while the C++ side runs.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "patchvote/augment.hpp"
#include "patchvote/checkpoint.hpp"
#include "patchvote/cnn.hpp"
#include "patchvote/codec.hpp"
#include "patchvote/dataset.hpp"
#include "patchvote/experiment.hpp"
#include "patchvote/raster.hpp"
#include "patchvote/rng.hpp"
#include "patchvote/synth.hpp"
#include "patchvote/voting.hpp"

namespace py = pybind11;

namespace patchvote {
namespace {

Raster to_raster(const py::array& image) {
  auto a = py::array_t<uint8_t, py::array::c_style | py::array::forcecast>::
      ensure(image);
  if (!a || a.ndim() != 3 || a.shape(2) != Raster::kChannels)
    throw std::invalid_argument("expected an (H, W, 3) uint8 image array");
  Raster r(int(a.shape(1)), int(a.shape(0)));
  std::memcpy(r.pixels.data(), a.data(), r.pixels.size());
  return r;
}

py::array_t<uint8_t> from_raster(const Raster& r) {
  py::array_t<uint8_t> a({r.height, r.width, Raster::kChannels});
  std::memcpy(a.mutable_data(), r.pixels.data(), r.pixels.size());
  return a;
}

std::vector<Raster> to_rasters(const std::vector<py::array>& images) {
  std::vector<Raster> out;
  out.reserve(images.size());
  for (const py::array& a : images) out.push_back(to_raster(a));
  return out;
}

py::list from_rasters(const std::vector<Raster>& rasters) {
  py::list out;
  for (const Raster& r : rasters) out.append(from_raster(r));
  return out;
}

FlipAxis axis_of(const std::string& name) {
  if (name == "horizontal") return FlipAxis::kHorizontal;
  if (name == "vertical") return FlipAxis::kVertical;
  throw std::invalid_argument(
      "flip axis must be 'horizontal' or 'vertical', got '" + name + "'");
}

// A trained net plus the label names and provenance a checkpoint carries.
struct Model {
  SmallCnn<float> net;
  std::vector<std::string> labels;
  CheckpointMeta meta;
};

py::dict report_dict(const CvReport& r) {
  py::dict d;
  d["mode"] = infer_mode_to_string(r.mode);
  d["labels"] = r.labels;
  d["fold_accuracy"] = r.fold_accuracy;
  d["mean_accuracy"] = r.mean_accuracy;
  d["total"] = r.total;
  d["misclassified"] = r.misclassified;
  return d;
}

Model train_model(const std::vector<py::array>& images,
                  const std::vector<int>& labels,
                  std::optional<std::vector<std::string>> label_names,
                  int epochs, int batch_size, double learning_rate,
                  double momentum, int input_size, uint64_t seed,
                  std::array<int, 3> widths) {
  if (images.size() != labels.size())
    throw std::invalid_argument("images and labels differ in length");
  int num_classes = 0;
  for (int l : labels) num_classes = std::max(num_classes, l + 1);
  if (label_names)
    num_classes = std::max(num_classes, int(label_names->size()));
  if (num_classes < 2)
    throw std::invalid_argument("training needs at least 2 classes");

  Model model;
  model.labels = label_names ? std::move(*label_names)
                             : std::vector<std::string>();
  for (int c = int(model.labels.size()); c < num_classes; ++c) {
    char buf[16];
    snprintf(buf, sizeof buf, "class_%02d", c);
    model.labels.push_back(buf);
  }

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.learning_rate = learning_rate;
  cfg.momentum = momentum;
  cfg.input_size = input_size;
  cfg.seed = seed;
  cfg.validate();

  std::vector<Raster> rasters = to_rasters(images);
  py::gil_scoped_release release;
  model.net = SmallCnn<float>(num_classes, input_size, seed, widths);
  train(model.net, rasters, labels, cfg);
  return model;
}

py::dict infer(const Model& model, const py::array& image,
               const std::string& mode_name,
               std::optional<std::pair<int, int>> grid, int threads) {
  GridSpec g;
  if (grid)
    g = {grid->first, grid->second};
  else if (model.meta.grid)
    g = *model.meta.grid;
  else
    throw std::invalid_argument(
        "the model stores no grid; pass grid=(rows, cols)");
  InferMode mode = parse_infer_mode(mode_name);
  Raster r = to_raster(image);

  Prediction p;
  {
    py::gil_scoped_release release;
    CnnClassifier classifier(model.net);
    p = infer_image(classifier, r, g, mode, threads);
  }
  py::dict d;
  d["class_index"] = p.predicted_class;
  d["label"] = model.labels.at(size_t(p.predicted_class));
  d["votes"] = p.vote_tally;
  d["summed_probs"] = p.summed_probs;
  return d;
}

}  // namespace
}  // namespace patchvote

using namespace patchvote;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Patch-grid image classification with majority voting";

  // --- images and geometry -------------------------------------------------
  m.def("read_image",
        [](const std::string& path) { return from_raster(decode_image(path)); },
        py::arg("path"), "Decode a PNG or JPEG file into an (H, W, 3) array.");
  m.def("write_png",
        [](const std::string& path, const py::array& image) {
          write_png(path, to_raster(image));
        },
        py::arg("path"), py::arg("image"));
  m.def("write_jpeg",
        [](const std::string& path, const py::array& image, int quality) {
          write_jpeg(path, to_raster(image), quality);
        },
        py::arg("path"), py::arg("image"), py::arg("quality") = 90);
  m.def("resize",
        [](const py::array& image, int width, int height) {
          return from_raster(resize(to_raster(image), width, height));
        },
        py::arg("image"), py::arg("width"), py::arg("height"));
  m.def("central_crop",
        [](const py::array& image, int width, int height) {
          return from_raster(central_crop(to_raster(image), width, height));
        },
        py::arg("image"), py::arg("width"), py::arg("height"));
  m.def("tile",
        [](const py::array& image, int rows, int cols) {
          PatchSet ps = tile_grid(to_raster(image), {rows, cols});
          return from_rasters(ps.patches);
        },
        py::arg("image"), py::arg("rows"), py::arg("cols"),
        "Split into a rows x cols grid; patches come back row-major.");

  // --- augmentation protocols ----------------------------------------------
  m.def("rotate90",
        [](const py::array& image, int k) {
          return from_raster(rotate90(to_raster(image), k));
        },
        py::arg("image"), py::arg("k") = 1,
        "k counter-clockwise quarter turns.");
  m.def("flip",
        [](const py::array& image, const std::string& axis) {
          return from_raster(flip(to_raster(image), axis_of(axis)));
        },
        py::arg("image"), py::arg("axis"));
  m.def("adjust_brightness",
        [](const py::array& image, double factor) {
          return from_raster(adjust_brightness(to_raster(image), factor));
        },
        py::arg("image"), py::arg("factor"));
  m.def("tdli_expand",
        [](const std::vector<py::array>& patches, uint64_t seed) {
          return from_rasters(tdli_expand(to_rasters(patches), Rng(seed)));
        },
        py::arg("patches"), py::arg("seed"),
        "Rotation expansion: 4 outputs per patch, each with seeded coin-flip "
        "mirrors.");
  m.def("vl_protocol",
        [](const py::array& image, uint64_t seed) {
          return from_rasters(vl_protocol(to_raster(image), Rng(seed)));
        },
        py::arg("image"), py::arg("seed"),
        "Whole-image 20-fold zoom/mirror/rotate expansion to 299x299.");
  m.def("tang_sample",
        [](const py::array& image, uint64_t seed) {
          Rng rng(seed);
          return from_raster(tang_protocol(to_raster(image), rng));
        },
        py::arg("image"), py::arg("seed"),
        "One rotate/brighten/mirror sample resized to 224x224.");

  // --- seeded generator ----------------------------------------------------
  py::class_<Rng>(m, "Rng",
                  "Counter-based splittable generator; draws depend only on "
                  "(seed, stream tag, ordinal, call count).")
      .def(py::init<uint64_t>(), py::arg("seed"))
      .def("stream",
           [](const Rng& rng, const std::string& tag, uint64_t ordinal) {
             return rng.stream(tag, ordinal);
           },
           py::arg("tag"), py::arg("ordinal") = 0)
      .def("next_u64", &Rng::next_u64)
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("below", &Rng::below, py::arg("n"))
      .def("normal", &Rng::normal, py::arg("mean"), py::arg("stddev"));

  // --- models ---------------------------------------------------------------
  py::class_<Model>(m, "Model", "Trained classifier plus its label names.")
      .def_static("load",
                  [](const std::string& path) {
                    LoadedCheckpoint c = load_checkpoint(path);
                    return Model{std::move(c.net), std::move(c.labels),
                                 c.meta};
                  },
                  py::arg("path"))
      .def("save",
           [](const Model& model, const std::string& path) {
             save_checkpoint(model.net, model.labels, model.meta, path);
           },
           py::arg("path"))
      .def_property_readonly(
          "labels", [](const Model& model) { return model.labels; })
      .def_property_readonly(
          "input_size",
          [](const Model& model) { return model.net.input_size(); })
      .def_property_readonly(
          "grid",
          [](const Model& model) -> std::optional<std::pair<int, int>> {
            if (!model.meta.grid) return std::nullopt;
            return std::make_pair(model.meta.grid->rows,
                                  model.meta.grid->cols);
          })
      .def_property_readonly(
          "augment",
          [](const Model& model) -> std::optional<std::string> {
            if (!model.meta.augment) return std::nullopt;
            return augment_to_string(*model.meta.augment);
          })
      .def("predict_proba",
           [](const Model& model, const py::array& image) {
             Raster r = to_raster(image);
             int side = model.net.input_size();
             if (r.width != side || r.height != side) r = resize(r, side, side);
             return model.net.predict_proba(r);
           },
           py::arg("image"),
           "Posterior for one patch (resized to the input side first).")
      .def("infer", &infer, py::arg("image"), py::arg("mode") = "vote",
           py::arg("grid") = py::none(), py::arg("threads") = 1,
           "Image-level prediction: tile, classify patches, aggregate.");

  m.def("train_model", &train_model, py::arg("images"), py::arg("labels"),
        py::arg("label_names") = py::none(), py::arg("epochs") = 50,
        py::arg("batch_size") = 32, py::arg("learning_rate") = 0.01,
        py::arg("momentum") = 0.9, py::arg("input_size") = 64,
        py::arg("seed") = 0,
        py::arg("widths") = SmallCnn<float>::kDefaultWidths,
        "SGD training over in-memory images (resized to input_size).");

  // --- datasets --------------------------------------------------------------
  m.def("load_manifest",
        [](const std::string& path) {
          DatasetManifest man = load_manifest(path);
          py::list records;
          for (const SampleRecord& r : man.records)
            records.append(py::make_tuple(r.path, r.label, r.specimen_id));
          py::dict d;
          d["records"] = records;
          d["labels"] = man.label_set;
          return d;
        },
        py::arg("path"));
  m.def("stratified_folds",
        [](const std::string& manifest_path, int k, uint64_t seed) {
          DatasetManifest man = load_manifest(manifest_path);
          return stratified_kfold(man, k, seed).fold_of;
        },
        py::arg("manifest_path"), py::arg("k"), py::arg("seed"),
        "Per-record fold ids, stratified by class.");
  m.def("subsample_manifest",
        [](const std::string& manifest_path, double fraction, uint64_t seed,
           const std::string& out_path) {
          DatasetManifest kept =
              subsample_fraction(load_manifest(manifest_path), fraction, seed);
          save_manifest(kept, out_path);
          return kept.size();
        },
        py::arg("manifest_path"), py::arg("fraction"), py::arg("seed"),
        py::arg("out_path"),
        "Write a proportional subsample; returns the kept record count.");
  m.def("class_histogram",
        [](const std::string& manifest_path) {
          ClassHistogram h = class_histogram(load_manifest(manifest_path));
          py::dict d;
          for (size_t i = 0; i < h.labels.size(); ++i)
            d[py::str(h.labels[i])] = h.counts[i];
          return d;
        },
        py::arg("manifest_path"));
  m.def("generate_dataset",
        [](const std::string& out_dir, int num_classes, int images_per_class,
           int width, int height, uint64_t seed, double noise_level) {
          SynthSpec spec = SynthSpec::preset(num_classes, images_per_class,
                                             width, height, seed);
          spec.noise_level = noise_level;
          synth_generate(spec, out_dir);
          return out_dir + "/manifest.csv";
        },
        py::arg("out_dir"), py::arg("num_classes") = 8,
        py::arg("images_per_class") = 40, py::arg("width") = 1600,
        py::arg("height") = 1200, py::arg("seed") = 0,
        py::arg("noise_level") = 5.0, py::call_guard<py::gil_scoped_release>(),
        "Write a synthetic textured dataset; returns the manifest path.");

  // --- experiments -----------------------------------------------------------
  m.def("run_experiment",
        [](const std::string& config_path) {
          CvReport report;
          {
            py::gil_scoped_release release;
            report = run_cv_experiment(read_experiment_config(config_path));
          }
          return report_dict(report);
        },
        py::arg("config_path"),
        "Cross-validated run from a key=value config file.");
  m.def("evaluate",
        [](const std::string& manifest_path, const std::string& folds_path,
           const std::string& model_dir, const std::string& mode,
           int threads) {
          InferMode parsed = parse_infer_mode(mode);
          CvReport report;
          {
            py::gil_scoped_release release;
            report = evaluate_checkpoints(manifest_path, folds_path, model_dir,
                                          parsed, threads);
          }
          return report_dict(report);
        },
        py::arg("manifest_path"), py::arg("folds_path"), py::arg("model_dir"),
        py::arg("mode") = "vote", py::arg("threads") = 1,
        "Re-score saved fold checkpoints over their holdouts.");
}
