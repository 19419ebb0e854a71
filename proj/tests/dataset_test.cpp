#include <doctest.h>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchvote/dataset.hpp"
#include "test_util.hpp"

using namespace patchvote;
using testutil::TempDir;
using testutil::spit;

namespace {

DatasetManifest tiny_manifest() {
  std::vector<SampleRecord> records{
      {"a/0.png", "oak", "s1"},  {"a/1.png", "oak", "s1"},
      {"b/0.png", "pine", "s2"}, {"a/2.png", "oak", "s3"},
      {"c/0.png", "fir", "s4"},  {"c/1.png", "fir", "s4"},
  };
  return manifest_from_records(std::move(records));
}

// n_records[c] copies of class c, paths img_<i>.png in class-major order.
DatasetManifest counted_manifest(const std::vector<int>& n_records) {
  std::vector<SampleRecord> records;
  int serial = 0;
  for (size_t c = 0; c < n_records.size(); ++c)
    for (int i = 0; i < n_records[c]; ++i)
      records.push_back({"img_" + std::to_string(serial++) + ".png",
                         "class" + std::to_string(c), ""});
  return manifest_from_records(std::move(records));
}

std::map<std::string, std::vector<int>> per_class_fold_counts(
    const DatasetManifest& m, const FoldAssignment& folds) {
  std::map<std::string, std::vector<int>> counts;
  for (size_t i = 0; i < m.records.size(); ++i) {
    auto& row = counts[m.records[i].label];
    row.resize(size_t(folds.k), 0);
    row[size_t(folds.fold_of[i])] += 1;
  }
  return counts;
}

}  // namespace

TEST_CASE("label set follows first appearance and indexes by name") {
  DatasetManifest m = tiny_manifest();
  CHECK(m.label_set == std::vector<std::string>{"oak", "pine", "fir"});
  CHECK(m.label_index("pine") == 1);
  CHECK_THROWS_WITH_AS(m.label_index("birch"), doctest::Contains("birch"),
                       std::invalid_argument);
}

TEST_CASE("manifests survive a save/load round trip") {
  TempDir tmp("manifest");
  DatasetManifest m = tiny_manifest();
  std::string path = tmp.file("manifest.csv");
  save_manifest(m, path);
  DatasetManifest back = load_manifest(path);
  REQUIRE(back.size() == m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    CHECK(back.records[i].path == m.records[i].path);
    CHECK(back.records[i].label == m.records[i].label);
    CHECK(back.records[i].specimen_id == m.records[i].specimen_id);
  }
  CHECK(back.label_set == m.label_set);
}

TEST_CASE("malformed manifests are rejected") {
  TempDir tmp("manifest-bad");

  std::string missing = tmp.file("nope.csv");
  CHECK_THROWS_WITH_AS(load_manifest(missing), doctest::Contains("nope.csv"),
                       std::runtime_error);

  std::string bad_header = tmp.file("header.csv");
  spit(bad_header, "file,class\nx.png,oak\n");
  CHECK_THROWS_WITH(load_manifest(bad_header), doctest::Contains("header"));

  std::string empty = tmp.file("empty.csv");
  spit(empty, "");
  CHECK_THROWS_AS(load_manifest(empty), std::runtime_error);

  std::string header_only = tmp.file("header_only.csv");
  spit(header_only, "path,label,specimen_id\n");
  CHECK_THROWS_WITH(load_manifest(header_only),
                    doctest::Contains("no records"));

  std::string duplicate = tmp.file("dup.csv");
  spit(duplicate,
       "path,label,specimen_id\nx.png,oak,s1\ny.png,oak,s1\nx.png,pine,s2\n");
  CHECK_THROWS_WITH(load_manifest(duplicate), doctest::Contains("duplicate"));

  CHECK_THROWS_WITH(manifest_from_records({{"x.png", "", "s1"}}),
                    doctest::Contains("empty label"));
}

TEST_CASE("stratified folds balance every class to within one record") {
  // 11, 7, and 5 records over 3 folds: per class the fold counts must be a
  // floor/ceil split of n/k, whatever the shuffle did.
  DatasetManifest m = counted_manifest({11, 7, 5});
  FoldAssignment folds = stratified_kfold(m, 3, 42);
  REQUIRE(folds.k == 3);
  REQUIRE(folds.fold_of.size() == m.size());
  for (int f : folds.fold_of) {
    CHECK(f >= 0);
    CHECK(f < 3);
  }
  for (const auto& [label, counts] : per_class_fold_counts(m, folds)) {
    int lo = counts[0], hi = counts[0];
    int total = 0;
    for (int c : counts) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
      total += c;
    }
    CHECK(hi - lo <= 1);
    INFO("class ", label);
    CHECK(total == (label == "class0" ? 11 : label == "class1" ? 7 : 5));
  }
}

TEST_CASE("fold assignment is seeded") {
  DatasetManifest m = counted_manifest({20, 20});
  FoldAssignment a = stratified_kfold(m, 4, 7);
  FoldAssignment b = stratified_kfold(m, 4, 7);
  FoldAssignment c = stratified_kfold(m, 4, 8);
  CHECK(a.fold_of == b.fold_of);
  CHECK(a.fold_of != c.fold_of);
}

TEST_CASE("fold parameters are validated") {
  DatasetManifest m = tiny_manifest();
  CHECK_THROWS_AS(stratified_kfold(m, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(stratified_kfold(DatasetManifest{}, 3, 0),
                  std::invalid_argument);
}

TEST_CASE("fold files round trip against their manifest") {
  TempDir tmp("folds");
  DatasetManifest m = counted_manifest({6, 6});
  FoldAssignment folds = stratified_kfold(m, 3, 9);
  std::string path = tmp.file("folds.csv");
  save_folds(m, folds, path);

  FoldAssignment back = load_folds(m, path);
  CHECK(back.k == folds.k);
  CHECK(back.fold_of == folds.fold_of);

  SUBCASE("rows may be reordered") {
    auto lines = testutil::slurp(path);
    std::string text(lines.begin(), lines.end());
    size_t first_row = text.find('\n') + 1;
    size_t second_row = text.find('\n', first_row) + 1;
    std::string swapped = text.substr(0, first_row) +
                          text.substr(second_row) +
                          text.substr(first_row, second_row - first_row);
    spit(path, swapped);
    FoldAssignment reordered = load_folds(m, path);
    CHECK(reordered.fold_of == folds.fold_of);
  }

  SUBCASE("a manifest record missing from the file is an error") {
    spit(path, "path,fold\nimg_0.png,0\n");
    CHECK_THROWS_WITH(load_folds(m, path), doctest::Contains("img_1.png"));
  }

  SUBCASE("negative folds and bad headers are rejected") {
    spit(path, "path,fold\nimg_0.png,-1\n");
    CHECK_THROWS_WITH(load_folds(m, path), doctest::Contains("negative"));
    spit(path, "file,fold\n");
    CHECK_THROWS_WITH(load_folds(m, path), doctest::Contains("header"));
  }
}

TEST_CASE("subsampling keeps a half-even rounded count per class") {
  // Class sizes 5, 7, 6, 2 at fraction 0.5: 2.5 rounds to 2, 3.5 to 4
  // (half-even), 3 stays, and 1 survives via the minimum.
  DatasetManifest m = counted_manifest({5, 7, 6, 2});
  DatasetManifest sub = subsample_fraction(m, 0.5, 3);
  std::map<std::string, int> kept;
  for (const auto& r : sub.records) kept[r.label] += 1;
  CHECK(kept["class0"] == 2);
  CHECK(kept["class1"] == 4);
  CHECK(kept["class2"] == 3);
  CHECK(kept["class3"] == 1);

  // Order is preserved: kept paths appear in their original relative order.
  std::map<std::string, size_t> original_pos;
  for (size_t i = 0; i < m.records.size(); ++i)
    original_pos[m.records[i].path] = i;
  for (size_t i = 1; i < sub.records.size(); ++i)
    CHECK(original_pos[sub.records[i - 1].path] <
          original_pos[sub.records[i].path]);
}

TEST_CASE("tiny classes keep at least one record") {
  DatasetManifest m = counted_manifest({1, 9});
  DatasetManifest sub = subsample_fraction(m, 0.1, 5);
  std::map<std::string, int> kept;
  for (const auto& r : sub.records) kept[r.label] += 1;
  CHECK(kept["class0"] == 1);
  CHECK(kept["class1"] == 1);  // 0.9 rounds to 1
}

TEST_CASE("subsampling at full fraction is the identity") {
  DatasetManifest m = tiny_manifest();
  DatasetManifest sub = subsample_fraction(m, 1.0, 11);
  REQUIRE(sub.size() == m.size());
  for (size_t i = 0; i < m.size(); ++i)
    CHECK(sub.records[i].path == m.records[i].path);
}

TEST_CASE("subsampling is seeded and validates its fraction") {
  DatasetManifest m = counted_manifest({30});
  DatasetManifest a = subsample_fraction(m, 0.5, 1);
  DatasetManifest b = subsample_fraction(m, 0.5, 1);
  DatasetManifest c = subsample_fraction(m, 0.5, 2);
  auto paths = [](const DatasetManifest& d) {
    std::vector<std::string> out;
    for (const auto& r : d.records) out.push_back(r.path);
    return out;
  };
  CHECK(paths(a) == paths(b));
  CHECK(paths(a) != paths(c));
  CHECK_THROWS_AS(subsample_fraction(m, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(subsample_fraction(m, 1.5, 0), std::invalid_argument);
}

TEST_CASE("class histograms summarize canonical counts") {
  DatasetManifest m = tiny_manifest();
  ClassHistogram h = class_histogram(m);
  CHECK(h.labels == std::vector<std::string>{"oak", "pine", "fir"});
  CHECK(h.counts == std::vector<int>{3, 1, 2});
  CHECK(h.total == 6);
  CHECK(h.min_count == 1);
  CHECK(h.max_count == 3);
  CHECK(h.mean_count == doctest::Approx(2.0));
}
