#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace patchvote {

struct SampleRecord {
  std::string path;  // relative to the manifest's directory
  std::string label;
  std::string specimen_id;
};

// Ordered records plus the canonical label set (classes indexed by first
// appearance in the manifest).
struct DatasetManifest {
  std::vector<SampleRecord> records;
  std::vector<std::string> label_set;

  size_t size() const { return records.size(); }
  // Canonical class index for a label; throws on unknown labels.
  int label_index(const std::string& label) const;
};

// CSV with header "path,label,specimen_id"; no quoting, so fields must not
// contain commas. Throws on a missing/invalid header, duplicate paths, or an
// empty file.
DatasetManifest load_manifest(const std::string& path);
void save_manifest(const DatasetManifest& m, const std::string& path);

// Rebuild the canonical label set from the records (first appearance order).
DatasetManifest manifest_from_records(std::vector<SampleRecord> records);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;  // parallel to manifest records, values 0..k-1
};

// Within each class, records are shuffled by the seeded generator and dealt
// round-robin to folds (per-class starting fold also seeded), so per-class
// per-fold counts differ by at most one.
FoldAssignment stratified_kfold(const DatasetManifest& m, int k, uint64_t seed);

// Fold file: CSV with header "path,fold"; rows match the manifest by path.
void save_folds(const DatasetManifest& m, const FoldAssignment& folds,
                const std::string& path);
FoldAssignment load_folds(const DatasetManifest& m, const std::string& path);

// Per class, keeps round(fraction * n_c) records (round-half-even, minimum
// 1), selected uniformly without replacement; manifest order is preserved.
DatasetManifest subsample_fraction(const DatasetManifest& m, double fraction,
                                   uint64_t seed);

struct ClassHistogram {
  std::vector<std::string> labels;  // canonical order
  std::vector<int> counts;
  size_t total = 0;
  int min_count = 0;
  int max_count = 0;
  double mean_count = 0.0;
};

ClassHistogram class_histogram(const DatasetManifest& m);

}  // namespace patchvote
