#include "patchvote/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "patchvote/rng.hpp"
#include "patchvote/strings.hpp"

namespace patchvote {

int DatasetManifest::label_index(const std::string& label) const {
  for (size_t i = 0; i < label_set.size(); ++i)
    if (label_set[i] == label) return int(i);
  throw std::invalid_argument("unknown label '" + label + "'");
}

namespace {

// Read non-empty lines, tolerating trailing \r from CRLF files.
std::vector<std::string> read_lines(const std::string& path,
                                    const std::string& what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + what + " '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

DatasetManifest manifest_from_records(std::vector<SampleRecord> records) {
  DatasetManifest m;
  m.records = std::move(records);
  std::unordered_set<std::string> seen;
  for (const SampleRecord& r : m.records) {
    if (r.label.empty())
      throw std::runtime_error("record '" + r.path + "' has an empty label");
    if (seen.insert(r.label).second) m.label_set.push_back(r.label);
  }
  return m;
}

DatasetManifest load_manifest(const std::string& path) {
  std::vector<std::string> lines = read_lines(path, "manifest");
  if (lines.empty())
    throw std::runtime_error("manifest '" + path + "' is empty");
  if (lines[0] != "path,label,specimen_id")
    throw std::runtime_error("manifest '" + path +
                             "' must start with header path,label,specimen_id");
  std::vector<SampleRecord> records;
  std::unordered_set<std::string> paths;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = split(lines[i], ',');
    if (f.size() != 3)
      throw std::runtime_error("manifest '" + path + "' line " +
                               std::to_string(i + 1) + ": expected 3 fields");
    if (f[0].empty())
      throw std::runtime_error("manifest '" + path + "' line " +
                               std::to_string(i + 1) + ": empty path");
    if (!paths.insert(f[0]).second)
      throw std::runtime_error("manifest '" + path + "': duplicate path '" +
                               f[0] + "'");
    records.push_back({f[0], f[1], f[2]});
  }
  if (records.empty())
    throw std::runtime_error("manifest '" + path + "' has no records");
  try {
    return manifest_from_records(std::move(records));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("manifest '" + path + "': " + e.what());
  }
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << "path,label,specimen_id\n";
  for (const SampleRecord& r : m.records)
    out << r.path << ',' << r.label << ',' << r.specimen_id << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
}

FoldAssignment stratified_kfold(const DatasetManifest& m, int k,
                                uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be >= 2");
  if (m.records.empty()) throw std::invalid_argument("empty manifest");

  FoldAssignment assignment;
  assignment.k = k;
  assignment.fold_of.assign(m.records.size(), -1);

  Rng root(seed);
  for (size_t c = 0; c < m.label_set.size(); ++c) {
    std::vector<size_t> members;
    for (size_t i = 0; i < m.records.size(); ++i)
      if (m.records[i].label == m.label_set[c]) members.push_back(i);
    Rng r = root.stream("kfold.class", c);
    r.shuffle(members);
    // A seeded starting fold balances fold totals across classes whose
    // counts are not multiples of k.
    int start = int(r.below(uint64_t(k)));
    for (size_t p = 0; p < members.size(); ++p)
      assignment.fold_of[members[p]] = int((p + size_t(start)) % size_t(k));
  }
  return assignment;
}

void save_folds(const DatasetManifest& m, const FoldAssignment& folds,
                const std::string& path) {
  if (folds.fold_of.size() != m.records.size())
    throw std::invalid_argument("fold assignment does not match manifest");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write folds '" + path + "'");
  out << "path,fold\n";
  for (size_t i = 0; i < m.records.size(); ++i)
    out << m.records[i].path << ',' << folds.fold_of[i] << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot write folds '" + path + "'");
}

FoldAssignment load_folds(const DatasetManifest& m, const std::string& path) {
  std::vector<std::string> lines = read_lines(path, "fold file");
  if (lines.empty() || lines[0] != "path,fold")
    throw std::runtime_error("fold file '" + path +
                             "' must start with header path,fold");
  std::unordered_map<std::string, int> by_path;
  int k = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f = split(lines[i], ',');
    if (f.size() != 2)
      throw std::runtime_error("fold file '" + path + "' line " +
                               std::to_string(i + 1) + ": expected 2 fields");
    int fold = parse_int(f[1], "fold index");
    if (fold < 0)
      throw std::runtime_error("fold file '" + path + "': negative fold");
    if (!by_path.emplace(f[0], fold).second)
      throw std::runtime_error("fold file '" + path + "': duplicate path '" +
                               f[0] + "'");
    k = std::max(k, fold + 1);
  }
  FoldAssignment assignment;
  assignment.k = k;
  assignment.fold_of.reserve(m.records.size());
  for (const SampleRecord& r : m.records) {
    auto it = by_path.find(r.path);
    if (it == by_path.end())
      throw std::runtime_error("fold file '" + path + "' is missing '" +
                               r.path + "'");
    assignment.fold_of.push_back(it->second);
  }
  return assignment;
}

namespace {

// Round-half-even: with dozens of classes landing exactly on .5, half-up
// rounding would bias every class upward and inflate the kept total.
size_t round_half_even(double v) {
  double lo = std::floor(v);
  double frac = v - lo;
  if (frac > 0.5) return size_t(lo) + 1;
  if (frac < 0.5) return size_t(lo);
  return size_t(lo) + (size_t(lo) % 2);
}

}  // namespace

DatasetManifest subsample_fraction(const DatasetManifest& m, double fraction,
                                   uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("fraction must be in (0, 1]");
  if (fraction == 1.0) return m;

  Rng root(seed);
  std::vector<char> keep(m.records.size(), 0);
  for (size_t c = 0; c < m.label_set.size(); ++c) {
    std::vector<size_t> members;
    for (size_t i = 0; i < m.records.size(); ++i)
      if (m.records[i].label == m.label_set[c]) members.push_back(i);
    size_t want = std::max<size_t>(1, round_half_even(fraction * double(members.size())));
    Rng r = root.stream("subsample.class", c);
    r.shuffle(members);
    for (size_t p = 0; p < want && p < members.size(); ++p) keep[members[p]] = 1;
  }
  std::vector<SampleRecord> records;
  for (size_t i = 0; i < m.records.size(); ++i)
    if (keep[i]) records.push_back(m.records[i]);
  return manifest_from_records(std::move(records));
}

ClassHistogram class_histogram(const DatasetManifest& m) {
  ClassHistogram h;
  h.labels = m.label_set;
  h.counts.assign(m.label_set.size(), 0);
  for (const SampleRecord& r : m.records) h.counts[m.label_index(r.label)] += 1;
  h.total = m.records.size();
  if (!h.counts.empty()) {
    h.min_count = *std::min_element(h.counts.begin(), h.counts.end());
    h.max_count = *std::max_element(h.counts.begin(), h.counts.end());
    h.mean_count = double(h.total) / double(h.counts.size());
  }
  return h;
}

}  // namespace patchvote
