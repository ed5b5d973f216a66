#include "ngds/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "ngds/error.hpp"
#include "ngds/tensor_io.hpp"

namespace ngds {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return out;
}

std::size_t parse_size(std::string_view text, std::size_t line_no) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("manifest line " + std::to_string(line_no) + ": invalid number '" +
                      std::string(text) + "'");
  }
  return v;
}

std::string format_dims(const std::vector<std::size_t>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(dims[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw FormatError("invalid split '" + std::string(text) + "' (expected train|test)");
}

std::vector<std::size_t> DatasetManifest::class_counts(std::optional<Split> split) const {
  std::vector<std::size_t> counts(class_count(), 0);
  for (const auto& e : entries) {
    if (split && e.split != *split) continue;
    if (e.label >= 0 && static_cast<std::size_t>(e.label) < counts.size()) {
      ++counts[static_cast<std::size_t>(e.label)];
    }
  }
  return counts;
}

void validate(const DatasetManifest& manifest) {
  if (manifest.dims.size() < 2 || manifest.dims.size() > kMaxTensorOrder) {
    throw FormatError("manifest dims must list 2.." + std::to_string(kMaxTensorOrder) + " extents");
  }
  for (auto d : manifest.dims) {
    if (d == 0) throw FormatError("manifest dims must be positive");
  }
  std::set<std::string> paths;
  int max_label = -1;
  for (const auto& e : manifest.entries) {
    if (!paths.insert(e.path.generic_string()).second) {
      throw FormatError("duplicate manifest path " + e.path.generic_string());
    }
    if (e.label < 0) throw FormatError("negative label for " + e.path.generic_string());
    max_label = std::max(max_label, e.label);
  }
  const auto m = static_cast<std::size_t>(max_label + 1);
  if (manifest.class_names.size() != m) {
    throw FormatError("manifest declares " + std::to_string(manifest.class_names.size()) +
                      " class names but labels span 0.." + std::to_string(max_label));
  }
  std::vector<bool> seen(m, false);
  for (const auto& e : manifest.entries) seen[static_cast<std::size_t>(e.label)] = true;
  for (std::size_t j = 0; j < m; ++j) {
    if (!seen[j]) throw FormatError("labels are not dense: class " + std::to_string(j) + " has no entries");
  }
}

DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest manifest;
  std::optional<std::vector<std::string>> names;
  std::size_t line_no = 0;
  int max_label = -1;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = trim(body.substr(0, colon));
      const auto value = trim(body.substr(colon + 1));
      if (key == "dims") {
        manifest.dims.clear();
        for (auto part : split_on(value, 'x')) manifest.dims.push_back(parse_size(part, line_no));
      } else if (key == "classes") {
        names.emplace();
        for (auto part : split_on(value, ',')) names->emplace_back(part);
      }
      continue;
    }
    const auto fields = split_on(line, ',');
    if (fields.size() != 3 || fields[0].empty()) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected path,label,split");
    }
    ManifestEntry entry;
    entry.path = std::filesystem::path(std::string(fields[0]));
    entry.label = static_cast<int>(parse_size(fields[1], line_no));
    try {
      entry.split = parse_split(fields[2]);
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    max_label = std::max(max_label, entry.label);
    manifest.entries.push_back(std::move(entry));
  }
  if (manifest.dims.empty()) throw FormatError("manifest is missing the '# dims:' header");
  if (names) {
    manifest.class_names = std::move(*names);
  } else {
    for (int j = 0; j <= max_label; ++j) manifest.class_names.push_back(std::to_string(j));
  }
  validate(manifest);
  return manifest;
}

std::string format_manifest(const DatasetManifest& manifest) {
  std::ostringstream out;
  out << "# dims: " << format_dims(manifest.dims) << "\n";
  out << "# classes: ";
  for (std::size_t j = 0; j < manifest.class_names.size(); ++j) {
    if (j) out << ",";
    out << manifest.class_names[j];
  }
  out << "\n";
  for (const auto& e : manifest.entries) {
    out << e.path.generic_string() << "," << e.label << "," << to_string(e.split) << "\n";
  }
  return out.str();
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  validate(manifest);
  write_text_atomic(path, format_manifest(manifest));
}

Matrix mode_matrix(const Sample& sample, int mode) {
  if (const auto it = sample.mode_overrides.find(mode); it != sample.mode_overrides.end()) {
    return it->second;
  }
  return unfold(sample.tensor, mode).values;
}

std::size_t mode_rows(const Sample& sample, int mode) {
  if (const auto it = sample.mode_overrides.find(mode); it != sample.mode_overrides.end()) {
    return static_cast<std::size_t>(it->second.rows());
  }
  return sample.tensor.extent(mode);
}

LabeledSet load_dataset(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                        std::optional<Split> split) {
  validate(manifest);
  LabeledSet out;
  out.dims = manifest.dims;
  out.class_names = manifest.class_names;
  for (const auto& e : manifest.entries) {
    if (split && e.split != *split) continue;
    DenseTensor t = read_tensor(base_dir / e.path);
    if (t.dims() != manifest.dims) {
      throw DimensionError(e.path.generic_string() + ": tensor dims " + format_dims(t.dims()) +
                           " do not match manifest dims " + format_dims(manifest.dims));
    }
    out.samples.push_back(Sample{std::move(t), e.label, {}});
  }
  return out;
}

void ingest_feature_modes(LabeledSet& dataset, const DatasetManifest& manifest,
                          std::optional<Split> split,
                          std::span<const FeatureReplacement> replacements) {
  std::vector<const ManifestEntry*> entries;
  for (const auto& e : manifest.entries) {
    if (!split || e.split == *split) entries.push_back(&e);
  }
  if (entries.size() != dataset.samples.size()) {
    throw DimensionError("dataset does not match the manifest selection");
  }
  for (const auto& rep : replacements) {
    if (rep.mode < 1 || static_cast<std::size_t>(rep.mode) > manifest.dims.size()) {
      throw InvalidArgument("feature replacement mode " + std::to_string(rep.mode) + " out of range");
    }
    std::optional<std::size_t> expected = rep.rows;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto file = rep.directory / entries[i]->path.filename();
      if (!std::filesystem::exists(file)) {
        throw FormatError("missing mode-" + std::to_string(rep.mode) + " feature file " + file.string());
      }
      Matrix features = read_matrix(file);
      const auto rows = static_cast<std::size_t>(features.rows());
      if (!expected) expected = rows;
      if (rows != *expected) {
        throw DimensionError("mode " + std::to_string(rep.mode) + " feature matrix " + file.string() +
                             ": expected " + std::to_string(*expected) + " rows, got " +
                             std::to_string(rows));
      }
      dataset.samples[i].mode_overrides[rep.mode] = std::move(features);
    }
  }
}

}  // namespace ngds
