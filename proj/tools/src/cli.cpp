#include "ngds_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ngds/config.hpp"
#include "ngds/dataset.hpp"
#include "ngds/error.hpp"
#include "ngds/mds.hpp"
#include "ngds/model_io.hpp"
#include "ngds/pipeline.hpp"
#include "ngds/synthetic.hpp"
#include "ngds/tensor_io.hpp"

namespace ngds::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Settings shared by the config file and the command line, in the order they
// are applied.
const std::vector<std::string> kSettingKeys = {
    "method", "modes",   "mu",       "dims",       "class-dims",  "angles",
    "alpha-max", "beta-search", "search", "rounds", "weights",     "distance",
    "classifier", "karcher-tol", "karcher-iter", "gs-tol", "seed"};

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf/nan; they go out as strings so nothing is lost silently.
json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt17(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::size_t> parse_dims(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, 'x')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (part.empty() || pos != part.size()) throw InvalidArgument("invalid dims '" + text + "' (expected e.g. 12x12x12)");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string dims_text(const std::vector<std::size_t>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "x" : "") + std::to_string(dims[i]);
  return out;
}

void write_json(const fs::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

json fisher_json(const NModeFisher& f) {
  json modes = json::array();
  for (const auto& r : f.per_mode) {
    modes.push_back({{"mode", r.mode},
                     {"between", num(r.between)},
                     {"within", num(r.within)},
                     {"score", num(r.score)},
                     {"status", std::string(to_string(r.status))}});
  }
  return {{"per_mode", modes},
          {"between", num(f.between)},
          {"within", num(f.within)},
          {"score", num(f.score)},
          {"status", std::string(to_string(f.status))}};
}

// stage,mode,between,within,score,status,weight ("all" rows carry the
// n-mode aggregate and an empty weight).
std::string fisher_csv(const TrainedModel& model) {
  std::ostringstream out;
  out << "stage,mode,between,within,score,status,weight\n";
  auto rows = [&](const char* stage, const NModeFisher& f, bool with_weights) {
    for (std::size_t i = 0; i < f.per_mode.size(); ++i) {
      const auto& r = f.per_mode[i];
      out << stage << "," << r.mode << "," << fmt17(r.between) << "," << fmt17(r.within) << ","
          << fmt17(r.score) << "," << to_string(r.status) << ","
          << (with_weights ? fmt17(model.weights.weights[i]) : "") << "\n";
    }
    out << stage << ",all," << fmt17(f.between) << "," << fmt17(f.within) << "," << fmt17(f.score) << ","
        << to_string(f.status) << ",\n";
  };
  rows("raw", model.fisher_raw, false);
  rows("projected", model.fisher_projected, true);
  return out.str();
}

std::string join_sizes(const std::vector<std::size_t>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
  return out;
}

// mode,round,alpha,beta,score,status,valid; alpha and beta list one value
// per used mode separated by ';'. mode 0 marks exhaustive search.
std::string trace_csv(const std::vector<SearchStep>& trace) {
  std::ostringstream out;
  out << "mode,round,alpha,beta,score,status,valid\n";
  for (const auto& s : trace) {
    out << s.mode << "," << s.round << "," << join_sizes(s.alpha, ';') << "," << join_sizes(s.beta, ';') << ","
        << (s.valid || s.status != FisherStatus::finite ? fmt17(s.score) : "") << "," << to_string(s.status)
        << "," << (s.valid ? 1 : 0) << "\n";
  }
  return out.str();
}

json model_json(const TrainedModel& model) {
  json gds = json::array();
  for (const auto& g : model.gds) {
    json vals = json::array();
    for (Eigen::Index i = 0; i < g.eigvals.size(); ++i) vals.push_back(num(g.eigvals(i)));
    gds.push_back({{"mode", g.mode},
                   {"alpha", g.alpha},
                   {"beta", g.beta},
                   {"rank", g.rank},
                   {"width", g.width()},
                   {"eigenvalues", vals}});
  }
  json weights = json::array();
  for (double w : model.weights.weights) weights.push_back(num(w));
  return {{"method", std::string(to_string(model.config.method))},
          {"modes", model.config.modes},
          {"tensor_dims", model.tensor_dims},
          {"mode_dims", model.mode_dims},
          {"point_dims", model.point_dims},
          {"angle_counts", model.angle_counts},
          {"class_names", model.class_names},
          {"gds", gds},
          {"weights", weights},
          {"fisher", {{"raw", fisher_json(model.fisher_raw)}, {"projected", fisher_json(model.fisher_projected)}}}};
}

struct SelectedData {
  DatasetManifest manifest;
  std::vector<const ManifestEntry*> entries;
  LabeledSet data;
};

std::optional<Split> parse_split_option(const std::string& text) {
  if (text == "all") return std::nullopt;
  if (text == "train") return Split::train;
  if (text == "test") return Split::test;
  throw InvalidArgument("invalid split '" + text + "' (expected train|test|all)");
}

struct FeatureOptions {
  std::vector<std::string> features;     // MODE=DIR
  std::vector<std::string> feature_dims;  // MODE=ROWS

  std::vector<FeatureReplacement> resolve() const {
    auto split_pair = [](const std::string& s, const char* flag) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
        throw InvalidArgument(std::string(flag) + " expects MODE=VALUE, got '" + s + "'");
      }
      int mode = 0;
      try {
        mode = std::stoi(s.substr(0, eq));
      } catch (const std::exception&) {
        throw InvalidArgument(std::string(flag) + ": invalid mode in '" + s + "'");
      }
      return std::pair{mode, s.substr(eq + 1)};
    };
    std::map<int, std::size_t> rows;
    for (const auto& s : feature_dims) {
      auto [mode, value] = split_pair(s, "--feature-dim");
      try {
        rows[mode] = std::stoul(value);
      } catch (const std::exception&) {
        throw InvalidArgument("--feature-dim: invalid row count in '" + s + "'");
      }
    }
    std::vector<FeatureReplacement> out;
    for (const auto& s : features) {
      auto [mode, dir] = split_pair(s, "--feature");
      FeatureReplacement r{mode, dir, std::nullopt};
      if (const auto it = rows.find(mode); it != rows.end()) r.rows = it->second;
      out.push_back(std::move(r));
    }
    for (const auto& [mode, n] : rows) {
      if (std::none_of(out.begin(), out.end(), [m = mode](const auto& r) { return r.mode == m; })) {
        throw InvalidArgument("--feature-dim given for mode " + std::to_string(mode) + " without --feature");
      }
    }
    return out;
  }

  void add_to(CLI::App* app) {
    app->add_option("--feature", features, "Replace a mode's unfolding with precomputed matrices: MODE=DIR")
        ->type_name("MODE=DIR");
    app->add_option("--feature-dim", feature_dims, "Declared feature dimension (row count): MODE=ROWS")
        ->type_name("MODE=ROWS");
  }
};

SelectedData load_selection(const std::string& manifest_path, const std::string& split_text,
                            const FeatureOptions& features) {
  SelectedData out;
  const fs::path path(manifest_path);
  out.manifest = read_manifest(path);
  const auto split = parse_split_option(split_text);
  for (const auto& e : out.manifest.entries) {
    if (!split || e.split == *split) out.entries.push_back(&e);
  }
  if (out.entries.empty()) throw InvalidArgument("manifest selects no samples for split '" + split_text + "'");
  out.data = load_dataset(out.manifest, path.parent_path(), split);
  const auto replacements = features.resolve();
  if (!replacements.empty()) ingest_feature_modes(out.data, out.manifest, split, replacements);
  return out;
}

void check_model_dims(const TrainedModel& model, const DatasetManifest& manifest) {
  if (manifest.dims != model.tensor_dims) {
    throw DimensionError("manifest dims " + dims_text(manifest.dims) + " do not match model dims " +
                         dims_text(model.tensor_dims));
  }
}

// Pipeline settings: defaults, then --config, then flags.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> values;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "key=value settings file (flags override it)");
    for (const auto& key : kSettingKeys) {
      app->add_option("--" + key, values[key], "Pipeline setting '" + key + "'");
    }
  }

  PipelineConfig resolve(const CLI::App* app) const {
    PipelineConfig config;
    if (!config_file.empty()) {
      const auto bytes = read_file(config_file);
      config = parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    }
    for (const auto& key : kSettingKeys) {
      if (app->count("--" + key) > 0) apply_setting(config, key, values.at(key));
    }
    validate(config);
    return config;
  }
};

void print_fisher_table(std::ostream& out, const TrainedModel& model) {
  out << "mode  F_raw                 F_projected           weight\n";
  for (std::size_t i = 0; i < model.config.modes.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-5d %-21s %-21s %s\n", model.config.modes[i],
                  fmt17(model.fisher_raw.per_mode[i].score).c_str(),
                  fmt17(model.fisher_projected.per_mode[i].score).c_str(),
                  fmt17(model.weights.weights[i]).c_str());
    out << line;
  }
  out << "F_n raw " << fmt17(model.fisher_raw.score) << ", projected " << fmt17(model.fisher_projected.score)
      << "\n";
}

// --- gen ------------------------------------------------------------------

struct GenOptions {
  std::string out;
  std::string spec_file;
  std::map<std::string, std::string> values;
};

const std::vector<std::string> kGenKeys = {"classes", "per-class", "dims", "shared-dim", "class-dim",
                                           "noise",   "gain",      "train-fraction", "seed"};

void apply_gen_setting(SynthSpec& spec, const std::string& key, const std::string& value) {
  auto to_size = [&] {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(value, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != value.size() || value.empty() || value.front() == '-') {
      throw InvalidArgument("invalid value '" + value + "' for " + key);
    }
    return static_cast<std::uint64_t>(v);
  };
  auto to_double = [&] {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != value.size()) throw InvalidArgument("invalid value '" + value + "' for " + key);
    return v;
  };
  if (key == "classes") spec.classes = to_size();
  else if (key == "per-class") spec.samples_per_class = to_size();
  else if (key == "dims") spec.dims = parse_dims(value);
  else if (key == "shared-dim") spec.shared_dim = to_size();
  else if (key == "class-dim") spec.class_dim = to_size();
  else if (key == "noise") spec.within_noise = to_double();
  else if (key == "gain") spec.shared_gain = to_double();
  else if (key == "train-fraction") spec.train_fraction = to_double();
  else if (key == "seed") spec.seed = to_size();
  else throw InvalidArgument("unknown generator setting '" + key + "'");
}

std::string format_spec(const SynthSpec& s) {
  std::ostringstream out;
  out << "classes=" << s.classes << "\nper-class=" << s.samples_per_class << "\ndims=" << dims_text(s.dims)
      << "\nshared-dim=" << s.shared_dim << "\nclass-dim=" << s.class_dim << "\nnoise=" << fmt17(s.within_noise)
      << "\ngain=" << fmt17(s.shared_gain) << "\ntrain-fraction=" << fmt17(s.train_fraction)
      << "\nseed=" << s.seed << "\n";
  return out.str();
}

int cmd_gen(const GenOptions& opt, const CLI::App* app, std::ostream& out) {
  SynthSpec spec;
  if (!opt.spec_file.empty()) {
    const auto bytes = read_file(opt.spec_file);
    std::stringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line.erase(0, line.find_first_not_of(" \t\r"));
      line.erase(line.find_last_not_of(" \t\r") + 1);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw InvalidArgument("generator spec line without '=': " + line);
      apply_gen_setting(spec, line.substr(0, eq), line.substr(eq + 1));
    }
  }
  for (const auto& key : kGenKeys) {
    if (app->count("--" + key) > 0) apply_gen_setting(spec, key, opt.values.at(key));
  }
  const auto dataset = generate_synthetic(spec);
  const fs::path dir(opt.out);
  write_synthetic(dir, dataset);
  write_text_atomic(dir / "gen.txt", format_spec(spec));
  out << "wrote " << dataset.data.samples.size() << " samples (" << spec.classes << " classes, dims "
      << dims_text(spec.dims) << ") to " << dir.string() << "\n";
  return kOk;
}

// --- fit / eval / dist / mds / fisher -------------------------------------

struct DataOptions {
  std::string manifest;
  std::string split;
  std::string out;
  FeatureOptions features;
};

int cmd_fit(const DataOptions& opt, const ConfigOptions& cfg, const CLI::App* app, std::ostream& out) {
  const auto config = cfg.resolve(app);
  const auto sel = load_selection(opt.manifest, opt.split, opt.features);
  const auto model = fit(sel.data, config);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_model(dir / "model.nmdl", model);
  write_text_atomic(dir / "config.txt", format_config(model.config));
  write_text_atomic(dir / "fisher.csv", fisher_csv(model));
  write_text_atomic(dir / "search_trace.csv", trace_csv(model.search_trace));
  json summary = model_json(model);
  summary["command"] = "fit";
  summary["manifest"] = opt.manifest;
  summary["split"] = opt.split;
  summary["samples"] = sel.data.samples.size();
  write_json(dir / "summary.json", summary);
  out << "trained " << to_string(model.config.method) << " on " << sel.data.samples.size() << " samples\n";
  print_fisher_table(out, model);
  return kOk;
}

int cmd_eval(const DataOptions& opt, const std::string& model_path, std::ostream& out) {
  const auto model = read_model(model_path);
  const auto sel = load_selection(opt.manifest, opt.split, opt.features);
  check_model_dims(model, sel.manifest);
  const auto metrics = evaluate(model, sel.data);
  const std::size_t m = model.class_count();

  std::ostringstream pred;
  pred << "path,label,predicted,margin";
  for (std::size_t j = 0; j < m; ++j) pred << ",d_" << csv_field(model.class_names[j]);
  pred << "\n";
  std::vector<Classification> results(sel.data.samples.size());
  for (std::size_t s = 0; s < results.size(); ++s) results[s] = classify(model, sel.data.samples[s]);
  for (std::size_t s = 0; s < results.size(); ++s) {
    const auto truth = static_cast<std::size_t>(sel.data.samples[s].label);
    double other = INFINITY;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != truth) other = std::min(other, results[s].class_scores[j]);
    }
    pred << csv_field(sel.entries[s]->path.generic_string()) << "," << truth << "," << results[s].label << ","
         << fmt17(other - results[s].class_scores[truth]);
    for (double d : results[s].class_scores) pred << "," << fmt17(d);
    pred << "\n";
  }

  std::ostringstream conf;
  conf << "true\\predicted";
  for (std::size_t j = 0; j < m; ++j) conf << "," << csv_field(model.class_names[j]);
  conf << "\n";
  for (std::size_t i = 0; i < m; ++i) {
    conf << csv_field(model.class_names[i]);
    for (std::size_t j = 0; j < m; ++j) conf << "," << metrics.confusion[i][j];
    conf << "\n";
  }

  std::ostringstream per_class;
  per_class << "class,name,count,recall\n";
  json recall = json::array();
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t count = 0;
    for (auto c : metrics.confusion[j]) count += c;
    per_class << j << "," << csv_field(model.class_names[j]) << "," << count << "," << fmt17(metrics.recall[j])
              << "\n";
    recall.push_back(num(metrics.recall[j]));
  }

  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_text_atomic(dir / "predictions.csv", pred.str());
  write_text_atomic(dir / "confusion.csv", conf.str());
  write_text_atomic(dir / "metrics.csv", per_class.str());
  write_text_atomic(dir / "fisher.csv", fisher_csv(model));
  write_text_atomic(dir / "config.txt", format_config(model.config));
  json summary = model_json(model);
  summary["command"] = "eval";
  summary["model"] = model_path;
  summary["manifest"] = opt.manifest;
  summary["split"] = opt.split;
  summary["metrics"] = {{"total", metrics.total},
                        {"correct", metrics.correct},
                        {"accuracy", num(metrics.accuracy)},
                        {"mean_margin", num(metrics.mean_margin)},
                        {"recall", recall},
                        {"confusion", metrics.confusion}};
  write_json(dir / "summary.json", summary);
  out << "accuracy " << fmt17(metrics.accuracy) << " (" << metrics.correct << "/" << metrics.total << ")\n";
  return kOk;
}

std::string distance_csv(const Matrix& d, const std::vector<const ManifestEntry*>& entries) {
  std::ostringstream out;
  out << "path";
  for (const auto* e : entries) out << "," << csv_field(e->path.generic_string());
  out << "\n";
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    out << csv_field(entries[static_cast<std::size_t>(i)]->path.generic_string());
    for (Eigen::Index j = 0; j < d.cols(); ++j) out << "," << fmt17(d(i, j));
    out << "\n";
  }
  return out.str();
}

int cmd_dist(const DataOptions& opt, const std::string& model_path, std::ostream& out) {
  const auto model = read_model(model_path);
  const auto sel = load_selection(opt.manifest, opt.split, opt.features);
  check_model_dims(model, sel.manifest);
  const Matrix d = dataset_distances(model, sel.data);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_text_atomic(dir / "distances.csv", distance_csv(d, sel.entries));
  write_text_atomic(dir / "config.txt", format_config(model.config));
  json summary = model_json(model);
  summary["command"] = "dist";
  summary["model"] = model_path;
  summary["manifest"] = opt.manifest;
  summary["split"] = opt.split;
  summary["samples"] = d.rows();
  write_json(dir / "summary.json", summary);
  out << "wrote " << d.rows() << "x" << d.cols() << " distance matrix\n";
  return kOk;
}

int cmd_mds(const DataOptions& opt, const std::string& model_path, std::size_t k, bool with_distances,
            std::ostream& out) {
  const auto model = read_model(model_path);
  const auto sel = load_selection(opt.manifest, opt.split, opt.features);
  check_model_dims(model, sel.manifest);
  const Matrix d = dataset_distances(model, sel.data);
  const auto mds = classical_mds(d, k);

  std::ostringstream coords;
  coords << "path,label";
  for (std::size_t c = 1; c <= k; ++c) coords << ",x" << c;
  coords << "\n";
  for (Eigen::Index i = 0; i < mds.coordinates.rows(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    coords << csv_field(sel.entries[s]->path.generic_string()) << "," << sel.data.samples[s].label;
    for (Eigen::Index c = 0; c < mds.coordinates.cols(); ++c) coords << "," << fmt17(mds.coordinates(i, c));
    coords << "\n";
  }
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  write_text_atomic(dir / "mds.csv", coords.str());
  if (with_distances) write_text_atomic(dir / "distances.csv", distance_csv(d, sel.entries));
  write_text_atomic(dir / "config.txt", format_config(model.config));
  json eig = json::array();
  for (Eigen::Index i = 0; i < mds.eigenvalues.size(); ++i) eig.push_back(num(mds.eigenvalues(i)));
  json summary = model_json(model);
  summary["command"] = "mds";
  summary["model"] = model_path;
  summary["manifest"] = opt.manifest;
  summary["split"] = opt.split;
  summary["mds"] = {{"k", k},
                    {"samples", mds.coordinates.rows()},
                    {"eigenvalues", eig},
                    {"negative_mass", num(mds.negative_mass)}};
  write_json(dir / "summary.json", summary);
  out << "embedded " << mds.coordinates.rows() << " samples in " << k << " dimensions (negative mass "
      << fmt17(mds.negative_mass) << ")\n";
  return kOk;
}

int cmd_fisher(const DataOptions& opt, const ConfigOptions& cfg, const std::string& model_path,
               const CLI::App* app, std::ostream& out) {
  TrainedModel model;
  if (!model_path.empty()) {
    model = read_model(model_path);
  } else {
    if (opt.manifest.empty()) throw InvalidArgument("fisher needs --model or --manifest");
    const auto config = cfg.resolve(app);
    const auto sel = load_selection(opt.manifest, opt.split, opt.features);
    model = fit(sel.data, config);
  }
  if (!opt.out.empty()) {
    const fs::path dir(opt.out);
    fs::create_directories(dir);
    write_text_atomic(dir / "fisher.csv", fisher_csv(model));
    write_text_atomic(dir / "config.txt", format_config(model.config));
    json summary = model_json(model);
    summary["command"] = "fisher";
    if (!model_path.empty()) summary["model"] = model_path;
    else summary["manifest"] = opt.manifest;
    write_json(dir / "summary.json", summary);
  }
  print_fisher_table(out, model);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tensor-subspace classification with n-mode generalized difference subspaces", "ngds"};
  app.require_subcommand(1);

  GenOptions gen_opt;
  auto* gen = app.add_subcommand("gen", "Write a seeded synthetic dataset");
  gen->add_option("--out", gen_opt.out, "Output directory")->required();
  gen->add_option("--spec", gen_opt.spec_file, "key=value generator settings (flags override it)");
  for (const auto& key : kGenKeys) gen->add_option("--" + key, gen_opt.values[key], "Generator setting");

  DataOptions fit_opt{"", "train", "", {}};
  ConfigOptions fit_cfg;
  auto* fit_cmd = app.add_subcommand("fit", "Train a model on a manifest's split");
  fit_cmd->add_option("--manifest", fit_opt.manifest, "Dataset manifest")->required();
  fit_cmd->add_option("--split", fit_opt.split, "train|test|all")->capture_default_str();
  fit_cmd->add_option("--out", fit_opt.out, "Output directory")->required();
  fit_opt.features.add_to(fit_cmd);
  fit_cfg.add_to(fit_cmd);

  DataOptions eval_opt{"", "test", "", {}};
  std::string eval_model;
  auto* eval_cmd = app.add_subcommand("eval", "Classify a split and report metrics");
  eval_cmd->add_option("--model", eval_model, "Model file")->required();
  eval_cmd->add_option("--manifest", eval_opt.manifest, "Dataset manifest")->required();
  eval_cmd->add_option("--split", eval_opt.split, "train|test|all")->capture_default_str();
  eval_cmd->add_option("--out", eval_opt.out, "Output directory")->required();
  eval_opt.features.add_to(eval_cmd);

  DataOptions dist_opt{"", "all", "", {}};
  std::string dist_model;
  auto* dist_cmd = app.add_subcommand("dist", "Export pairwise weighted geodesic distances");
  dist_cmd->add_option("--model", dist_model, "Model file")->required();
  dist_cmd->add_option("--manifest", dist_opt.manifest, "Dataset manifest")->required();
  dist_cmd->add_option("--split", dist_opt.split, "train|test|all")->capture_default_str();
  dist_cmd->add_option("--out", dist_opt.out, "Output directory")->required();
  dist_opt.features.add_to(dist_cmd);

  DataOptions mds_opt{"", "all", "", {}};
  std::string mds_model;
  std::size_t mds_k = 3;
  bool mds_distances = false;
  auto* mds_cmd = app.add_subcommand("mds", "Classical MDS coordinates of the pairwise distances");
  mds_cmd->add_option("--model", mds_model, "Model file")->required();
  mds_cmd->add_option("--manifest", mds_opt.manifest, "Dataset manifest")->required();
  mds_cmd->add_option("--split", mds_opt.split, "train|test|all")->capture_default_str();
  mds_cmd->add_option("--out", mds_opt.out, "Output directory")->required();
  mds_cmd->add_option("--k", mds_k, "Embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
  mds_cmd->add_flag("--distances", mds_distances, "Also write distances.csv");
  mds_opt.features.add_to(mds_cmd);

  DataOptions fisher_opt{"", "train", "", {}};
  ConfigOptions fisher_cfg;
  std::string fisher_model;
  auto* fisher_cmd = app.add_subcommand("fisher", "Per-mode and n-mode Fisher scores");
  fisher_cmd->add_option("--model", fisher_model, "Report the diagnostics stored in a model");
  fisher_cmd->add_option("--manifest", fisher_opt.manifest, "Fit on this manifest instead");
  fisher_cmd->add_option("--split", fisher_opt.split, "train|test|all")->capture_default_str();
  fisher_cmd->add_option("--out", fisher_opt.out, "Output directory (optional)");
  fisher_opt.features.add_to(fisher_cmd);
  fisher_cfg.add_to(fisher_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_opt, gen, out);
    if (fit_cmd->parsed()) return cmd_fit(fit_opt, fit_cfg, fit_cmd, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_opt, eval_model, out);
    if (dist_cmd->parsed()) return cmd_dist(dist_opt, dist_model, out);
    if (mds_cmd->parsed()) return cmd_mds(mds_opt, mds_model, mds_k, mds_distances, out);
    if (fisher_cmd->parsed()) return cmd_fisher(fisher_opt, fisher_cfg, fisher_model, fisher_cmd, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace ngds::cli
