#include "ngds/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>

#include "ngds/error.hpp"
#include "ngds/parallel.hpp"

namespace ngds {

namespace {

std::string dims_text(std::span<const std::size_t> dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(dims[i]);
  }
  return out;
}

void check_aligned(const std::vector<std::size_t>& values, std::size_t modes, const char* name) {
  if (!values.empty() && values.size() != modes) {
    throw InvalidArgument(std::string(name) + " lists " + std::to_string(values.size()) +
                          " entries for " + std::to_string(modes) + " modes");
  }
}

std::size_t entry_or_zero(const std::vector<std::size_t>& values, std::size_t i) {
  return values.empty() ? 0 : values[i];
}

KarcherOptions karcher_options(const PipelineConfig& config) {
  return {config.karcher_tol, config.karcher_max_iter};
}

std::size_t label_index(const std::optional<int>& label, std::size_t class_count) {
  if (!label || *label < 0 || static_cast<std::size_t>(*label) >= class_count) {
    throw InvalidArgument("point label missing or outside 0.." + std::to_string(class_count - 1));
  }
  return static_cast<std::size_t>(*label);
}

// Projects one mode of every point; nullopt when any projection collapses.
// Results are truncated to the smallest projected dimension so all parts of
// the mode share one Grassmannian.
std::optional<std::vector<Subspace>> project_mode(std::span<const ProductPoint> points,
                                                  std::size_t part, const GdsBasis& gds,
                                                  double tol) {
  std::vector<std::optional<Subspace>> projected(points.size());
  std::atomic<bool> collapsed = false;
  parallel_for(points.size(), [&](std::size_t s) {
    try {
      projected[s] = project_onto_gds(gds, points[s].parts[part], tol);
    } catch (const NumericalError&) {
      collapsed = true;
    }
  });
  if (collapsed) return std::nullopt;
  std::size_t common = std::numeric_limits<std::size_t>::max();
  for (const auto& p : projected) common = std::min(common, p->dim());
  std::vector<Subspace> out;
  out.reserve(points.size());
  for (auto& p : projected) out.push_back(p->dim() == common ? std::move(*p) : p->leading(common));
  return out;
}

std::vector<std::vector<Subspace>> group_by_class(std::span<const ProductPoint> points,
                                                  std::span<const Subspace> parts,
                                                  std::size_t class_count) {
  std::vector<std::vector<Subspace>> groups(class_count);
  for (std::size_t s = 0; s < points.size(); ++s) {
    groups[label_index(points[s].label, class_count)].push_back(parts[s]);
  }
  return groups;
}

std::vector<Subspace> mode_parts(std::span<const ProductPoint> points, std::size_t part) {
  std::vector<Subspace> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.parts[part]);
  return out;
}

std::string describe(const SearchStep& step) {
  std::string out;
  for (std::size_t i = 0; i < step.alpha.size(); ++i) {
    if (i) out += ", ";
    out += "mode part " + std::to_string(i + 1) + " alpha=" + std::to_string(step.alpha[i]) +
           " beta=" + std::to_string(step.beta[i]);
  }
  return out;
}

// Evaluates and caches per-mode Fisher reports of GDS-projected training
// subspaces for each (mode, alpha, beta).
class CandidateScorer {
 public:
  CandidateScorer(std::span<const GramSpectrum> spectra, std::span<const ProductPoint> points,
                  std::size_t class_count, const PipelineConfig& config)
      : spectra_(spectra), points_(points), class_count_(class_count), config_(config) {}

  std::optional<FisherReport> mode_report(std::size_t part, std::size_t alpha, std::size_t beta) {
    const auto key = std::make_tuple(part, alpha, beta);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    const GdsBasis gds = select_gds(spectra_[part], alpha, beta);
    std::optional<FisherReport> report;
    if (auto projected = project_mode(points_, part, gds, config_.gram_schmidt_tol)) {
      const auto groups = group_by_class(points_, *projected, class_count_);
      report = fisher_mode(spectra_[part].mode, groups, karcher_options(config_));
    }
    cache_.emplace(key, report);
    return report;
  }

  SearchStep evaluate(int mode, std::size_t round, const std::vector<std::size_t>& alpha,
                      const std::vector<std::size_t>& beta) {
    SearchStep step{mode, round, alpha, beta, 0.0, FisherStatus::finite, true};
    std::vector<FisherReport> reports;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      auto r = mode_report(i, alpha[i], beta[i]);
      if (!r) {
        step.valid = false;
        return step;
      }
      reports.push_back(*r);
    }
    const auto combined = nmode_fisher(reports);
    step.score = combined.score;
    step.status = combined.status;
    // A non-finite ratio cannot be ranked, and a mode whose own ratio is
    // non-finite has no usable weight. Such candidates stay in the trace.
    if (combined.degenerate()) step.valid = false;
    for (const auto& r : reports) {
      if (r.degenerate()) step.valid = false;
    }
    return step;
  }

  NModeFisher fisher_at(const std::vector<std::size_t>& alpha, const std::vector<std::size_t>& beta) {
    std::vector<FisherReport> reports;
    for (std::size_t i = 0; i < alpha.size(); ++i) reports.push_back(*mode_report(i, alpha[i], beta[i]));
    return nmode_fisher(reports);
  }

 private:
  std::span<const GramSpectrum> spectra_;
  std::span<const ProductPoint> points_;
  std::size_t class_count_;
  const PipelineConfig& config_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::optional<FisherReport>> cache_;
};

struct Candidate {
  std::size_t alpha;
  std::size_t beta;
};

std::vector<Candidate> mode_candidates(const GramSpectrum& spectrum, const PipelineConfig& config) {
  if (spectrum.rank == 0) {
    throw NumericalError("mode-" + std::to_string(spectrum.mode) + " Gram matrix has rank 0");
  }
  const std::size_t alpha_limit =
      config.alpha_max == 0 ? spectrum.rank : std::min(config.alpha_max, spectrum.rank);
  std::vector<Candidate> out;
  for (std::size_t a = 1; a <= alpha_limit; ++a) {
    if (config.beta_search) {
      for (std::size_t b = a; b <= spectrum.rank; ++b) out.push_back({a, b});
    } else {
      out.push_back({a, spectrum.rank});
    }
  }
  return out;
}

bool better(const SearchStep& candidate, const SearchStep* best) {
  return candidate.valid && (best == nullptr || candidate.score > best->score);
}

}  // namespace

std::vector<int> resolve_modes(const PipelineConfig& config, std::size_t order) {
  std::vector<int> modes = config.modes;
  if (modes.empty()) {
    for (std::size_t k = 1; k <= order; ++k) modes.push_back(static_cast<int>(k));
  }
  for (int m : modes) {
    if (m < 1 || static_cast<std::size_t>(m) > order) {
      throw InvalidArgument("mode " + std::to_string(m) + " out of range for order-" +
                            std::to_string(order) + " tensors");
    }
  }
  return modes;
}

ProductPoint extract_sample_point(const Sample& sample, std::span<const int> modes,
                                  std::span<const std::size_t> mode_dims) {
  if (modes.size() != mode_dims.size()) {
    throw InvalidArgument("one subspace dimension is needed per mode");
  }
  ProductPoint point;
  point.parts.reserve(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    point.parts.push_back(basis_from_unfolding(mode_matrix(sample, modes[i]), FixedDim{mode_dims[i]}));
  }
  if (sample.label >= 0) point.label = sample.label;
  return point;
}

ProductPoint extract_sample_point(const DenseTensor& tensor, const PipelineConfig& config) {
  const auto modes = resolve_modes(config, tensor.order());
  if (config.mode_dims.size() != modes.size()) {
    throw InvalidArgument("extracting a point needs fixed dims for every used mode");
  }
  return extract_sample_point(Sample{tensor, -1, {}}, modes, config.mode_dims);
}

std::size_t median_energy_dim(std::span<const Sample> samples, int mode, double mu) {
  if (samples.empty()) throw InvalidArgument("median dimension of an empty sample set");
  std::vector<std::size_t> dims(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) {
    const auto spectrum = autocorrelation_spectrum(mode_matrix(samples[s], mode));
    if (spectrum.values.size() == 0) {
      throw NumericalError("sample " + std::to_string(s) + " has an all-zero mode-" +
                           std::to_string(mode) + " matrix");
    }
    dims[s] = select_dim(spectrum, mu);
  });
  std::sort(dims.begin(), dims.end());
  return dims[(dims.size() - 1) / 2];
}

NModeFisher points_fisher(std::span<const ProductPoint> points, std::size_t class_count,
                          std::span<const int> modes, const KarcherOptions& options) {
  std::vector<FisherReport> reports;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto parts = mode_parts(points, i);
    const auto groups = group_by_class(points, parts, class_count);
    reports.push_back(fisher_mode(modes[i], groups, options));
  }
  return nmode_fisher(reports);
}

GdsSelection optimize_gds_dims(std::span<const GramSpectrum> spectra,
                               std::span<const ProductPoint> train_points,
                               std::size_t class_count, const PipelineConfig& config) {
  if (class_count < 2) throw InvalidArgument("GDS dimension search needs at least 2 classes");
  if (spectra.empty()) throw InvalidArgument("GDS dimension search needs at least one mode");
  for (const auto& p : train_points) {
    if (p.parts.size() != spectra.size()) {
      throw DimensionError("training points do not match the number of GDS modes");
    }
  }
  const std::size_t n = spectra.size();
  std::vector<std::vector<Candidate>> candidates;
  for (const auto& s : spectra) candidates.push_back(mode_candidates(s, config));

  CandidateScorer scorer(spectra, train_points, class_count, config);
  GdsSelection out;
  std::vector<std::size_t> alpha(n, 1);
  std::vector<std::size_t> beta(n);
  for (std::size_t i = 0; i < n; ++i) beta[i] = spectra[i].rank;

  if (config.search == GdsSearch::exhaustive) {
    if (n > 3) throw InvalidArgument("exhaustive GDS search supports at most 3 modes");
    std::size_t combos = 1;
    for (const auto& c : candidates) combos *= c.size();
    if (combos > 100000) {
      throw InvalidArgument("exhaustive GDS search space too large (" + std::to_string(combos) +
                            " combinations); lower alpha-max");
    }
    std::vector<std::size_t> odometer(n, 0);
    std::optional<SearchStep> best;
    for (std::size_t c = 0; c < combos; ++c) {
      std::vector<std::size_t> a(n);
      std::vector<std::size_t> b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = candidates[i][odometer[i]].alpha;
        b[i] = candidates[i][odometer[i]].beta;
      }
      auto step = scorer.evaluate(0, 0, a, b);
      out.trace.push_back(step);
      if (better(step, best ? &*best : nullptr)) best = step;
      for (std::size_t i = n; i-- > 0;) {
        if (++odometer[i] < candidates[i].size()) break;
        odometer[i] = 0;
      }
    }
    if (!best) {
      throw NumericalError("degenerate n-mode Fisher score: no GDS candidate gave a finite ratio (last: " +
                           describe(out.trace.back()) + ")");
    }
    alpha = best->alpha;
    beta = best->beta;
  } else {
    for (std::size_t round = 1; round <= config.search_rounds; ++round) {
      for (std::size_t i = 0; i < n; ++i) {
        std::optional<SearchStep> best;
        for (const auto& cand : candidates[i]) {
          auto a = alpha;
          auto b = beta;
          a[i] = cand.alpha;
          b[i] = cand.beta;
          auto step = scorer.evaluate(spectra[i].mode, round, a, b);
          out.trace.push_back(step);
          if (better(step, best ? &*best : nullptr)) best = step;
        }
        if (!best) {
          throw NumericalError("degenerate n-mode Fisher score: no GDS candidate for mode " +
                               std::to_string(spectra[i].mode) + " gave a finite ratio (last: " +
                               describe(out.trace.back()) + ")");
        }
        alpha[i] = best->alpha[i];
        beta[i] = best->beta[i];
      }
    }
  }

  out.alpha = alpha;
  out.beta = beta;
  out.fisher = scorer.fisher_at(alpha, beta);
  if (!(out.fisher.between > kFisherZeroTolerance)) {
    throw NumericalError("degenerate n-mode Fisher score: no between-class separation at the "
                         "selected GDS dimensions");
  }
  return out;
}

TrainedModel fit(const LabeledSet& dataset, const PipelineConfig& input_config) {
  validate(input_config);
  const std::size_t m = dataset.class_count();
  if (m < 2) throw InvalidArgument("training needs at least 2 classes");
  if (dataset.samples.empty()) throw InvalidArgument("training set is empty");
  std::vector<std::size_t> per_class(m, 0);
  for (const auto& s : dataset.samples) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= m) {
      throw InvalidArgument("sample label " + std::to_string(s.label) + " outside 0.." +
                            std::to_string(m - 1));
    }
    if (s.tensor.dims() != dataset.dims) {
      throw DimensionError("sample dims " + dims_text(s.tensor.dims()) + " do not match dataset dims " +
                           dims_text(dataset.dims));
    }
    ++per_class[static_cast<std::size_t>(s.label)];
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (per_class[j] == 0) {
      throw InvalidArgument("class " + dataset.class_names[j] + " has no training samples");
    }
  }

  TrainedModel model;
  model.config = input_config;
  model.config.modes = resolve_modes(input_config, dataset.dims.size());
  const auto& modes = model.config.modes;
  const std::size_t n = modes.size();
  check_aligned(input_config.mode_dims, n, "dims");
  check_aligned(input_config.class_dims, n, "class-dims");
  check_aligned(input_config.angle_counts, n, "angles");
  const auto& config = model.config;
  model.tensor_dims = dataset.dims;
  model.class_names = dataset.class_names;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rows = mode_rows(dataset.samples.front(), modes[i]);
    for (const auto& s : dataset.samples) {
      if (mode_rows(s, modes[i]) != rows) {
        throw DimensionError("mode " + std::to_string(modes[i]) + " matrices have differing row counts");
      }
    }
    model.ambient_dims.push_back(rows);
    std::size_t k = entry_or_zero(input_config.mode_dims, i);
    if (k == 0) k = median_energy_dim(dataset.samples, modes[i], config.energy_mu);
    model.mode_dims.push_back(k);
  }
  model.config.mode_dims = model.mode_dims;

  std::vector<ProductPoint> raw(dataset.samples.size());
  parallel_for(raw.size(), [&](std::size_t s) {
    raw[s] = extract_sample_point(dataset.samples[s], modes, model.mode_dims);
  });
  const auto karcher = karcher_options(config);
  model.fisher_raw = points_fisher(raw, m, modes, karcher);

  std::vector<ProductPoint> points;
  if (config.uses_gds()) {
    std::vector<GramSpectrum> spectra;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t class_dim = entry_or_zero(input_config.class_dims, i);
      if (class_dim == 0) class_dim = model.mode_dims[i];
      std::vector<Subspace> class_subspaces;
      for (std::size_t j = 0; j < m; ++j) {
        std::vector<Matrix> blocks;
        Eigen::Index cols = 0;
        for (const auto& s : dataset.samples) {
          if (static_cast<std::size_t>(s.label) != j) continue;
          blocks.push_back(mode_matrix(s, modes[i]));
          cols += blocks.back().cols();
        }
        Matrix joined(static_cast<Eigen::Index>(model.ambient_dims[i]), cols);
        Eigen::Index at = 0;
        for (const auto& b : blocks) {
          joined.middleCols(at, b.cols()) = b;
          at += b.cols();
        }
        class_subspaces.push_back(basis_from_unfolding(joined, FixedDim{class_dim}));
      }
      spectra.push_back(decompose(mode_gram(class_subspaces, modes[i])));
    }
    const auto selection = optimize_gds_dims(spectra, raw, m, config);
    model.search_trace = selection.trace;
    for (std::size_t i = 0; i < n; ++i) {
      model.gds.push_back(select_gds(spectra[i], selection.alpha[i], selection.beta[i]));
    }
    points = raw;
    for (std::size_t i = 0; i < n; ++i) {
      auto projected = project_mode(raw, i, model.gds[i], config.gram_schmidt_tol);
      if (!projected) {
        throw NumericalError("projection onto the mode-" + std::to_string(modes[i]) +
                             " GDS collapsed a training subspace");
      }
      for (std::size_t s = 0; s < points.size(); ++s) points[s].parts[i] = std::move((*projected)[s]);
      model.point_dims.push_back(points.front().parts[i].dim());
    }
    model.fisher_projected = points_fisher(points, m, modes, karcher);
  } else {
    points = raw;
    model.point_dims = model.mode_dims;
    model.fisher_projected = model.fisher_raw;
  }

  if (config.uses_fisher_weights()) {
    std::vector<double> scores;
    for (const auto& r : model.fisher_projected.per_mode) {
      if (r.degenerate()) {
        throw NumericalError("mode " + std::to_string(r.mode) + " Fisher score is " +
                             std::string(to_string(r.status)) + "; cannot derive mode weights");
      }
      scores.push_back(r.score);
    }
    model.weights = mode_weights(scores);
  } else {
    model.weights = uniform_weights(n);
  }

  for (std::size_t i = 0; i < n; ++i) model.angle_counts.push_back(entry_or_zero(input_config.angle_counts, i));
  model.config.angle_counts = model.angle_counts;

  for (std::size_t j = 0; j < m; ++j) {
    ProductPoint mean;
    mean.label = static_cast<int>(j);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Subspace> members;
      for (const auto& p : points) {
        if (*p.label == static_cast<int>(j)) members.push_back(p.parts[i]);
      }
      mean.parts.push_back(karcher_mean(members, karcher).mean);
    }
    model.class_means.push_back(std::move(mean));
  }
  model.references = std::move(points);
  return model;
}

ProductPoint embed(const TrainedModel& model, const Sample& sample) {
  if (sample.tensor.dims() != model.tensor_dims) {
    throw DimensionError("tensor dims " + dims_text(sample.tensor.dims()) +
                         " do not match model dims " + dims_text(model.tensor_dims));
  }
  const auto& modes = model.config.modes;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (mode_rows(sample, modes[i]) != model.ambient_dims[i]) {
      throw DimensionError("mode " + std::to_string(modes[i]) + " matrix has " +
                           std::to_string(mode_rows(sample, modes[i])) + " rows, model expects " +
                           std::to_string(model.ambient_dims[i]));
    }
  }
  ProductPoint point = extract_sample_point(sample, modes, model.mode_dims);
  if (model.has_gds()) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      Subspace projected = project_onto_gds(model.gds[i], point.parts[i], model.config.gram_schmidt_tol);
      if (projected.dim() > model.point_dims[i]) projected = projected.leading(model.point_dims[i]);
      point.parts[i] = std::move(projected);
    }
  }
  return point;
}

Classification classify_point(const TrainedModel& model, const ProductPoint& point) {
  const auto& refs =
      model.config.classifier == Classifier::nn ? model.references : model.class_means;
  Classification out;
  out.class_scores.assign(model.class_count(), std::numeric_limits<double>::infinity());
  for (const auto& ref : refs) {
    const auto counts = clip_angle_counts(point, ref, model.angle_counts);
    const double d = weighted_geodesic(point, ref, model.weights, counts, model.config.distance);
    auto& slot = out.class_scores[static_cast<std::size_t>(*ref.label)];
    slot = std::min(slot, d);
  }
  for (std::size_t j = 0; j < out.class_scores.size(); ++j) {
    if (out.label < 0 || out.class_scores[j] < out.class_scores[static_cast<std::size_t>(out.label)]) {
      out.label = static_cast<int>(j);
    }
  }
  return out;
}

Classification classify(const TrainedModel& model, const Sample& sample) {
  return classify_point(model, embed(model, sample));
}

Classification classify(const TrainedModel& model, const DenseTensor& tensor) {
  return classify(model, Sample{tensor, -1, {}});
}

Metrics evaluate(const TrainedModel& model, const LabeledSet& dataset) {
  if (dataset.samples.empty()) throw InvalidArgument("cannot evaluate on an empty dataset");
  const std::size_t m = model.class_count();
  std::vector<Classification> results(dataset.samples.size());
  parallel_for(results.size(), [&](std::size_t s) { results[s] = classify(model, dataset.samples[s]); });

  Metrics out;
  out.total = results.size();
  out.confusion.assign(m, std::vector<std::size_t>(m, 0));
  double margin_sum = 0.0;
  for (std::size_t s = 0; s < results.size(); ++s) {
    const int truth = dataset.samples[s].label;
    if (truth < 0 || static_cast<std::size_t>(truth) >= m) {
      throw InvalidArgument("evaluation label " + std::to_string(truth) + " is not a model class");
    }
    const int predicted = results[s].label;
    out.predictions.push_back(predicted);
    ++out.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
    if (predicted == truth) ++out.correct;
    double other = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (static_cast<int>(j) != truth) other = std::min(other, results[s].class_scores[j]);
    }
    margin_sum += other - results[s].class_scores[static_cast<std::size_t>(truth)];
  }
  out.accuracy = static_cast<double>(out.correct) / static_cast<double>(out.total);
  out.mean_margin = margin_sum / static_cast<double>(out.total);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t row = 0;
    for (auto c : out.confusion[j]) row += c;
    out.recall.push_back(row == 0 ? std::numeric_limits<double>::quiet_NaN()
                                  : static_cast<double>(out.confusion[j][j]) / static_cast<double>(row));
  }
  return out;
}

Matrix dataset_distances(const TrainedModel& model, const LabeledSet& dataset) {
  std::vector<ProductPoint> points(dataset.samples.size());
  parallel_for(points.size(), [&](std::size_t s) { points[s] = embed(model, dataset.samples[s]); });
  return pairwise_distances(points, model.weights, model.angle_counts, model.config.distance);
}

}  // namespace ngds
