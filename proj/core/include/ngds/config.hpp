#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ngds/manifold.hpp"

namespace ngds {

enum class Method { msm, gds, pgm, nmode_gds, nmode_wgds };
enum class GdsSearch { coordinate, exhaustive };
enum class Classifier { nn, class_karcher };
/// automatic: Fisher weights for nmode-wgds, all-ones otherwise.
enum class Weighting { automatic, fisher, uniform };

/// Every knob of training and classification. Modes are 1-based; an empty
/// `modes` list means all tensor modes. Per-mode vectors are aligned with the
/// resolved mode list; an empty vector or a 0 entry selects the default.
struct PipelineConfig {
  Method method = Method::nmode_wgds;
  std::vector<int> modes;
  double energy_mu = 0.90;
  std::vector<std::size_t> mode_dims;   // default: median energy-selected K
  std::vector<std::size_t> class_dims;  // default: the mode dims
  std::vector<std::size_t> angle_counts;  // default: min subspace dim
  std::size_t alpha_max = 0;            // 0: up to the Gram rank
  bool beta_search = false;
  GdsSearch search = GdsSearch::coordinate;
  std::size_t search_rounds = 2;
  Weighting weighting = Weighting::automatic;
  ModeDistance distance = ModeDistance::mean_angle;
  Classifier classifier = Classifier::nn;
  double karcher_tol = 1e-8;
  std::size_t karcher_max_iter = 100;
  double gram_schmidt_tol = 1e-10;
  std::uint64_t seed = 7;

  bool uses_gds() const noexcept {
    return method == Method::gds || method == Method::nmode_gds || method == Method::nmode_wgds;
  }
  bool uses_fisher_weights() const noexcept {
    return weighting == Weighting::fisher ||
           (weighting == Weighting::automatic && method == Method::nmode_wgds);
  }
};

std::string_view to_string(Method method);
std::string_view to_string(GdsSearch search);
std::string_view to_string(Classifier classifier);
std::string_view to_string(Weighting weighting);
std::string_view to_string(ModeDistance distance);

Method parse_method(std::string_view text);
GdsSearch parse_search(std::string_view text);
Classifier parse_classifier(std::string_view text);
Weighting parse_weighting(std::string_view text);
ModeDistance parse_distance(std::string_view text);

/// Sets one `key=value` setting. Keys match the CLI long flags without the
/// leading dashes (method, modes, mu, dims, class-dims, angles, alpha-max,
/// beta-search, search, rounds, weights, distance, classifier, karcher-tol,
/// karcher-iter, gs-tol, seed). Throws InvalidArgument on unknown keys or
/// malformed values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// Parses `key=value` lines; '#' starts a comment, blank lines are skipped.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});

/// Canonical text: every key, fixed order, doubles with 17 significant
/// digits. parse_config(format_config(c)) reproduces c exactly.
std::string format_config(const PipelineConfig& config);

void validate(const PipelineConfig& config);

}  // namespace ngds
