#include "ngds/fisher.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ngds/error.hpp"

namespace ngds {

namespace {

double mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

FisherStatus classify_ratio(double between, double within) {
  if (within > kFisherZeroTolerance) return FisherStatus::finite;
  return between > kFisherZeroTolerance ? FisherStatus::unbounded : FisherStatus::indeterminate;
}

double ratio(double between, double within, FisherStatus status) {
  switch (status) {
    case FisherStatus::finite:
      return between / within;
    case FisherStatus::unbounded:
      return std::numeric_limits<double>::infinity();
    case FisherStatus::indeterminate:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string_view to_string(FisherStatus status) {
  switch (status) {
    case FisherStatus::finite:
      return "finite";
    case FisherStatus::unbounded:
      return "unbounded";
    case FisherStatus::indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

FisherReport fisher_from_distances(int mode, std::span<const double> class_to_global,
                                   std::span<const double> sample_to_class) {
  if (class_to_global.empty() || sample_to_class.empty()) {
    throw InvalidArgument("Fisher score needs at least one class and one sample");
  }
  FisherReport report;
  report.mode = mode;
  report.between = mean(class_to_global);
  report.within = mean(sample_to_class);
  report.status = classify_ratio(report.between, report.within);
  report.score = ratio(report.between, report.within, report.status);
  return report;
}

FisherReport fisher_mode(int mode, std::span<const std::vector<Subspace>> subspaces_by_class,
                         const KarcherOptions& options) {
  if (subspaces_by_class.size() < 2) {
    throw InvalidArgument("Fisher score needs at least 2 classes");
  }
  std::vector<Subspace> class_means;
  class_means.reserve(subspaces_by_class.size());
  std::vector<double> within;
  for (const auto& members : subspaces_by_class) {
    if (members.empty()) throw InvalidArgument("Fisher score: class with no samples");
    class_means.push_back(karcher_mean(members, options).mean);
    for (const auto& s : members) within.push_back(geodesic_distance(s, class_means.back()));
  }
  const Subspace global = karcher_mean(class_means, options).mean;
  std::vector<double> between;
  between.reserve(class_means.size());
  for (const auto& k : class_means) between.push_back(geodesic_distance(k, global));
  return fisher_from_distances(mode, between, within);
}

NModeFisher nmode_fisher(std::span<const FisherReport> reports) {
  if (reports.empty()) throw InvalidArgument("n-mode Fisher score needs at least one mode");
  NModeFisher out;
  out.per_mode.assign(reports.begin(), reports.end());
  double between = 0.0;
  double within = 0.0;
  for (const auto& r : reports) {
    between += r.between;
    within += r.within;
  }
  out.between = between / static_cast<double>(reports.size());
  out.within = within / static_cast<double>(reports.size());
  out.status = classify_ratio(out.between, out.within);
  out.score = ratio(out.between, out.within, out.status);
  return out;
}

}  // namespace ngds
