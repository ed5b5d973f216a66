#include "ngds/config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <utility>

#include "ngds/error.hpp"

namespace ngds {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::pair<std::string_view, Enum>, N>& table,
                std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == text) return value;
  }
  std::string options;
  for (const auto& [name, value] : table) {
    if (!options.empty()) options += "|";
    options += name;
  }
  throw InvalidArgument("invalid " + std::string(what) + " '" + std::string(text) +
                        "' (expected " + options + ")");
}

constexpr std::array<std::pair<std::string_view, Method>, 5> kMethods{{
    {"msm", Method::msm},
    {"gds", Method::gds},
    {"pgm", Method::pgm},
    {"nmode-gds", Method::nmode_gds},
    {"nmode-wgds", Method::nmode_wgds},
}};
constexpr std::array<std::pair<std::string_view, GdsSearch>, 2> kSearches{{
    {"coordinate", GdsSearch::coordinate},
    {"exhaustive", GdsSearch::exhaustive},
}};
constexpr std::array<std::pair<std::string_view, Classifier>, 2> kClassifiers{{
    {"nn", Classifier::nn},
    {"class-karcher", Classifier::class_karcher},
}};
constexpr std::array<std::pair<std::string_view, Weighting>, 3> kWeightings{{
    {"auto", Weighting::automatic},
    {"fisher", Weighting::fisher},
    {"uniform", Weighting::uniform},
}};
constexpr std::array<std::pair<std::string_view, ModeDistance>, 2> kDistances{{
    {"mean-angle", ModeDistance::mean_angle},
    {"full-spectrum", ModeDistance::full_spectrum},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "unknown";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  text = trim(text);
  if (text.empty()) return out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_number<T>(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw InvalidArgument("invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

std::string format_double(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(Method method) { return name_of(method, kMethods); }
std::string_view to_string(GdsSearch search) { return name_of(search, kSearches); }
std::string_view to_string(Classifier classifier) { return name_of(classifier, kClassifiers); }
std::string_view to_string(Weighting weighting) { return name_of(weighting, kWeightings); }
std::string_view to_string(ModeDistance distance) { return name_of(distance, kDistances); }

Method parse_method(std::string_view text) { return parse_enum(text, kMethods, "method"); }
GdsSearch parse_search(std::string_view text) { return parse_enum(text, kSearches, "search"); }
Classifier parse_classifier(std::string_view text) {
  return parse_enum(text, kClassifiers, "classifier");
}
Weighting parse_weighting(std::string_view text) {
  return parse_enum(text, kWeightings, "weights");
}
ModeDistance parse_distance(std::string_view text) {
  return parse_enum(text, kDistances, "distance");
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "method") {
    config.method = parse_method(value);
  } else if (key == "modes") {
    config.modes = parse_list<int>(key, value);
  } else if (key == "mu") {
    config.energy_mu = parse_number<double>(key, value);
  } else if (key == "dims") {
    config.mode_dims = parse_list<std::size_t>(key, value);
  } else if (key == "class-dims") {
    config.class_dims = parse_list<std::size_t>(key, value);
  } else if (key == "angles") {
    config.angle_counts = parse_list<std::size_t>(key, value);
  } else if (key == "alpha-max") {
    config.alpha_max = parse_number<std::size_t>(key, value);
  } else if (key == "beta-search") {
    config.beta_search = parse_bool(key, value);
  } else if (key == "search") {
    config.search = parse_search(value);
  } else if (key == "rounds") {
    config.search_rounds = parse_number<std::size_t>(key, value);
  } else if (key == "weights") {
    config.weighting = parse_weighting(value);
  } else if (key == "distance") {
    config.distance = parse_distance(value);
  } else if (key == "classifier") {
    config.classifier = parse_classifier(value);
  } else if (key == "karcher-tol") {
    config.karcher_tol = parse_number<double>(key, value);
  } else if (key == "karcher-iter") {
    config.karcher_max_iter = parse_number<std::size_t>(key, value);
  } else if (key == "gs-tol") {
    config.gram_schmidt_tol = parse_number<double>(key, value);
  } else if (key == "seed") {
    config.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw InvalidArgument("unknown config key '" + std::string(key) + "'");
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "method=" << to_string(c.method) << "\n"
      << "modes=" << join(c.modes) << "\n"
      << "mu=" << format_double(c.energy_mu) << "\n"
      << "dims=" << join(c.mode_dims) << "\n"
      << "class-dims=" << join(c.class_dims) << "\n"
      << "angles=" << join(c.angle_counts) << "\n"
      << "alpha-max=" << c.alpha_max << "\n"
      << "beta-search=" << (c.beta_search ? "true" : "false") << "\n"
      << "search=" << to_string(c.search) << "\n"
      << "rounds=" << c.search_rounds << "\n"
      << "weights=" << to_string(c.weighting) << "\n"
      << "distance=" << to_string(c.distance) << "\n"
      << "classifier=" << to_string(c.classifier) << "\n"
      << "karcher-tol=" << format_double(c.karcher_tol) << "\n"
      << "karcher-iter=" << c.karcher_max_iter << "\n"
      << "gs-tol=" << format_double(c.gram_schmidt_tol) << "\n"
      << "seed=" << c.seed << "\n";
  return out.str();
}

void validate(const PipelineConfig& c) {
  if (!(c.energy_mu > 0.0 && c.energy_mu <= 1.0)) {
    throw InvalidArgument("mu must lie in (0, 1]");
  }
  for (int m : c.modes) {
    if (m < 1 || static_cast<std::size_t>(m) > kMaxTensorOrder) {
      throw InvalidArgument("mode " + std::to_string(m) + " out of range");
    }
  }
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    for (std::size_t j = i + 1; j < c.modes.size(); ++j) {
      if (c.modes[i] == c.modes[j]) throw InvalidArgument("duplicate mode in modes list");
    }
  }
  if ((c.method == Method::msm || c.method == Method::gds) && c.modes.size() != 1) {
    throw InvalidArgument(std::string(to_string(c.method)) +
                          " is a single-mode method; pass exactly one mode");
  }
  if (c.search_rounds < 1) throw InvalidArgument("rounds must be at least 1");
  if (!(c.karcher_tol > 0.0)) throw InvalidArgument("karcher-tol must be positive");
  if (!(c.gram_schmidt_tol > 0.0)) throw InvalidArgument("gs-tol must be positive");
}

}  // namespace ngds
