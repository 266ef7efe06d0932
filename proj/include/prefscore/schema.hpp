#pragma once

// Per-track metric schemas and the two-stage (min-max, then mean/std)
// normalization applied before vectors reach the network.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prefscore/error.hpp"

namespace prefscore {

enum class Track { TalkingHead, ListeningHead };

inline std::string_view track_name(Track t) {
  return t == Track::TalkingHead ? "talking" : "listening";
}

inline Track parse_track(std::string_view s) {
  if (s == "talking") return Track::TalkingHead;
  if (s == "listening") return Track::ListeningHead;
  throw ConfigError("unknown track '" + std::string(s) + "' (expected talking|listening)");
}

inline Track other_track(Track t) {
  return t == Track::TalkingHead ? Track::ListeningHead : Track::TalkingHead;
}

// One quantitative metric. higher_is_better is the metric's conventional
// reading; the network never sees it. It is used only by the hand-crafted
// leaderboard baselines and by the cross-track worst-value fill.
struct MetricDescriptor {
  std::string name;
  std::size_t index = 0;
  Track track = Track::TalkingHead;
  bool higher_is_better = true;

  bool operator==(const MetricDescriptor&) const = default;
};

struct MetricSchema {
  Track track = Track::TalkingHead;
  std::vector<MetricDescriptor> metrics;

  std::size_t size() const { return metrics.size(); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (const auto& m : metrics)
      if (m.name == name) return m.index;
    return std::nullopt;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(metrics.size());
    for (const auto& m : metrics) out.push_back(m.name);
    return out;
  }

  bool operator==(const MetricSchema&) const = default;
};

// Metrics present in both tracks, in canonical order.
inline constexpr std::size_t kSharedMetricCount = 7;

inline MetricSchema build_schema(Track track) {
  struct Entry {
    const char* name;
    bool higher_is_better;
  };
  static constexpr Entry kShared[kSharedMetricCount] = {
      {"SSIM", true},  {"PSNR", true},  {"CPBD", true},   {"FID", false},
      {"ID", true},    {"ExpL1", false}, {"PoseL1", false}};
  static constexpr Entry kTalking[] = {{"LipLMD", false}, {"AVOffset", false}, {"AVConf", true}};
  static constexpr Entry kListening[] = {{"ExpFD", false}, {"PoseFD", false}};

  MetricSchema schema;
  schema.track = track;
  auto push = [&](const Entry& e) {
    schema.metrics.push_back({e.name, schema.metrics.size(), track, e.higher_is_better});
  };
  for (const auto& e : kShared) push(e);
  if (track == Track::TalkingHead) {
    for (const auto& e : kTalking) push(e);
  } else {
    for (const auto& e : kListening) push(e);
  }
  return schema;
}

struct NormalizationStats {
  std::vector<double> min;
  std::vector<double> max;
  // Mean and population std of the min-max-scaled values.
  std::vector<double> mean;
  std::vector<double> std;
  // True where max == min on the fitting set; those metrics normalize to 0.
  std::vector<bool> constant;

  std::size_t size() const { return min.size(); }

  bool operator==(const NormalizationStats&) const = default;
};

inline void check_dimension(std::size_t got, std::size_t expected, std::string_view what) {
  if (got != expected)
    throw SchemaError(std::string(what) + ": dimension " + std::to_string(got) +
                      " does not match schema dimension " + std::to_string(expected));
}

inline NormalizationStats fit_normalization(std::span<const std::vector<double>> vectors,
                                            std::size_t dimension) {
  if (vectors.size() < 2)
    throw DataError("fit_normalization needs at least 2 vectors, got " +
                    std::to_string(vectors.size()));
  for (const auto& v : vectors) check_dimension(v.size(), dimension, "fit_normalization");

  NormalizationStats stats;
  stats.min.assign(dimension, 0.0);
  stats.max.assign(dimension, 0.0);
  stats.mean.assign(dimension, 0.0);
  stats.std.assign(dimension, 0.0);
  stats.constant.assign(dimension, false);

  const double count = static_cast<double>(vectors.size());
  for (std::size_t d = 0; d < dimension; ++d) {
    double lo = vectors[0][d];
    double hi = vectors[0][d];
    for (const auto& v : vectors) {
      lo = std::min(lo, v[d]);
      hi = std::max(hi, v[d]);
    }
    stats.min[d] = lo;
    stats.max[d] = hi;
    if (hi == lo) {
      stats.constant[d] = true;
      continue;
    }
    const double range = hi - lo;
    double sum = 0.0;
    for (const auto& v : vectors) sum += (v[d] - lo) / range;
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& v : vectors) {
      const double z = (v[d] - lo) / range - mean;
      sq += z * z;
    }
    stats.mean[d] = mean;
    stats.std[d] = std::sqrt(sq / count);
  }
  return stats;
}

inline double normalize_value(double raw, const NormalizationStats& stats, std::size_t d) {
  if (stats.constant[d] || stats.std[d] == 0.0) return 0.0;
  const double scaled = (raw - stats.min[d]) / (stats.max[d] - stats.min[d]);
  return (scaled - stats.mean[d]) / stats.std[d];
}

// No clamping: values outside the fitted range follow the same affine map.
inline std::vector<double> normalize(std::span<const double> raw, const NormalizationStats& stats) {
  check_dimension(raw.size(), stats.size(), "normalize");
  std::vector<double> out(raw.size());
  for (std::size_t d = 0; d < raw.size(); ++d) out[d] = normalize_value(raw[d], stats, d);
  return out;
}

}  // namespace prefscore
