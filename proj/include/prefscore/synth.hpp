#pragma once

// Synthetic multi-solution metric datasets with a known latent quality per
// solution. Informative metrics follow a linear link of the latent quality
// (rising for higher-is-better metrics, falling otherwise); the rest is noise.
// Base videos are generated in order from one stream, so an oracle with more
// base videos extends a smaller one with fresh records of the same solutions.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "prefscore/dataset.hpp"
#include "prefscore/error.hpp"
#include "prefscore/random.hpp"
#include "prefscore/rank_eval.hpp"
#include "prefscore/schema.hpp"

namespace prefscore {

// Default informative metrics mix higher-/lower-is-better so a learner has to
// discover the sign of each one. SSIM and FID are informative in both tracks,
// so shared columns mean the same thing after cross-track injection.
inline std::vector<std::size_t> default_informative_indices(Track track) {
  // talking: SSIM (up), FID (down), AVConf (up)
  // listening: SSIM (up), FID (down), PoseFD (down)
  return track == Track::TalkingHead ? std::vector<std::size_t>{0, 3, 9}
                                     : std::vector<std::size_t>{0, 3, 8};
}

struct OracleConfig {
  Track track = Track::TalkingHead;
  std::size_t num_solutions = 8;
  std::size_t num_base_videos = 4;
  std::size_t clips_per_video = 8;
  std::vector<std::size_t> informative_indices = default_informative_indices(Track::TalkingHead);
  // Noise metrics whose values look better for worse solutions.
  std::vector<std::size_t> adversarial_indices;
  double noise_std = 0.05;
  std::uint64_t seed = 0;

  void validate() const {
    const std::size_t n = build_schema(track).size();
    if (num_solutions < 3) throw ConfigError("oracle needs at least 3 solutions");
    if (num_base_videos < 1) throw ConfigError("oracle needs at least 1 base video");
    if (clips_per_video < 4) throw ConfigError("oracle needs at least 4 clips per video");
    if (informative_indices.empty()) throw ConfigError("informative_indices must not be empty");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
    std::set<std::size_t> seen;
    for (auto idx : informative_indices) {
      if (idx >= n) throw ConfigError("informative index " + std::to_string(idx) + " out of range");
      if (!seen.insert(idx).second) throw ConfigError("duplicate informative index");
    }
    for (auto idx : adversarial_indices) {
      if (idx >= n) throw ConfigError("adversarial index " + std::to_string(idx) + " out of range");
      if (!seen.insert(idx).second)
        throw ConfigError("adversarial index " + std::to_string(idx) + " overlaps another role");
    }
  }
};

struct OracleTruth {
  std::map<std::string, double> quality;  // latent u per solution
  RankedList ranking;                     // descending u
  std::string winner;

  RelevanceVector relevance() const { return relevance_from_ranking(ranking); }
};

struct OracleDataset {
  std::vector<VideoRecord> records;
  Labels labels;
  OracleTruth truth;
};

namespace detail {

// Plausible raw offset/span per metric so columns live on different scales.
inline std::pair<double, double> metric_scale(std::string_view name) {
  if (name == "SSIM") return {0.4, 0.5};
  if (name == "PSNR") return {15.0, 20.0};
  if (name == "CPBD") return {0.1, 0.3};
  if (name == "FID") return {10.0, 100.0};
  if (name == "ID") return {0.3, 0.6};
  if (name == "ExpL1") return {0.5, 1.0};
  if (name == "PoseL1") return {0.05, 0.2};
  if (name == "LipLMD") return {5.0, 15.0};
  if (name == "AVOffset") return {0.0, 8.0};
  if (name == "AVConf") return {1.0, 7.0};
  if (name == "ExpFD") return {5.0, 40.0};
  if (name == "PoseFD") return {1.0, 20.0};
  return {0.0, 1.0};
}

inline std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count - 1).size());
  return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

}  // namespace detail

inline OracleDataset generate(const OracleConfig& config) {
  config.validate();
  const MetricSchema schema = build_schema(config.track);
  Rng rng(config.seed);

  std::vector<std::string> solutions;
  for (std::size_t s = 0; s < config.num_solutions; ++s)
    solutions.push_back(detail::padded_id('s', s, config.num_solutions));

  std::vector<double> u(config.num_solutions);
  while (true) {
    for (double& q : u) q = rng.uniform();
    std::set<double> distinct(u.begin(), u.end());
    if (distinct.size() == u.size()) break;
  }

  // Role per metric: 0 noise, 1 informative, 2 adversarial.
  std::vector<int> role(schema.size(), 0);
  for (auto idx : config.informative_indices) role[idx] = 1;
  for (auto idx : config.adversarial_indices) role[idx] = 2;

  OracleDataset out;
  for (std::size_t b = 0; b < config.num_base_videos; ++b) {
    const std::string base = detail::padded_id('v', b, config.num_base_videos);
    for (std::size_t s = 0; s < config.num_solutions; ++s) {
      VideoRecord rec;
      rec.base_video_id = base;
      rec.solution_id = solutions[s];
      rec.track = config.track;
      rec.record_id = make_record_id(base, rec.solution_id, false);
      for (std::size_t c = 0; c < config.clips_per_video; ++c) {
        std::vector<double> row(schema.size());
        for (const auto& m : schema.metrics) {
          const auto [lo, span] = detail::metric_scale(m.name);
          double level = 0.0;
          switch (role[m.index]) {
            case 1:
              level = (m.higher_is_better ? u[s] : 1.0 - u[s]) + config.noise_std * rng.normal();
              break;
            case 2:
              level = (m.higher_is_better ? 1.0 - u[s] : u[s]) + config.noise_std * rng.normal();
              break;
            default:
              level = rng.uniform();
          }
          row[m.index] = lo + span * level;
        }
        rec.clip_metrics.push_back(std::move(row));
      }
      out.records.push_back(std::move(rec));
    }
  }

  std::vector<ScoredId> by_quality;
  for (std::size_t s = 0; s < config.num_solutions; ++s) {
    out.truth.quality[solutions[s]] = u[s];
    by_quality.push_back({solutions[s], u[s]});
  }
  out.truth.ranking = rank_by_score(std::move(by_quality));
  out.truth.winner = out.truth.ranking.ids.front();
  out.labels = {config.track, out.truth.winner};
  return out;
}

inline nlohmann::json truth_to_json(const OracleTruth& truth) {
  nlohmann::json relevance = nlohmann::json::object();
  for (const auto& [id, rel] : truth.relevance()) relevance[id] = rel;
  return {{"u", truth.quality},
          {"ranking", truth.ranking.ids},
          {"winner", truth.winner},
          {"relevance", relevance}};
}

inline OracleTruth truth_from_json(const nlohmann::json& j) {
  try {
    OracleTruth truth;
    truth.quality = j.at("u").get<std::map<std::string, double>>();
    truth.ranking.ids = j.at("ranking").get<std::vector<std::string>>();
    truth.ranking.validate();
    truth.winner = j.at("winner").get<std::string>();
    return truth;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed truth file: ") + e.what());
  }
}

}  // namespace prefscore
