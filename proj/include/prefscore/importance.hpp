#pragma once

// Permutation feature importance: the drop in DCG of the ranking of all
// original records when one raw metric column is shuffled across them before
// normalisation. A record's relevance is that of its solution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "prefscore/evaluation.hpp"
#include "prefscore/random.hpp"
#include "prefscore/rank_eval.hpp"
#include "prefscore/ranker.hpp"

namespace prefscore {

struct FeatureImportance {
  std::string metric;
  double baseline_dcg = 0.0;
  double mean_permuted_dcg = 0.0;
  double importance = 0.0;  // baseline - mean permuted; may be negative
  double std = 0.0;         // population std of the permuted DCGs
  bool trivially_zero = false;  // fewer than two distinct values in the column
};

struct ImportanceReport {
  std::vector<FeatureImportance> features;  // schema order
  std::size_t repeats = 0;
  std::uint64_t seed = 0;

  // Metric names by descending importance, schema order on ties.
  std::vector<std::string> ranked_features() const {
    std::vector<std::size_t> idx(features.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return features[a].importance > features[b].importance;
    });
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(features[i].metric);
    return out;
  }
};

inline ImportanceReport permutation_importance(const ModelCheckpoint& checkpoint,
                                               std::span<const VideoRecord> records,
                                               const RelevanceVector& relevances,
                                               std::size_t repeats, std::uint64_t seed) {
  if (repeats < 1) throw ConfigError("importance needs at least one repeat");
  for (const auto& r : records)
    if (r.track != checkpoint.track)
      throw SchemaError("record '" + r.record_id + "' does not match the checkpoint track");
  const RecordFeatures base = original_record_features(records);
  if (base.raw.size() < 3) throw DataError("importance needs at least 3 records");

  // Records are keyed by zero-padded position, so score ties keep input order.
  RelevanceVector record_rel;
  std::vector<std::string> keys;
  const std::size_t width = std::to_string(base.raw.size()).size();
  for (std::size_t i = 0; i < base.raw.size(); ++i) {
    auto it = relevances.find(base.solution_of[i]);
    if (it == relevances.end())
      throw DataError("no relevance for solution '" + base.solution_of[i] + "'");
    const std::string digits = std::to_string(i);
    keys.push_back(std::string(width - digits.size(), '0') + digits);
    record_rel[keys.back()] = it->second;
  }
  auto records_dcg = [&](const RecordFeatures& features) {
    const auto scores = score_batch(checkpoint, features.raw);
    std::vector<ScoredId> items;
    for (std::size_t i = 0; i < scores.size(); ++i) items.push_back({keys[i], scores[i]});
    return dcg(rank_by_score(std::move(items)), record_rel);
  };
  const double baseline = records_dcg(base);

  ImportanceReport report;
  report.repeats = repeats;
  report.seed = seed;
  for (const auto& metric : checkpoint.schema.metrics) {
    const std::size_t d = metric.index;
    FeatureImportance fi;
    fi.metric = metric.name;
    fi.baseline_dcg = baseline;

    std::vector<double> column;
    for (const auto& v : base.raw) column.push_back(v[d]);
    fi.trivially_zero = std::set<double>(column.begin(), column.end()).size() < 2;

    std::vector<double> permuted_dcg;
    RecordFeatures shuffled = base;
    for (std::size_t r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(derive_seed(seed, d), r));
      std::vector<double> perm = column;
      rng.shuffle(std::span<double>(perm));
      for (std::size_t i = 0; i < perm.size(); ++i) shuffled.raw[i][d] = perm[i];
      permuted_dcg.push_back(records_dcg(shuffled));
    }
    double sum = 0.0;
    for (double v : permuted_dcg) sum += v;
    fi.mean_permuted_dcg = sum / static_cast<double>(repeats);
    double sq = 0.0;
    for (double v : permuted_dcg) sq += (v - fi.mean_permuted_dcg) * (v - fi.mean_permuted_dcg);
    fi.std = std::sqrt(sq / static_cast<double>(repeats));
    fi.importance = fi.trivially_zero ? 0.0 : baseline - fi.mean_permuted_dcg;
    report.features.push_back(fi);
  }
  return report;
}

inline nlohmann::json importance_json(const ImportanceReport& r) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : r.features)
    features.push_back({{"metric", f.metric},
                        {"baseline_dcg", f.baseline_dcg},
                        {"mean_permuted_dcg", f.mean_permuted_dcg},
                        {"importance", f.importance},
                        {"std", f.std},
                        {"trivially_zero", f.trivially_zero}});
  return {{"features", features},
          {"ranked_features", r.ranked_features()},
          {"repeats", r.repeats},
          {"seed", r.seed}};
}

}  // namespace prefscore
