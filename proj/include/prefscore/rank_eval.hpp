#pragma once

// Ranking quality (reciprocal rank of the preferred item, DCG) and the two
// hand-crafted leaderboard aggregates: number of per-metric first places and
// the additive rank sum.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prefscore/error.hpp"
#include "prefscore/schema.hpp"

namespace prefscore {

struct RankedList {
  std::vector<std::string> ids;

  std::size_t size() const { return ids.size(); }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& id : ids)
      if (!seen.insert(id).second) throw DataError("duplicate id '" + id + "' in ranked list");
  }

  bool operator==(const RankedList&) const = default;
};

using RelevanceVector = std::map<std::string, double>;

struct ScoredId {
  std::string id;
  double score = 0.0;
};

// Sorts by score (descending when higher_first) with ascending id as the
// tie-break, so equal scores always come out in the same order.
inline RankedList rank_by_score(std::vector<ScoredId> items, bool higher_first = true) {
  std::sort(items.begin(), items.end(), [&](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return higher_first ? a.score > b.score : a.score < b.score;
    return a.id < b.id;
  });
  RankedList out;
  out.ids.reserve(items.size());
  for (auto& item : items) out.ids.push_back(std::move(item.id));
  out.validate();
  return out;
}

// Reciprocal of the 1-based position of best_id.
inline double mrr(const RankedList& ranking, const std::string& best_id) {
  const auto it = std::find(ranking.ids.begin(), ranking.ids.end(), best_id);
  if (it == ranking.ids.end()) throw DataError("best id '" + best_id + "' not in ranking");
  return 1.0 / static_cast<double>(it - ranking.ids.begin() + 1);
}

// sum_i rel(ranking[i]) / log2(i + 1), positions from 1.
inline double dcg(const RankedList& ranking, const RelevanceVector& relevances) {
  double total = 0.0;
  for (std::size_t i = 0; i < ranking.ids.size(); ++i) {
    const auto it = relevances.find(ranking.ids[i]);
    if (it == relevances.end()) throw DataError("no relevance for '" + ranking.ids[i] + "'");
    total += it->second / std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

// DCG of the descending-relevance ordering of the same items.
inline double ideal_dcg(const RankedList& ranking, const RelevanceVector& relevances) {
  std::vector<ScoredId> items;
  for (const auto& id : ranking.ids) {
    const auto it = relevances.find(id);
    if (it == relevances.end()) throw DataError("no relevance for '" + id + "'");
    items.push_back({id, it->second});
  }
  return dcg(rank_by_score(std::move(items)), relevances);
}

// Synthetic expert grading: the item at true rank r (1-based) of N gets N - r.
inline RelevanceVector relevance_from_ranking(const RankedList& truth) {
  RelevanceVector rel;
  const auto n = static_cast<double>(truth.size());
  for (std::size_t i = 0; i < truth.ids.size(); ++i)
    rel[truth.ids[i]] = n - static_cast<double>(i + 1);
  return rel;
}

// ranks[m][s] is the rank (1 = best) of solution s on metric m.
struct MetricRankMatrix {
  std::vector<std::string> solutions;
  std::vector<std::string> metrics;
  std::vector<std::vector<int>> ranks;

  void validate() const {
    const std::size_t n = solutions.size();
    if (ranks.size() != metrics.size()) throw DataError("rank matrix: one row per metric expected");
    for (std::size_t m = 0; m < ranks.size(); ++m) {
      if (ranks[m].size() != n) throw DataError("rank matrix row '" + metrics[m] + "' has wrong width");
      std::vector<int> sorted = ranks[m];
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i)
        if (sorted[i] != static_cast<int>(i + 1))
          throw DataError("ranks of metric '" + metrics[m] + "' are not a permutation of 1..N");
    }
  }
};

// Per metric, orders solutions by their value in the metric's conventional
// direction; ties go to the smaller id, so every row is a permutation.
inline MetricRankMatrix build_rank_matrix(const MetricSchema& schema,
                                          const std::map<std::string, std::vector<double>>& values) {
  MetricRankMatrix matrix;
  for (const auto& [sid, v] : values) {
    check_dimension(v.size(), schema.size(), "build_rank_matrix");
    matrix.solutions.push_back(sid);
  }
  for (const auto& metric : schema.metrics) {
    matrix.metrics.push_back(metric.name);
    std::vector<ScoredId> items;
    for (const auto& [sid, v] : values) items.push_back({sid, v[metric.index]});
    const RankedList order = rank_by_score(std::move(items), metric.higher_is_better);
    std::vector<int> row(matrix.solutions.size());
    for (std::size_t pos = 0; pos < order.ids.size(); ++pos) {
      const auto it = std::find(matrix.solutions.begin(), matrix.solutions.end(), order.ids[pos]);
      row[static_cast<std::size_t>(it - matrix.solutions.begin())] = static_cast<int>(pos + 1);
    }
    matrix.ranks.push_back(std::move(row));
  }
  return matrix;
}

// Number of metrics on which each solution ranks first. Higher is better.
inline std::map<std::string, int> top1_score(const MetricRankMatrix& matrix) {
  matrix.validate();
  std::map<std::string, int> out;
  for (const auto& s : matrix.solutions) out[s] = 0;
  for (const auto& row : matrix.ranks)
    for (std::size_t s = 0; s < row.size(); ++s)
      if (row[s] == 1) ++out[matrix.solutions[s]];
  return out;
}

// Sum of each solution's ranks over all metrics. Lower is better.
inline std::map<std::string, int> rs_score(const MetricRankMatrix& matrix) {
  matrix.validate();
  std::map<std::string, int> out;
  for (const auto& s : matrix.solutions) out[s] = 0;
  for (const auto& row : matrix.ranks)
    for (std::size_t s = 0; s < row.size(); ++s) out[matrix.solutions[s]] += row[s];
  return out;
}

inline RankedList top1_ranking(const MetricRankMatrix& matrix) {
  std::vector<ScoredId> items;
  for (const auto& [sid, count] : top1_score(matrix)) items.push_back({sid, static_cast<double>(count)});
  return rank_by_score(std::move(items), /*higher_first=*/true);
}

inline RankedList rs_ranking(const MetricRankMatrix& matrix) {
  std::vector<ScoredId> items;
  for (const auto& [sid, sum] : rs_score(matrix)) items.push_back({sid, static_cast<double>(sum)});
  return rank_by_score(std::move(items), /*higher_first=*/false);
}

}  // namespace prefscore
