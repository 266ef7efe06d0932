#pragma once

// Solution-level leaderboard evaluation: the preference score of a solution
// is the mean score of its original records; rankings from the model and the
// two hand-crafted aggregates are compared with MRR and DCG.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "prefscore/dataset.hpp"
#include "prefscore/error.hpp"
#include "prefscore/rank_eval.hpp"
#include "prefscore/ranker.hpp"

namespace prefscore {

struct RecordFeatures {
  std::vector<std::string> solution_of;  // per record
  std::vector<MetricVector> raw;         // clip-aggregated, unnormalised
};

inline RecordFeatures original_record_features(std::span<const VideoRecord> records) {
  RecordFeatures out;
  for (const auto& r : records) {
    if (!r.provenance.is_original()) continue;
    out.solution_of.push_back(r.solution_id);
    out.raw.push_back(aggregate_clips(r));
  }
  if (out.raw.empty()) throw DataError("evaluation needs original records");
  return out;
}

inline std::map<std::string, double> mean_by_solution(const std::vector<std::string>& solution_of,
                                                      std::span<const double> values) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [sum, count] = acc[solution_of[i]];
    sum += values[i];
    ++count;
  }
  std::map<std::string, double> out;
  for (const auto& [sid, sc] : acc) out[sid] = sc.first / static_cast<double>(sc.second);
  return out;
}

inline std::map<std::string, double> solution_scores(const ModelCheckpoint& checkpoint,
                                                     const RecordFeatures& features) {
  const auto scores = score_batch(checkpoint, features.raw);
  return mean_by_solution(features.solution_of, scores);
}

inline RankedList solution_ranking(const std::map<std::string, double>& scores) {
  std::vector<ScoredId> items;
  for (const auto& [sid, s] : scores) items.push_back({sid, s});
  return rank_by_score(std::move(items));
}

inline std::map<std::string, MetricVector> solution_metric_means(const RecordFeatures& features) {
  std::map<std::string, std::pair<MetricVector, std::size_t>> acc;
  for (std::size_t i = 0; i < features.raw.size(); ++i) {
    auto& [sum, count] = acc[features.solution_of[i]];
    if (sum.empty()) sum.assign(features.raw[i].size(), 0.0);
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += features.raw[i][d];
    ++count;
  }
  std::map<std::string, MetricVector> out;
  for (auto& [sid, sc] : acc) {
    for (double& v : sc.first) v /= static_cast<double>(sc.second);
    out[sid] = std::move(sc.first);
  }
  return out;
}

struct MethodResult {
  RankedList ranking;
  double mrr = 0.0;
  double dcg = 0.0;
};

struct SolutionRow {
  double ps = 0.0;
  int top1 = 0;
  int rs = 0;
};

struct EvaluationReport {
  std::string winner;
  double ideal_dcg = 0.0;
  MethodResult ps;
  MethodResult top1;
  MethodResult rs;
  std::map<std::string, SolutionRow> per_solution;
};

// Without explicit relevances the winner gets 1 and every other solution 0.
inline RelevanceVector binary_relevance(const std::map<std::string, double>& solutions,
                                        const std::string& winner) {
  RelevanceVector rel;
  for (const auto& [sid, s] : solutions) rel[sid] = sid == winner ? 1.0 : 0.0;
  return rel;
}

inline EvaluationReport evaluate(const ModelCheckpoint& checkpoint,
                                 std::span<const VideoRecord> records, const std::string& winner,
                                 const RelevanceVector* relevances = nullptr) {
  for (const auto& r : records)
    if (r.track != checkpoint.track)
      throw SchemaError("record '" + r.record_id + "' does not match the checkpoint track");
  const auto features = original_record_features(records);
  const auto ps = solution_scores(checkpoint, features);
  if (!ps.count(winner)) throw DataError("winner '" + winner + "' not among evaluated solutions");
  const RelevanceVector rel = relevances ? *relevances : binary_relevance(ps, winner);

  const auto matrix = build_rank_matrix(checkpoint.schema, solution_metric_means(features));
  const auto top1 = top1_score(matrix);
  const auto rs = rs_score(matrix);

  auto method = [&](RankedList ranking) {
    MethodResult m;
    m.mrr = mrr(ranking, winner);
    m.dcg = dcg(ranking, rel);
    m.ranking = std::move(ranking);
    return m;
  };

  EvaluationReport report;
  report.winner = winner;
  report.ps = method(solution_ranking(ps));
  report.top1 = method(top1_ranking(matrix));
  report.rs = method(rs_ranking(matrix));
  report.ideal_dcg = ideal_dcg(report.ps.ranking, rel);
  for (const auto& [sid, s] : ps) report.per_solution[sid] = {s, top1.at(sid), rs.at(sid)};
  return report;
}

inline nlohmann::json method_json(const MethodResult& m) {
  return {{"mrr", m.mrr}, {"dcg", m.dcg}, {"ranking", m.ranking.ids}};
}

inline nlohmann::json evaluation_json(const EvaluationReport& r) {
  nlohmann::json per_solution = nlohmann::json::object();
  for (const auto& [sid, row] : r.per_solution)
    per_solution[sid] = {{"ps", row.ps}, {"top1", row.top1}, {"rs", row.rs}};
  return {{"mrr", r.ps.mrr},
          {"dcg", r.ps.dcg},
          {"ideal_dcg", r.ideal_dcg},
          {"winner", r.winner},
          {"ranking", r.ps.ranking.ids},
          {"baselines", {{"top1", method_json(r.top1)}, {"rs", method_json(r.rs)}}},
          {"per_solution", per_solution}};
}

}  // namespace prefscore
