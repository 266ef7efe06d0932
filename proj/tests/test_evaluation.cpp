#include <catch_amalgamated.hpp>

#include <cmath>

#include "prefscore/evaluation.hpp"

using namespace prefscore;
using Catch::Matchers::WithinAbs;

namespace {

// A checkpoint whose score is the standardised value of one metric.
ModelCheckpoint single_metric_checkpoint(const std::vector<VideoRecord>& records, std::size_t metric) {
  ModelCheckpoint ck;
  ck.track = Track::TalkingHead;
  ck.schema = build_schema(ck.track);
  std::vector<MetricVector> raw;
  for (const auto& r : records) raw.push_back(aggregate_clips(r));
  ck.normalization = fit_normalization(raw, 10);
  NetworkConfig c;
  c.input_dim = 10;
  c.hidden_dims = {};
  c.batch_norm = false;
  c.output_activation = Activation::Identity;
  ck.network = Network(c);
  auto& w = ck.network.dense_layers()[0].weights.values();
  std::fill(w.begin(), w.end(), 0.0);
  w[metric] = 1.0;
  return ck;
}

VideoRecord rec(const std::string& base, const std::string& sol, std::vector<double> metrics) {
  VideoRecord r;
  r.base_video_id = base;
  r.solution_id = sol;
  r.record_id = make_record_id(base, sol, false);
  r.clip_metrics = {std::move(metrics)};
  return r;
}

// SSIM (up), PSNR (up); everything else constant. A wins SSIM, C wins PSNR.
std::vector<VideoRecord> leaderboard() {
  auto row = [](double ssim, double psnr) {
    std::vector<double> v(10, 1.0);
    v[0] = ssim;
    v[1] = psnr;
    return v;
  };
  return {rec("v0", "A", row(0.9, 20)), rec("v1", "A", row(0.7, 20)),
          rec("v0", "B", row(0.6, 25)), rec("v1", "B", row(0.6, 25)),
          rec("v0", "C", row(0.1, 30)), rec("v1", "C", row(0.3, 30))};
}

}  // namespace

TEST_CASE("solution score is the mean over its original records") {
  const auto records = leaderboard();
  const auto ck = single_metric_checkpoint(records, 0);
  const auto features = original_record_features(records);
  const auto ps = solution_scores(ck, features);
  const auto& st = ck.normalization;
  auto z = [&](double x) { return normalize_value(x, st, 0); };
  CHECK_THAT(ps.at("A"), WithinAbs((z(0.9) + z(0.7)) / 2, 1e-12));
  CHECK_THAT(ps.at("C"), WithinAbs((z(0.1) + z(0.3)) / 2, 1e-12));
  const auto means = solution_metric_means(features);
  CHECK_THAT(means.at("A")[0], WithinAbs(0.8, 1e-12));
}

TEST_CASE("evaluation against hand-computed rankings") {
  const auto records = leaderboard();
  const auto ck = single_metric_checkpoint(records, 0);
  const RelevanceVector rel{{"A", 2}, {"B", 1}, {"C", 0}};
  const auto report = evaluate(ck, records, "A", &rel);
  CHECK(report.ps.ranking.ids == std::vector<std::string>{"A", "B", "C"});
  CHECK(report.ps.mrr == 1.0);
  CHECK_THAT(report.ps.dcg, WithinAbs(2.0 + 1.0 / std::log2(3.0), 1e-12));
  CHECK_THAT(report.ideal_dcg, WithinAbs(report.ps.dcg, 1e-12));

  // Top1: A wins SSIM, C wins PSNR, the 8 constant metrics go to A (smaller
  // id) -> A 9, C 1, B 0.
  CHECK(report.per_solution.at("A").top1 == 9);
  CHECK(report.per_solution.at("C").top1 == 1);
  CHECK(report.top1.ranking.ids == std::vector<std::string>{"A", "C", "B"});
  // RS: A 1+3+8, B 2+2+16, C 3+1+24.
  CHECK(report.per_solution.at("A").rs == 12);
  CHECK(report.per_solution.at("B").rs == 20);
  CHECK(report.per_solution.at("C").rs == 28);
  CHECK(report.rs.mrr == 1.0);
  CHECK_THAT(report.top1.dcg, WithinAbs(2.0 + 0.0 + 1.0 / 2.0, 1e-12));
}

TEST_CASE("binary relevance by default, and evaluation errors") {
  const auto records = leaderboard();
  const auto ck = single_metric_checkpoint(records, 1);
  const auto report = evaluate(ck, records, "B");
  CHECK(report.ps.ranking.ids == std::vector<std::string>{"C", "B", "A"});
  CHECK(report.ps.mrr == 0.5);
  CHECK_THAT(report.ps.dcg, WithinAbs(1.0 / std::log2(3.0), 1e-12));
  CHECK(report.ideal_dcg == 1.0);
  CHECK_THROWS_AS(evaluate(ck, records, "Z"), DataError);

  auto stitched = records;
  for (auto& r : stitched) r.provenance = Provenance{2, {"A", "B"}, false};
  CHECK_THROWS_AS(evaluate(ck, stitched, "A"), DataError);
}

TEST_CASE("evaluation json layout") {
  const auto records = leaderboard();
  const auto j = evaluation_json(evaluate(single_metric_checkpoint(records, 0), records, "A"));
  CHECK(j.at("mrr") == 1.0);
  CHECK(j.at("baselines").contains("top1"));
  CHECK(j.at("baselines").contains("rs"));
  CHECK(j.at("per_solution").size() == 3);
}
