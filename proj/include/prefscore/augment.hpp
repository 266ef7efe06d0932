#pragma once

// Training-set expansion: intra-track stitched videos, inter-track hard
// negatives, and the pair set fed to the ranking loss.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prefscore/dataset.hpp"
#include "prefscore/error.hpp"
#include "prefscore/random.hpp"
#include "prefscore/schema.hpp"

namespace prefscore {

struct StitchConfig {
  std::vector<int> k_values{2, 3, 4};
  std::optional<std::size_t> max_per_k;  // cap on tuples per (base video, k)
  std::uint64_t seed = 0;

  void validate() const {
    if (k_values.empty()) throw ConfigError("k_values must not be empty");
    for (int k : k_values)
      if (k < 2) throw ConfigError("every stitch length k must be >= 2, got " + std::to_string(k));
    if (max_per_k && *max_per_k < 1) throw ConfigError("max_per_k must be >= 1");
  }
};

struct TrainingPair {
  std::size_t i = 0;
  std::size_t j = 0;
  int target = 0;  // 1 iff score[i] > score[j]

  bool operator==(const TrainingPair&) const = default;
};

inline constexpr double kCrossTrackOffset = -100.0;

// Number of ordered k-tuples of distinct items drawn from n: n!/(n-k)!.
inline std::uint64_t permutation_count(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < k; ++i) out *= n - i;
  return out;
}

// All ordered k-tuples of distinct indices in [0, n), lexicographic order.
inline std::vector<std::vector<std::size_t>> enumerate_permutations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  out.reserve(permutation_count(n, k));
  std::vector<std::size_t> current;
  std::vector<bool> used(n, false);
  auto recurse = [&](auto&& self) -> void {
    if (current.size() == k) {
      out.push_back(current);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = true;
      current.push_back(i);
      self(self);
      current.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse);
  return out;
}

// Contiguous segment [begin, end) number `s` of `k` over a sequence of
// length `length`; sizes differ by at most one, earlier segments larger.
inline std::pair<std::size_t, std::size_t> segment_bounds(std::size_t length, std::size_t k,
                                                          std::size_t s) {
  const std::size_t base = length / k;
  const std::size_t extra = length % k;
  const std::size_t begin = s * base + std::min(s, extra);
  const std::size_t size = base + (s < extra ? 1 : 0);
  return {begin, begin + size};
}

inline double stitched_score(int k, bool winner_in_tuple) {
  return winner_in_tuple ? kWinnerScore - k : -static_cast<double>(k);
}

// Stitched records in canonical order (base_video_id, k, lexicographic tuple).
inline std::vector<ScoredRecord> generate_stitched(std::span<const ScoredRecord> records,
                                                   std::string_view winner,
                                                   const StitchConfig& config) {
  config.validate();
  std::vector<int> ks = config.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const auto max_k = static_cast<std::size_t>(ks.back());

  std::map<std::string, std::map<std::string, const VideoRecord*>> by_base;
  for (const auto& sr : records) {
    if (!sr.record.provenance.is_original())
      throw DataError("stitching expects original records; got '" + sr.record.record_id + "'");
    if (!by_base[sr.record.base_video_id].emplace(sr.record.solution_id, &sr.record).second)
      throw DataError("duplicate record for " + sr.record.record_id);
  }
  if (by_base.empty()) return {};

  std::vector<std::string> solutions;
  for (const auto& [sid, rec] : by_base.begin()->second) solutions.push_back(sid);
  for (const auto& [base, sols] : by_base) {
    std::vector<std::string> here;
    for (const auto& [sid, rec] : sols) here.push_back(sid);
    if (here != solutions)
      throw DataError("base video '" + base + "' has a different solution set than '" +
                      by_base.begin()->first + "'");
    for (const auto& [sid, rec] : sols)
      if (rec->clip_count() < max_k)
        throw DataError("record '" + rec->record_id + "' has " + std::to_string(rec->clip_count()) +
                        " clips, fewer than k=" + std::to_string(max_k));
  }
  if (solutions.size() < max_k)
    throw DataError("stitching with k=" + std::to_string(max_k) + " needs at least that many solutions");
  if (std::find(solutions.begin(), solutions.end(), winner) == solutions.end())
    throw DataError("winner solution '" + std::string(winner) + "' not among records");

  const std::size_t n = solutions.size();
  std::vector<ScoredRecord> out;
  std::uint64_t base_index = 0;
  for (const auto& [base, sols] : by_base) {
    std::vector<const VideoRecord*> source(n);
    for (std::size_t s = 0; s < n; ++s) source[s] = sols.at(solutions[s]);
    const Track track = source.front()->track;

    for (int k : ks) {
      auto tuples = enumerate_permutations(n, static_cast<std::size_t>(k));
      if (config.max_per_k && tuples.size() > *config.max_per_k) {
        Rng rng(derive_seed(config.seed, base_index * 16 + static_cast<std::uint64_t>(k)));
        // Partial Fisher-Yates: uniform sample without replacement.
        for (std::size_t i = 0; i < *config.max_per_k; ++i) {
          const std::size_t j = i + static_cast<std::size_t>(rng.below(tuples.size() - i));
          std::swap(tuples[i], tuples[j]);
        }
        tuples.resize(*config.max_per_k);
        std::sort(tuples.begin(), tuples.end());
      }
      for (const auto& tuple : tuples) {
        ScoredRecord sr;
        VideoRecord& rec = sr.record;
        rec.base_video_id = base;
        rec.track = track;
        rec.provenance.k = k;
        bool has_winner = false;
        for (std::size_t s = 0; s < tuple.size(); ++s) {
          const auto& sid = solutions[tuple[s]];
          rec.provenance.tuple.push_back(sid);
          if (s) rec.solution_id += '+';
          rec.solution_id += sid;
          has_winner = has_winner || sid == winner;

          const auto& clips = source[tuple[s]]->clip_metrics;
          const auto [begin, end] = segment_bounds(clips.size(), tuple.size(), s);
          for (std::size_t c = begin; c < end; ++c) rec.clip_metrics.push_back(clips[c]);
        }
        rec.record_id = make_record_id(rec.base_video_id, rec.solution_id, false);
        sr.score = stitched_score(k, has_winner);
        out.push_back(std::move(sr));
      }
    }
    ++base_index;
  }
  return out;
}

// Appends `other` (opposite track) to `current` as hard negatives: score
// offset by -100, metrics projected onto the current schema. Shared metrics
// map by name; the current track's own metrics are filled with the worst raw
// value observed in `current` (by each metric's conventional direction).
inline std::vector<ScoredRecord> inject_cross_track(std::span<const ScoredRecord> current,
                                                    std::span<const ScoredRecord> other) {
  std::vector<ScoredRecord> out(current.begin(), current.end());
  if (other.empty()) return out;
  if (current.empty()) throw DataError("cross-track injection needs a non-empty current track");

  const Track track = current.front().record.track;
  for (const auto& sr : other)
    if (sr.record.track == track)
      throw DataError("cross-track injection of same-track record '" + sr.record.record_id + "'");

  const MetricSchema schema = build_schema(track);
  const MetricSchema other_schema = build_schema(other_track(track));

  std::vector<double> worst(schema.size());
  std::vector<bool> seen(schema.size(), false);
  for (const auto& sr : current) {
    for (const auto& row : sr.record.clip_metrics) {
      check_dimension(row.size(), schema.size(), "inject_cross_track");
      for (const auto& m : schema.metrics) {
        const double v = row[m.index];
        if (!seen[m.index]) {
          worst[m.index] = v;
          seen[m.index] = true;
        } else {
          worst[m.index] = m.higher_is_better ? std::min(worst[m.index], v) : std::max(worst[m.index], v);
        }
      }
    }
  }

  std::vector<std::optional<std::size_t>> source_index(schema.size());
  for (const auto& m : schema.metrics) source_index[m.index] = other_schema.find(m.name);

  for (const auto& sr : other) {
    ScoredRecord injected;
    injected.score = sr.score + kCrossTrackOffset;
    VideoRecord& rec = injected.record;
    rec.base_video_id = sr.record.base_video_id;
    rec.solution_id = sr.record.solution_id;
    rec.track = track;
    rec.provenance = sr.record.provenance;
    rec.provenance.cross_track = true;
    rec.record_id = make_record_id(rec.base_video_id, rec.solution_id, true);
    for (const auto& row : sr.record.clip_metrics) {
      check_dimension(row.size(), other_schema.size(), "inject_cross_track");
      std::vector<double> projected(schema.size());
      for (std::size_t d = 0; d < schema.size(); ++d)
        projected[d] = source_index[d] ? row[*source_index[d]] : worst[d];
      rec.clip_metrics.push_back(std::move(projected));
    }
    out.push_back(std::move(injected));
  }
  return out;
}

// Base scores for the originals followed by their stitched variants.
inline std::vector<ScoredRecord> augment_track(std::span<const VideoRecord> records,
                                               std::string_view winner,
                                               const StitchConfig& config) {
  auto out = assign_base_scores(records, winner);
  auto stitched = generate_stitched(out, winner, config);
  out.insert(out.end(), std::make_move_iterator(stitched.begin()),
             std::make_move_iterator(stitched.end()));
  return out;
}

// Every (a, b) with a < b and distinct scores; target 1 iff score a > score b.
inline std::vector<TrainingPair> build_pairs(std::span<const double> scores) {
  if (scores.size() < 2)
    throw DataError("build_pairs needs at least 2 records, got " + std::to_string(scores.size()));
  std::vector<TrainingPair> pairs;
  for (std::size_t a = 0; a < scores.size(); ++a)
    for (std::size_t b = a + 1; b < scores.size(); ++b)
      if (scores[a] != scores[b]) pairs.push_back({a, b, scores[a] > scores[b] ? 1 : 0});
  return pairs;
}

inline std::vector<TrainingPair> build_pairs(std::span<const ScoredRecord> records) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& sr : records) scores.push_back(sr.score);
  return build_pairs(scores);
}

}  // namespace prefscore
