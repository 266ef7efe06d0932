#include <catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "prefscore/augment.hpp"
#include "prefscore/random.hpp"

using namespace prefscore;

namespace {

// Independent enumerator: every k-subset (bitmask) times every ordering.
std::set<std::vector<std::size_t>> brute_force_tuples(std::size_t n, std::size_t k) {
  std::set<std::vector<std::size_t>> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) subset.push_back(i);
    if (subset.size() != k) continue;
    do out.insert(subset);
    while (std::next_permutation(subset.begin(), subset.end()));
  }
  return out;
}

std::string sid(std::size_t i) { return "s" + std::to_string(i); }

// One original record per (base video, solution); clip row c of solution s
// in video b is {b, s, c, ...}, so every row identifies its source.
std::vector<ScoredRecord> originals(std::size_t bases, std::size_t n, std::size_t clips,
                                    const std::string& winner, Track track = Track::TalkingHead) {
  const std::size_t dim = build_schema(track).size();
  std::vector<VideoRecord> recs;
  for (std::size_t b = 0; b < bases; ++b)
    for (std::size_t s = 0; s < n; ++s) {
      VideoRecord r;
      r.base_video_id = "v" + std::to_string(b);
      r.solution_id = sid(s);
      r.record_id = make_record_id(r.base_video_id, r.solution_id, false);
      r.track = track;
      for (std::size_t c = 0; c < clips; ++c) {
        std::vector<double> row(dim, 0.5);
        row[0] = static_cast<double>(b);
        row[1] = static_cast<double>(s);
        row[2] = static_cast<double>(c);
        r.clip_metrics.push_back(row);
      }
      recs.push_back(r);
    }
  return assign_base_scores(recs, winner);
}

}  // namespace

TEST_CASE("permutation counts") {
  CHECK(permutation_count(8, 2) == 56);
  CHECK(permutation_count(8, 3) == 336);
  CHECK(permutation_count(8, 4) == 1680);
  CHECK(permutation_count(3, 4) == 0);
}

TEST_CASE("enumerated tuples match a brute-force enumerator for N <= 6") {
  for (std::size_t n = 2; n <= 6; ++n)
    for (std::size_t k = 2; k <= std::min<std::size_t>(n, 4); ++k) {
      const auto tuples = enumerate_permutations(n, k);
      CHECK(std::is_sorted(tuples.begin(), tuples.end()));
      const std::set<std::vector<std::size_t>> got(tuples.begin(), tuples.end());
      CHECK(got.size() == tuples.size());
      CHECK(got == brute_force_tuples(n, k));
    }
}

TEST_CASE("N=8, one base video, k in {2,3,4}, uncapped -> 2072 stitched records") {
  const auto base = originals(1, 8, 8, "s3");
  const auto stitched = generate_stitched(base, "s3", StitchConfig{});
  CHECK(stitched.size() == 56 + 336 + 1680);
  std::set<double> scores;
  for (const auto& sr : stitched) scores.insert(sr.score);
  CHECK(scores == std::set<double>{8, 7, 6, -2, -3, -4});
}

TEST_CASE("stitched score follows winner membership, checked by brute force for N <= 6") {
  for (std::size_t n = 4; n <= 6; ++n) {
    const std::string winner = sid(n - 2);
    const auto stitched = generate_stitched(originals(1, n, 4, winner), winner, StitchConfig{});
    std::map<std::vector<std::string>, double> got;
    for (const auto& sr : stitched) got[sr.record.provenance.tuple] = sr.score;

    std::size_t expected = 0;
    for (std::size_t k = 2; k <= 4; ++k)
      for (const auto& t : brute_force_tuples(n, k)) {
        ++expected;
        std::vector<std::string> names;
        bool has = false;
        for (auto i : t) {
          names.push_back(sid(i));
          has = has || sid(i) == winner;
        }
        const double want = has ? 10.0 - static_cast<double>(k) : -static_cast<double>(k);
        REQUIRE(got.count(names));
        CHECK(got[names] == want);
      }
    CHECK(got.size() == expected);
  }
}

TEST_CASE("segment bounds are contiguous, near-equal, earlier segments larger") {
  for (std::size_t len = 4; len <= 13; ++len)
    for (std::size_t k = 2; k <= 4; ++k) {
      std::size_t prev_end = 0, prev_size = len;
      for (std::size_t s = 0; s < k; ++s) {
        const auto [b, e] = segment_bounds(len, k, s);
        CHECK(b == prev_end);
        CHECK(e - b <= prev_size);
        CHECK(e - b >= len / k);
        CHECK(e - b <= len / k + 1);
        prev_end = e;
        prev_size = e - b;
      }
      CHECK(prev_end == len);
    }
  CHECK(segment_bounds(8, 3, 0) == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(segment_bounds(8, 3, 2) == std::pair<std::size_t, std::size_t>{6, 8});
}

TEST_CASE("every stitched clip row is the matching source row of its segment") {
  const auto base = originals(2, 5, 7, "s0");
  const auto stitched = generate_stitched(base, "s0", StitchConfig{});
  for (const auto& sr : stitched) {
    const auto& r = sr.record;
    const std::size_t k = static_cast<std::size_t>(r.provenance.k);
    REQUIRE(r.clip_count() == 7);
    for (std::size_t s = 0; s < k; ++s) {
      const auto [b, e] = segment_bounds(7, k, s);
      for (std::size_t c = b; c < e; ++c) {
        CHECK(r.clip_metrics[c][0] == std::stod(r.base_video_id.substr(1)));
        CHECK(sid(static_cast<std::size_t>(r.clip_metrics[c][1])) == r.provenance.tuple[s]);
        CHECK(r.clip_metrics[c][2] == static_cast<double>(c));
      }
    }
  }
}

TEST_CASE("output order is canonical: base video, k, tuple") {
  const auto stitched = generate_stitched(originals(3, 4, 4, "s1"), "s1", StitchConfig{{4, 2, 3}});
  for (std::size_t i = 1; i < stitched.size(); ++i) {
    const auto& a = stitched[i - 1].record;
    const auto& b = stitched[i].record;
    CHECK(std::tie(a.base_video_id, a.provenance.k, a.provenance.tuple) <
          std::tie(b.base_video_id, b.provenance.k, b.provenance.tuple));
  }
}

TEST_CASE("capped stitching samples without replacement, deterministically") {
  const auto base = originals(2, 8, 8, "s2");
  StitchConfig cfg;
  cfg.max_per_k = 10;
  cfg.seed = 4;
  const auto a = generate_stitched(base, "s2", cfg);
  const auto b = generate_stitched(base, "s2", cfg);
  CHECK(a == b);
  CHECK(a.size() == 2 * 3 * 10);
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  for (const auto& sr : a) seen.insert({sr.record.base_video_id, sr.record.provenance.tuple});
  CHECK(seen.size() == a.size());
  cfg.seed = 5;
  CHECK(generate_stitched(base, "s2", cfg) != a);

  cfg.max_per_k = 1000;  // above P(8,2) and P(8,3): those are enumerated in full
  const auto capped = generate_stitched(base, "s2", cfg);
  CHECK(capped.size() == 2 * (56 + 336 + 1000));
}

TEST_CASE("stitching preconditions") {
  auto base = originals(2, 5, 4, "s0");
  SECTION("heterogeneous solution sets") {
    base.pop_back();
    CHECK_THROWS_AS(generate_stitched(base, "s0", StitchConfig{}), DataError);
  }
  SECTION("fewer clips than k") {
    base[3].record.clip_metrics.pop_back();
    CHECK_THROWS_AS(generate_stitched(base, "s0", StitchConfig{}), DataError);
  }
  SECTION("bad config") {
    CHECK_THROWS_AS(generate_stitched(base, "s0", StitchConfig{{1, 2}}), ConfigError);
    CHECK_THROWS_AS(generate_stitched(base, "s0", StitchConfig{{}}), ConfigError);
    StitchConfig zero;
    zero.max_per_k = 0;
    CHECK_THROWS_AS(generate_stitched(base, "s0", zero), ConfigError);
  }
}

TEST_CASE("cross-track injection offsets every score by exactly -100") {
  const auto talking = originals(1, 4, 4, "s0");
  auto listening = augment_track(
      [&] {
        std::vector<VideoRecord> r;
        for (const auto& sr : originals(1, 4, 4, "s1", Track::ListeningHead)) r.push_back(sr.record);
        return r;
      }(),
      "s1", StitchConfig{{3}});
  const auto out = inject_cross_track(talking, listening);
  REQUIRE(out.size() == talking.size() + listening.size());
  for (std::size_t i = 0; i < talking.size(); ++i) CHECK(out[i] == talking[i]);
  for (std::size_t i = 0; i < listening.size(); ++i) {
    const auto& injected = out[talking.size() + i];
    CHECK(injected.score == listening[i].score - 100.0);
    CHECK(injected.record.provenance.cross_track);
    CHECK(injected.record.track == Track::TalkingHead);
    CHECK(injected.record.dimension() == 10);
  }
  std::set<double> scores;
  for (std::size_t i = talking.size(); i < out.size(); ++i) scores.insert(out[i].score);
  CHECK(scores.count(-90.0));   // listening winner original
  CHECK(scores.count(-103.0));  // listening stitched k=3 without its winner
}

TEST_CASE("cross-track projection maps shared metrics by name and fills the rest with worst values") {
  auto talking = originals(1, 3, 4, "s0");
  talking[1].record.clip_metrics[2][7] = 9.0;   // LipLMD, lower is better -> worst is max
  talking[2].record.clip_metrics[0][9] = -4.0;  // AVConf, higher is better -> worst is min
  auto listening = originals(1, 3, 4, "s1", Track::ListeningHead);
  for (auto& row : listening[0].record.clip_metrics)
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = 100.0 + static_cast<double>(d);

  const auto out = inject_cross_track(talking, std::span(listening).first(1));
  const auto& row = out.back().record.clip_metrics[0];
  for (std::size_t d = 0; d < kSharedMetricCount; ++d) CHECK(row[d] == 100.0 + static_cast<double>(d));
  CHECK(row[7] == 9.0);
  CHECK(row[8] == 0.5);  // AVOffset constant across the current track
  CHECK(row[9] == -4.0);
  CHECK(out.back().record.record_id == "x:v0/s0");
}

TEST_CASE("cross-track injection edge cases") {
  const auto talking = originals(1, 3, 4, "s0");
  CHECK(inject_cross_track(talking, {}) == talking);
  CHECK_THROWS_AS(inject_cross_track(talking, talking), DataError);
}

TEST_CASE("pair construction examples") {
  const auto pairs = build_pairs(std::vector<double>{10, 0, 0, -3});
  CHECK(pairs.size() == 5);
  for (const auto& p : pairs) CHECK_FALSE((p.i == 1 && p.j == 2));
  CHECK(build_pairs(std::vector<double>{5, 5}).empty());
  const auto one = build_pairs(std::vector<double>{10, 0});
  REQUIRE(one.size() == 1);
  CHECK(one[0] == TrainingPair{0, 1, 1});
  CHECK_THROWS_AS(build_pairs(std::vector<double>{1}), DataError);
}

TEST_CASE("pair count is C(M,2) minus tied pairs; targets are antisymmetric") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng.below(40);
    std::vector<double> scores(m);
    for (double& s : scores) s = static_cast<double>(rng.below(6)) - 2.0;
    std::map<double, std::size_t> counts;
    for (double s : scores) ++counts[s];
    std::size_t ties = 0;
    for (const auto& [s, c] : counts) ties += c * (c - 1) / 2;
    const auto pairs = build_pairs(scores);
    CHECK(pairs.size() == m * (m - 1) / 2 - ties);

    std::vector<double> reversed(scores.rbegin(), scores.rend());
    const auto swapped = build_pairs(reversed);
    REQUIRE(swapped.size() == pairs.size());
    std::map<std::pair<std::size_t, std::size_t>, int> target;
    for (const auto& p : swapped) target[{m - 1 - p.j, m - 1 - p.i}] = p.target;
    for (const auto& p : pairs) {
      CHECK(p.i < p.j);
      CHECK(scores[p.i] != scores[p.j]);
      CHECK(p.target == (scores[p.i] > scores[p.j] ? 1 : 0));
      CHECK(target.at({p.i, p.j}) == 1 - p.target);
    }
  }
}
