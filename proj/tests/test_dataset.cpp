#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>
#include <string>

#include "prefscore/dataset.hpp"

using namespace prefscore;

namespace {

std::string header(Track track, const std::string& skip = "") {
  std::string h = "base_video_id,solution_id,clip_index";
  for (const auto& name : build_schema(track).names())
    if (name != skip) h += "," + name;
  return h + "\n";
}

std::string row(const std::string& base, const std::string& sol, int clip, double v,
                std::size_t n = 10) {
  std::string r = base + "," + sol + "," + std::to_string(clip);
  for (std::size_t i = 0; i < n; ++i) r += "," + std::to_string(v + static_cast<double>(i));
  return r + "\n";
}

std::vector<VideoRecord> load(const std::string& text, Track track = Track::TalkingHead) {
  std::istringstream in(text);
  return load_records(in, track);
}

std::string error_of(const std::string& text) {
  try {
    load(text);
  } catch (const Error& e) {
    return std::string(e.kind()) + ": " + e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("CSV rows are grouped into records in canonical order") {
  const std::string csv = header(Track::TalkingHead) + row("v1", "b", 1, 10) + row("v1", "b", 0, 0) +
                          row("v0", "a", 0, 1) + row("v0", "a", 1, 3);
  const auto records = load(csv);
  REQUIRE(records.size() == 2);
  CHECK(records[0].record_id == "v0/a");
  CHECK(records[0].clip_count() == 2);
  CHECK(records[0].clip_metrics[1][0] == 3.0);
  CHECK(records[1].record_id == "v1/b");
  CHECK(records[1].clip_metrics[0][0] == 0.0);  // sorted by clip_index
  CHECK(records[1].provenance.is_original());
}

TEST_CASE("metric columns are matched by name in any order") {
  auto names = build_schema(Track::ListeningHead).names();
  std::reverse(names.begin(), names.end());
  std::string csv = "clip_index,solution_id,base_video_id";
  for (const auto& n : names) csv += "," + n;
  csv += "\n0,s,v";
  for (std::size_t i = 0; i < names.size(); ++i) csv += "," + std::to_string(i);
  csv += "\n";
  const auto records = load(csv, Track::ListeningHead);
  REQUIRE(records.size() == 1);
  // PoseFD was written first with value 0 and is the last schema metric
  CHECK(records[0].clip_metrics[0][8] == 0.0);
  CHECK(records[0].clip_metrics[0][0] == 8.0);
}

TEST_CASE("CSV contract violations") {
  SECTION("missing metric column names the metric") {
    const auto msg = error_of(header(Track::TalkingHead, "FID") + "v,s,0,1,2,3,4,5,6,7,8,9\n");
    CHECK(msg.starts_with("schema_error"));
    CHECK(msg.find("FID") != std::string::npos);
  }
  SECTION("clip gap") {
    const auto msg = error_of(header(Track::TalkingHead) + row("v", "s", 0, 1) + row("v", "s", 2, 1));
    CHECK(msg.find("gap") != std::string::npos);
  }
  SECTION("duplicate clip") {
    const auto msg = error_of(header(Track::TalkingHead) + row("v", "s", 0, 1) + row("v", "s", 0, 2));
    CHECK(msg.find("duplicate") != std::string::npos);
  }
  SECTION("empty file") { CHECK(error_of("").find("empty") != std::string::npos); }
  SECTION("header only") { CHECK(error_of(header(Track::TalkingHead)).find("empty") != std::string::npos); }
  SECTION("non-numeric value") {
    std::string bad = row("v", "s", 0, 1);
    bad.replace(bad.find(",3.0"), 4, ",abc");
    CHECK_FALSE(error_of(header(Track::TalkingHead) + bad).empty());
  }
  SECTION("unknown column") {
    std::string h = header(Track::TalkingHead);
    h.insert(h.size() - 1, ",ExpFD");
    CHECK(error_of(h + row("v", "s", 0, 1, 11)).starts_with("schema_error"));
  }
  SECTION("ragged row") {
    CHECK_FALSE(error_of(header(Track::TalkingHead) + row("v", "s", 0, 1, 9)).empty());
  }
}

TEST_CASE("scored CSV round-trips records exactly") {
  VideoRecord a{"v0/s0", "v0", "s0", Track::TalkingHead, {{0.1, 1e-300, -2.5, 3, 4, 5, 6, 7, 8, 9}}, {}};
  VideoRecord b = a;
  b.solution_id = "s0+s1";
  b.record_id = "v0/s0+s1";
  b.provenance = Provenance{2, {"s0", "s1"}, false};
  b.clip_metrics.push_back({1.0 / 3.0, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  VideoRecord c = a;
  c.provenance.cross_track = true;
  c.record_id = "x:v0/s0";
  std::vector<ScoredRecord> in{{a, 10.0}, {b, 8.0}, {c, -90.0}};

  std::stringstream buf;
  write_scored_records(buf, build_schema(Track::TalkingHead), in);
  const auto out = load_scored_records(buf, Track::TalkingHead);
  REQUIRE(out.size() == 3);
  std::set<std::string> ids;
  for (const auto& sr : out) {
    ids.insert(sr.record.record_id);
    for (const auto& orig : in)
      if (orig.record.record_id == sr.record.record_id) CHECK(sr == orig);
  }
  CHECK(ids == std::set<std::string>{"v0/s0", "v0/s0+s1", "x:v0/s0"});
}

TEST_CASE("plain CSV refuses augmentation columns") {
  VideoRecord a{"v0/s0", "v0", "s0", Track::TalkingHead, {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}}, {}};
  std::stringstream buf;
  write_scored_records(buf, build_schema(Track::TalkingHead), std::vector<ScoredRecord>{{a, 0.0}});
  CHECK_THROWS_AS(load_records(buf, Track::TalkingHead), DataError);
}

TEST_CASE("provenance strings") {
  CHECK(Provenance{}.to_string() == "original");
  const Provenance p{3, {"a", "b", "c"}, true};
  CHECK(p.to_string() == "cross:stitched:3:a|b|c");
  CHECK(Provenance::parse(p.to_string()) == p);
  CHECK_THROWS_AS(Provenance::parse("stitched:2:a"), DataError);
  CHECK_THROWS_AS(Provenance::parse("remix"), DataError);
}

TEST_CASE("labels") {
  const auto l = parse_labels(nlohmann::json{{"track", "listening"}, {"winner_solution", "s3"}});
  CHECK(l.track == Track::ListeningHead);
  CHECK(l.winner_solution == "s3");
  CHECK(parse_labels(labels_to_json(l)).winner_solution == "s3");
  CHECK_THROWS_AS(parse_labels(nlohmann::json{{"track", "talking"}}), DataError);
}

TEST_CASE("base scores: winner 10, everyone else 0") {
  std::vector<VideoRecord> r(3);
  r[0].solution_id = "w";
  r[1].solution_id = "l";
  r[2].solution_id = "w";
  const auto scored = assign_base_scores(r, "w");
  CHECK(scored[0].score == 10.0);
  CHECK(scored[1].score == 0.0);
  CHECK(scored[2].score == 10.0);
  CHECK_THROWS_AS(assign_base_scores(r, "nobody"), DataError);
}

TEST_CASE("clip aggregation is the arithmetic mean") {
  VideoRecord r;
  r.clip_metrics = {{1, 1}, {1, 1}, {4, 4}};
  CHECK(aggregate_clips(r) == MetricVector{2, 2});
  VideoRecord empty;
  CHECK_THROWS_AS(aggregate_clips(empty), DataError);
}

TEST_CASE("split is a seeded partition with rounded train size") {
  std::vector<ScoredRecord> records(101);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].record.record_id = std::to_string(i);
    records[i].score = static_cast<double>(i);
  }
  const auto a = split(records, 0.8, 5);
  const auto b = split(records, 0.8, 5);
  const auto c = split(records, 0.8, 6);
  CHECK(a.train.size() == 81);
  CHECK(a.validation.size() == 20);
  CHECK(a.train == b.train);
  CHECK(a.train != c.train);
  std::set<std::string> seen;
  for (const auto& sr : a.train) seen.insert(sr.record.record_id);
  for (const auto& sr : a.validation) seen.insert(sr.record.record_id);
  CHECK(seen.size() == 101);
  CHECK_THROWS_AS(split(records, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(split(std::span(records).first(1), 0.5, 1), DataError);
}
