#pragma once

// Per-clip metric ingestion, base preference scores, clip aggregation and the
// train/validation split.
//
// CSV layout (UTF-8, header row, one row per clip):
//
//   base_video_id,solution_id,clip_index,<metric>...[,provenance,score]
//
// Metric columns must match the track schema exactly, in any order. The
// trailing provenance/score pair appears only in augmented files.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "prefscore/error.hpp"
#include "prefscore/random.hpp"
#include "prefscore/schema.hpp"

namespace prefscore {

using MetricVector = std::vector<double>;

// Where a record came from. k == 0 means an original submission; k >= 2 a
// stitched video built from `tuple` (one solution per segment). cross_track
// marks a record injected from the other track as a hard negative.
struct Provenance {
  int k = 0;
  std::vector<std::string> tuple;
  bool cross_track = false;

  bool is_original() const { return k == 0 && !cross_track; }
  bool is_stitched() const { return k > 0; }

  std::string to_string() const {
    std::string out = cross_track ? "cross:" : "";
    if (k == 0) return out + "original";
    out += "stitched:" + std::to_string(k) + ":";
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (i) out += '|';
      out += tuple[i];
    }
    return out;
  }

  static Provenance parse(std::string_view s) {
    Provenance p;
    if (s.starts_with("cross:")) {
      p.cross_track = true;
      s.remove_prefix(6);
    }
    if (s == "original") return p;
    if (!s.starts_with("stitched:")) throw DataError("bad provenance '" + std::string(s) + "'");
    s.remove_prefix(9);
    const auto colon = s.find(':');
    if (colon == std::string_view::npos)
      throw DataError("bad stitched provenance '" + std::string(s) + "'");
    const auto kpart = s.substr(0, colon);
    auto [ptr, ec] = std::from_chars(kpart.data(), kpart.data() + kpart.size(), p.k);
    if (ec != std::errc{} || ptr != kpart.data() + kpart.size() || p.k < 2)
      throw DataError("bad stitch length in provenance '" + std::string(s) + "'");
    auto rest = s.substr(colon + 1);
    while (true) {
      const auto bar = rest.find('|');
      p.tuple.emplace_back(rest.substr(0, bar));
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    if (static_cast<int>(p.tuple.size()) != p.k)
      throw DataError("stitched provenance tuple length differs from k");
    return p;
  }

  bool operator==(const Provenance&) const = default;
};

struct VideoRecord {
  std::string record_id;
  std::string base_video_id;
  std::string solution_id;
  Track track = Track::TalkingHead;
  std::vector<std::vector<double>> clip_metrics;  // clip_count x n
  Provenance provenance;

  std::size_t clip_count() const { return clip_metrics.size(); }
  std::size_t dimension() const { return clip_metrics.empty() ? 0 : clip_metrics.front().size(); }

  bool operator==(const VideoRecord&) const = default;
};

inline std::string make_record_id(std::string_view base, std::string_view solution, bool cross) {
  std::string id = cross ? "x:" : "";
  id += base;
  id += '/';
  id += solution;
  return id;
}

struct ScoredRecord {
  VideoRecord record;
  double score = 0.0;

  bool operator==(const ScoredRecord&) const = default;
};

struct DatasetSplit {
  std::vector<ScoredRecord> train;
  std::vector<ScoredRecord> validation;
  std::uint64_t seed = 0;
};

struct Labels {
  Track track = Track::TalkingHead;
  std::string winner_solution;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  while (true) {
    const auto comma = line.find(',');
    auto cell = line.substr(0, comma);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

inline double parse_double(std::string_view cell, std::size_t line_no, std::string_view column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value))
    throw DataError("line " + std::to_string(line_no) + ": column '" + std::string(column) +
                    "' has non-numeric value '" + std::string(cell) + "'");
  return value;
}

inline long parse_int(std::string_view cell, std::size_t line_no, std::string_view column) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || value < 0)
    throw DataError("line " + std::to_string(line_no) + ": column '" + std::string(column) +
                    "' must be a non-negative integer, got '" + std::string(cell) + "'");
  return value;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct ParsedTable {
  std::vector<ScoredRecord> records;
  bool has_scores = false;
};

inline ParsedTable parse_table(std::istream& in, Track track, bool allow_scores) {
  const MetricSchema schema = build_schema(track);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  if (line.empty()) throw DataError("empty input: no header row");

  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t, std::less<>> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column_of.emplace(std::string(header[c]), c).second)
      throw DataError("duplicate column '" + std::string(header[c]) + "'");
  }
  auto require = [&](std::string_view name, auto&& make_error) {
    auto it = column_of.find(name);
    if (it == column_of.end()) throw make_error("missing column '" + std::string(name) + "'");
    return it->second;
  };
  auto data_error = [](const std::string& m) { return DataError(m); };
  auto schema_error = [](const std::string& m) { return SchemaError(m); };

  const std::size_t col_base = require("base_video_id", data_error);
  const std::size_t col_solution = require("solution_id", data_error);
  const std::size_t col_clip = require("clip_index", data_error);
  std::vector<std::size_t> col_metric(schema.size());
  for (const auto& m : schema.metrics) col_metric[m.index] = require(m.name, schema_error);

  const bool has_prov = column_of.count("provenance") > 0;
  const bool has_score = column_of.count("score") > 0;
  if (has_prov != has_score) throw DataError("columns 'provenance' and 'score' must appear together");
  if (has_score && !allow_scores)
    throw DataError("unexpected columns 'provenance,score' in an un-augmented dataset");
  const std::size_t known = 3 + schema.size() + (has_score ? 2 : 0);
  if (header.size() != known) {
    for (const auto& [name, idx] : column_of) {
      const bool ok = name == "base_video_id" || name == "solution_id" || name == "clip_index" ||
                      name == "provenance" || name == "score" || schema.find(name).has_value();
      if (!ok)
        throw SchemaError("column '" + name + "' is not a " + std::string(track_name(track)) +
                          " metric");
    }
  }
  const std::size_t col_prov = has_prov ? column_of.find("provenance")->second : 0;
  const std::size_t col_score = has_score ? column_of.find("score")->second : 0;

  struct Group {
    std::map<long, std::vector<double>> clips;
    std::string base, solution;
    Provenance provenance;
    double score = 0.0;
  };
  // Keyed by (base, solution, provenance) so output order is canonical.
  std::map<std::tuple<std::string, std::string, std::string>, Group> groups;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    std::string base(cells[col_base]);
    std::string solution(cells[col_solution]);
    if (base.empty() || solution.empty())
      throw DataError("line " + std::to_string(line_no) + ": empty identifier");
    const long clip = parse_int(cells[col_clip], line_no, "clip_index");
    std::vector<double> row(schema.size());
    for (std::size_t d = 0; d < schema.size(); ++d)
      row[d] = parse_double(cells[col_metric[d]], line_no, schema.metrics[d].name);

    std::string prov_text = has_prov ? std::string(cells[col_prov]) : "original";
    auto key = std::make_tuple(base, solution, prov_text);
    auto [it, inserted] = groups.try_emplace(key);
    Group& g = it->second;
    if (inserted) {
      g.base = base;
      g.solution = solution;
      g.provenance = Provenance::parse(prov_text);
      if (has_score) g.score = parse_double(cells[col_score], line_no, "score");
    } else if (has_score && parse_double(cells[col_score], line_no, "score") != g.score) {
      throw DataError("line " + std::to_string(line_no) + ": score differs between clips of " +
                      base + "/" + solution);
    }
    if (!g.clips.emplace(clip, std::move(row)).second)
      throw DataError("line " + std::to_string(line_no) + ": duplicate clip_index " +
                      std::to_string(clip) + " for " + base + "/" + solution);
  }
  if (groups.empty()) throw DataError("empty input: no data rows");

  ParsedTable table;
  table.has_scores = has_score;
  for (auto& [key, g] : groups) {
    long expected = 0;
    ScoredRecord sr;
    for (auto& [clip, row] : g.clips) {
      if (clip != expected)
        throw DataError("clip_index gap for " + g.base + "/" + g.solution + ": expected " +
                        std::to_string(expected) + ", found " + std::to_string(clip));
      sr.record.clip_metrics.push_back(std::move(row));
      ++expected;
    }
    sr.record.base_video_id = g.base;
    sr.record.solution_id = g.solution;
    sr.record.track = track;
    sr.record.provenance = g.provenance;
    sr.record.record_id = make_record_id(g.base, g.solution, g.provenance.cross_track);
    sr.score = g.score;
    table.records.push_back(std::move(sr));
  }
  return table;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

// One VideoRecord per (base_video_id, solution_id), clips in clip_index order,
// provenance Original. Records are sorted by (base_video_id, solution_id).
inline std::vector<VideoRecord> load_records(std::istream& in, Track track) {
  auto table = detail::parse_table(in, track, /*allow_scores=*/false);
  std::vector<VideoRecord> out;
  out.reserve(table.records.size());
  for (auto& sr : table.records) out.push_back(std::move(sr.record));
  return out;
}

inline std::vector<VideoRecord> load_records(const std::string& path, Track track) {
  auto in = detail::open_input(path);
  return load_records(in, track);
}

// Reads an augmented file (with provenance and score columns).
inline std::vector<ScoredRecord> load_scored_records(std::istream& in, Track track) {
  auto table = detail::parse_table(in, track, /*allow_scores=*/true);
  if (!table.has_scores) throw DataError("augmented dataset lacks 'provenance,score' columns");
  return std::move(table.records);
}

inline std::vector<ScoredRecord> load_scored_records(const std::string& path, Track track) {
  auto in = detail::open_input(path);
  return load_scored_records(in, track);
}

inline void write_records(std::ostream& out, const MetricSchema& schema,
                          std::span<const VideoRecord> records) {
  out << "base_video_id,solution_id,clip_index";
  for (const auto& m : schema.metrics) out << ',' << m.name;
  out << '\n';
  for (const auto& r : records) {
    for (std::size_t c = 0; c < r.clip_count(); ++c) {
      out << r.base_video_id << ',' << r.solution_id << ',' << c;
      for (double v : r.clip_metrics[c]) out << ',' << detail::format_double(v);
      out << '\n';
    }
  }
}

inline void write_scored_records(std::ostream& out, const MetricSchema& schema,
                                 std::span<const ScoredRecord> records) {
  out << "base_video_id,solution_id,clip_index";
  for (const auto& m : schema.metrics) out << ',' << m.name;
  out << ",provenance,score\n";
  for (const auto& sr : records) {
    const auto& r = sr.record;
    const std::string prov = r.provenance.to_string();
    const std::string score = detail::format_double(sr.score);
    for (std::size_t c = 0; c < r.clip_count(); ++c) {
      out << r.base_video_id << ',' << r.solution_id << ',' << c;
      for (double v : r.clip_metrics[c]) out << ',' << detail::format_double(v);
      out << ',' << prov << ',' << score << '\n';
    }
  }
}

inline Labels parse_labels(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("track") || !j.contains("winner_solution"))
    throw DataError("labels must be an object with 'track' and 'winner_solution'");
  Labels labels;
  labels.track = parse_track(j.at("track").get<std::string>());
  labels.winner_solution = j.at("winner_solution").get<std::string>();
  return labels;
}

inline Labels load_labels(const std::string& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("labels file '" + path + "': " + e.what());
  }
  return parse_labels(j);
}

inline nlohmann::json labels_to_json(const Labels& labels) {
  return {{"track", std::string(track_name(labels.track))},
          {"winner_solution", labels.winner_solution}};
}

// ---------------------------------------------------------------------------
// Scores, aggregation, split

inline constexpr double kWinnerScore = 10.0;
inline constexpr double kLoserScore = 0.0;

inline std::vector<ScoredRecord> assign_base_scores(std::span<const VideoRecord> records,
                                                    std::string_view winner) {
  const bool present = std::any_of(records.begin(), records.end(),
                                   [&](const VideoRecord& r) { return r.solution_id == winner; });
  if (!present) throw DataError("winner solution '" + std::string(winner) + "' not among records");
  std::vector<ScoredRecord> out;
  out.reserve(records.size());
  for (const auto& r : records)
    out.push_back({r, r.solution_id == winner ? kWinnerScore : kLoserScore});
  return out;
}

// Element-wise arithmetic mean of the clip rows.
inline MetricVector aggregate_clips(const VideoRecord& record) {
  if (record.clip_metrics.empty())
    throw DataError("record '" + record.record_id + "' has no clips");
  MetricVector mean(record.dimension(), 0.0);
  for (const auto& row : record.clip_metrics) {
    if (row.size() != mean.size())
      throw SchemaError("record '" + record.record_id + "' has ragged clip rows");
    for (std::size_t d = 0; d < row.size(); ++d) mean[d] += row[d];
  }
  const double count = static_cast<double>(record.clip_metrics.size());
  for (double& v : mean) v /= count;
  return mean;
}

// Seeded uniform shuffle then prefix/suffix cut; |train| = round(fraction * total).
inline DatasetSplit split(std::span<const ScoredRecord> records, double fraction,
                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("split fraction must lie in (0, 1)");
  if (records.size() < 2)
    throw DataError("split needs at least 2 records, got " + std::to_string(records.size()));
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(records.size())));

  DatasetSplit out;
  out.seed = seed;
  out.train.reserve(n_train);
  out.validation.reserve(records.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? out.train : out.validation).push_back(records[order[i]]);
  return out;
}

}  // namespace prefscore
