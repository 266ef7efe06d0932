#pragma once

// Command-line front end: synth | augment | train | rank | eval | importance |
// gradcheck. run() is callable in-process so tests can drive whole pipelines.
//
// Every run writes <out>.manifest.ini holding the fully resolved key=value
// config; JSON artifacts also embed it under "config". A --config file uses
// the same key=value syntax and command-line flags take precedence.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "prefscore/augment.hpp"
#include "prefscore/dataset.hpp"
#include "prefscore/error.hpp"
#include "prefscore/evaluation.hpp"
#include "prefscore/importance.hpp"
#include "prefscore/nn.hpp"
#include "prefscore/ranker.hpp"
#include "prefscore/synth.hpp"

namespace prefscore::cli {

struct Options {
  std::string input, labels, checkpoint, out, config, truth;
  std::string cross_input, cross_labels;
  std::string track = "talking";
  std::uint64_t seed = 0;
  std::size_t repeats = 1;

  // synth
  std::size_t solutions = 8, base_videos = 4, clips = 8;
  double noise = 0.05;
  std::vector<std::size_t> informative, adversarial;

  // augment
  std::vector<int> k_values{2, 3, 4};
  std::optional<std::size_t> max_per_k;

  // train
  std::size_t epochs = 300, batch_size = 256, patience = 30;
  double lr = 1e-3, split = 0.8;
  std::vector<std::size_t> hidden{64, 32};

  // importance / gradcheck
  std::size_t feature_repeats = 10;
  double tolerance = 1e-4;
};

namespace detail {

using Config = std::map<std::string, std::string>;

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// key=value lines; '#' or ';' starts a comment line. Keys may carry "--".
inline Config read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Config out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

// Fills options the command line left unset from the config file.
inline void apply_config(CLI::App& sub, const std::string& path) {
  for (const auto& [key, value] : read_config_file(path)) {
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt || key == "config" || key == "help")
      throw ConfigError("unknown config key '" + key + "' for " + sub.get_name());
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

inline std::string join(const std::vector<std::string>& parts, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Resolved value of every option (flag, config file or default).
inline Config resolved_config(const CLI::App& sub) {
  Config out;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    std::string value = opt->count() > 0 ? join(opt->results()) : opt->get_default_str();
    // vector defaults render as "[a,b]"; keep the flag syntax so manifests reload
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']')
      value = value.substr(1, value.size() - 2);
    if (value.empty()) continue;
    out[name] = value;
  }
  return out;
}

inline nlohmann::json config_json(const std::string& subcommand, const Config& config) {
  nlohmann::json j = config;
  j["subcommand"] = subcommand;
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

inline void write_manifest(const std::string& out, const std::string& subcommand,
                           const Config& config) {
  std::ostringstream text;
  text << "# prefscore " << subcommand << "\n";
  for (const auto& [key, value] : config) text << key << "=" << value << "\n";
  write_text(out + ".manifest.ini", text.str());
}

inline std::string require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError("missing required option --" + flag);
  return value;
}

// "runs/model.json" -> "runs/model.run3.json"
inline std::string run_path(const std::string& path, std::size_t run) {
  std::filesystem::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : ".json";
  p.replace_extension("");
  return p.string() + ".run" + std::to_string(run) + ext;
}

inline std::string sibling_path(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  p.replace_extension("");
  return p.string() + suffix;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  for (double x : v) out.std += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(out.std / static_cast<double>(v.size()));
  return out;
}

inline nlohmann::json mean_std_json(const std::vector<double>& v) {
  const auto ms = mean_std(v);
  return {{"mean", ms.mean}, {"std", ms.std}};
}

inline RelevanceVector relevances_for(const Options& o, const std::vector<VideoRecord>& records,
                                      const std::string& winner) {
  if (!o.truth.empty()) {
    std::ifstream in(o.truth);
    if (!in) throw DataError("cannot open truth file '" + o.truth + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError("truth file '" + o.truth + "': " + e.what());
    }
    return truth_from_json(j).relevance();
  }
  std::map<std::string, double> solutions;
  for (const auto& r : records)
    if (r.provenance.is_original()) solutions[r.solution_id] = 0.0;
  return binary_relevance(solutions, winner);
}

// ---------------------------------------------------------------------------
// Subcommands

inline void cmd_synth(const Options& o, const Config& cfg, std::ostream& out) {
  OracleConfig oc;
  oc.track = parse_track(o.track);
  oc.num_solutions = o.solutions;
  oc.num_base_videos = o.base_videos;
  oc.clips_per_video = o.clips;
  oc.noise_std = o.noise;
  oc.seed = o.seed;
  oc.informative_indices = o.informative.empty() ? default_informative_indices(oc.track) : o.informative;
  oc.adversarial_indices = o.adversarial;
  const auto data = generate(oc);

  const std::string prefix = require(o.out, "out");
  std::ostringstream csv;
  write_records(csv, build_schema(oc.track), data.records);
  write_text(prefix + ".csv", csv.str());
  write_json(prefix + ".labels.json", labels_to_json(data.labels));
  nlohmann::json truth = truth_to_json(data.truth);
  truth["config"] = config_json("synth", cfg);
  write_json(prefix + ".truth.json", truth);
  write_manifest(prefix, "synth", cfg);

  out << "synth: " << data.records.size() << " records, winner " << data.truth.winner << "\n";
  out << "  truth ranking:";
  for (const auto& id : data.truth.ranking.ids) out << ' ' << id;
  out << "\n";
}

inline void cmd_augment(const Options& o, const Config& cfg, std::ostream& out) {
  const Labels labels = load_labels(require(o.labels, "labels"));
  const auto records = load_records(require(o.input, "input"), labels.track);
  StitchConfig sc;
  sc.k_values = o.k_values;
  sc.max_per_k = o.max_per_k;
  sc.seed = o.seed;
  auto augmented = augment_track(records, labels.winner_solution, sc);

  std::size_t injected = 0;
  if (!o.cross_input.empty()) {
    const Labels other_labels = load_labels(require(o.cross_labels, "cross-labels"));
    if (other_labels.track == labels.track)
      throw DataError("--cross-labels must describe the other track");
    const auto other = load_records(o.cross_input, other_labels.track);
    StitchConfig other_sc = sc;
    other_sc.seed = derive_seed(o.seed, 1);
    const auto other_aug = augment_track(other, other_labels.winner_solution, other_sc);
    injected = other_aug.size();
    augmented = inject_cross_track(augmented, other_aug);
  } else if (!o.cross_labels.empty()) {
    throw ConfigError("--cross-labels given without --cross-input");
  }

  const std::string path = require(o.out, "out");
  std::ostringstream csv;
  write_scored_records(csv, build_schema(labels.track), augmented);
  write_text(path, csv.str());
  write_manifest(path, "augment", cfg);

  const auto pairs = build_pairs(augmented);
  out << "augment: " << records.size() << " originals -> " << augmented.size() << " records ("
      << injected << " cross-track), " << pairs.size() << " pairs\n";
  if (pairs.empty()) out << "  warning: every record has the same score; no training pairs\n";
}

inline Track train_track(const Options& o) {
  return o.labels.empty() ? parse_track(o.track) : load_labels(o.labels).track;
}

inline TrainConfig make_train_config(const Options& o, std::uint64_t seed) {
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.pair_batch_size = o.batch_size;
  tc.learning_rate = o.lr;
  tc.seed = seed;
  tc.early_stop_patience = o.patience == 0 ? std::nullopt : std::optional<std::size_t>(o.patience);
  tc.network.hidden_dims = o.hidden;
  tc.network.init_seed = seed;
  return tc;
}

inline void cmd_train(const Options& o, const Config& cfg, std::ostream& out) {
  const Track track = train_track(o);
  const auto records = load_scored_records(require(o.input, "input"), track);
  const std::string path = require(o.out, "out");
  if (o.repeats < 1) throw ConfigError("--repeats must be >= 1");

  nlohmann::json runs = nlohmann::json::array();
  std::vector<double> train_losses, val_losses, val_accs;
  std::optional<std::size_t> best_run;
  double best_loss = 0.0;
  std::vector<ModelCheckpoint> checkpoints;

  for (std::size_t r = 0; r < o.repeats; ++r) {
    const std::uint64_t seed = o.seed + r;
    const auto parts = prefscore::split(records, o.split, seed);
    const auto outcome = train(parts.train, parts.validation, track, make_train_config(o, seed));
    const auto& rep = outcome.report;

    nlohmann::json run = train_report_json(rep);
    run["seed"] = seed;
    if (o.repeats > 1) run["checkpoint"] = run_path(path, r);
    runs.push_back(run);

    train_losses.push_back(rep.final_train_loss);
    if (rep.final_val_loss) val_losses.push_back(*rep.final_val_loss);
    if (rep.val_accuracy) val_accs.push_back(*rep.val_accuracy);
    const double selection = rep.final_val_loss.value_or(rep.final_train_loss);
    if (!best_run || selection < best_loss) {
      best_run = r;
      best_loss = selection;
    }

    out << "train[" << r << "] seed " << seed << ": " << rep.epochs_run << " epochs (best "
        << rep.best_epoch << "), train loss " << rep.final_train_loss;
    if (rep.final_val_loss) out << ", val loss " << *rep.final_val_loss;
    if (rep.val_accuracy) out << ", val acc " << *rep.val_accuracy;
    out << ", saturated " << rep.saturated_fraction << ", " << std::fixed << std::setprecision(2)
        << rep.wall_clock_seconds << "s\n"
        << std::defaultfloat << std::setprecision(6);
    checkpoints.push_back(outcome.checkpoint);
  }

  auto write_ck = [&](const ModelCheckpoint& ck, const std::string& p) {
    nlohmann::json j = checkpoint_to_json(ck);
    j["config"] = config_json("train", cfg);
    write_text(p, j.dump(1) + "\n");
  };
  if (o.repeats > 1)
    for (std::size_t r = 0; r < checkpoints.size(); ++r) write_ck(checkpoints[r], run_path(path, r));
  write_ck(checkpoints[*best_run], path);

  nlohmann::json report = {{"config", config_json("train", cfg)},
                           {"runs", runs},
                           {"selected_run", *best_run},
                           {"summary", {{"final_train_loss", mean_std_json(train_losses)}}}};
  if (!val_losses.empty()) report["summary"]["final_val_loss"] = mean_std_json(val_losses);
  if (!val_accs.empty()) report["summary"]["val_accuracy"] = mean_std_json(val_accs);
  write_json(sibling_path(path, ".report.json"), report);
  write_manifest(path, "train", cfg);
}

inline void cmd_rank(const Options& o, const Config& cfg, std::ostream& out) {
  const auto ck = load_checkpoint(require(o.checkpoint, "checkpoint"));
  const auto records = load_records(require(o.input, "input"), ck.track);
  std::vector<ScoredId> scores;
  const auto ranking = rank(ck, records, &scores);
  std::map<std::string, double> by_id;
  for (const auto& s : scores) by_id[s.id] = s.score;

  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = 0; i < ranking.ids.size(); ++i)
    items.push_back({{"position", i + 1}, {"id", ranking.ids[i]}, {"score", by_id[ranking.ids[i]]}});

  const auto ps = solution_scores(ck, original_record_features(records));
  const auto leaderboard = solution_ranking(ps);
  nlohmann::json solutions = nlohmann::json::array();
  for (std::size_t i = 0; i < leaderboard.ids.size(); ++i)
    solutions.push_back(
        {{"position", i + 1}, {"solution", leaderboard.ids[i]}, {"ps", ps.at(leaderboard.ids[i])}});

  const std::string path = require(o.out, "out");
  write_json(path, {{"config", config_json("rank", cfg)},
                    {"records", items},
                    {"solutions", solutions}});
  write_manifest(path, "rank", cfg);

  out << "rank: " << records.size() << " records\n";
  for (std::size_t i = 0; i < leaderboard.ids.size(); ++i)
    out << "  " << std::setw(3) << i + 1 << "  " << std::left << std::setw(12) << leaderboard.ids[i]
        << std::right << std::fixed << std::setprecision(4) << ps.at(leaderboard.ids[i])
        << std::defaultfloat << std::setprecision(6) << "\n";
}

inline std::vector<std::string> checkpoint_list(const Options& o) {
  const std::string given = require(o.checkpoint, "checkpoint");
  std::vector<std::string> out;
  std::stringstream ss(given);
  for (std::string part; std::getline(ss, part, ',');)
    if (!trim(part).empty()) out.push_back(trim(part));
  if (out.size() == 1 && o.repeats > 1) {
    const std::string base = out.front();
    out.clear();
    for (std::size_t r = 0; r < o.repeats; ++r) out.push_back(run_path(base, r));
  }
  return out;
}

inline void cmd_eval(const Options& o, const Config& cfg, std::ostream& out) {
  const auto paths = checkpoint_list(o);
  const Labels labels = load_labels(require(o.labels, "labels"));
  const auto records = load_records(require(o.input, "input"), labels.track);
  const auto rel = relevances_for(o, records, labels.winner_solution);

  nlohmann::json runs = nlohmann::json::array();
  std::map<std::string, std::vector<double>> series;
  for (const auto& p : paths) {
    const auto ck = load_checkpoint(p);
    const auto rep = evaluate(ck, records, labels.winner_solution, &rel);
    nlohmann::json j = evaluation_json(rep);
    j["checkpoint"] = p;
    runs.push_back(j);
    series["ps.mrr"].push_back(rep.ps.mrr);
    series["ps.dcg"].push_back(rep.ps.dcg);
    series["ideal_dcg"].push_back(rep.ideal_dcg);
    series["top1.mrr"].push_back(rep.top1.mrr);
    series["top1.dcg"].push_back(rep.top1.dcg);
    series["rs.mrr"].push_back(rep.rs.mrr);
    series["rs.dcg"].push_back(rep.rs.dcg);
  }
  nlohmann::json summary = nlohmann::json::object();
  for (const auto& [key, values] : series) summary[key] = mean_std_json(values);

  const std::string path = require(o.out, "out");
  write_json(path, {{"config", config_json("eval", cfg)},
                    {"relevance", o.truth.empty() ? "binary" : "truth"},
                    {"runs", runs},
                    {"summary", summary}});
  write_manifest(path, "eval", cfg);

  out << "eval over " << paths.size() << " checkpoint(s), winner " << labels.winner_solution << "\n";
  out << "  method       MRR (mean+-std)        DCG (mean+-std)\n";
  auto row = [&](const std::string& name, const std::string& key) {
    const auto m = mean_std(series[key + ".mrr"]);
    const auto d = mean_std(series[key + ".dcg"]);
    out << "  " << std::left << std::setw(8) << name << std::right << std::fixed
        << std::setprecision(3) << std::setw(10) << m.mean << " +- " << m.std << std::setw(12)
        << d.mean << " +- " << d.std << "\n"
        << std::defaultfloat << std::setprecision(6);
  };
  row("PS", "ps");
  row("#Top1", "top1");
  row("RS", "rs");
  out << "  ideal DCG " << mean_std(series["ideal_dcg"]).mean << "\n";
}

inline void cmd_importance(const Options& o, const Config& cfg, std::ostream& out) {
  const auto ck = load_checkpoint(require(o.checkpoint, "checkpoint"));
  const Labels labels = load_labels(require(o.labels, "labels"));
  if (labels.track != ck.track) throw SchemaError("labels track does not match the checkpoint");
  const auto records = load_records(require(o.input, "input"), ck.track);
  const auto rel = relevances_for(o, records, labels.winner_solution);
  const auto report = permutation_importance(ck, records, rel, o.feature_repeats, o.seed);

  nlohmann::json j = importance_json(report);
  j["config"] = config_json("importance", cfg);
  const std::string path = require(o.out, "out");
  write_json(path, j);
  write_manifest(path, "importance", cfg);

  out << "importance (" << o.feature_repeats << " shuffles per metric)\n";
  for (const auto& name : report.ranked_features())
    for (const auto& f : report.features)
      if (f.metric == name)
        out << "  " << std::left << std::setw(10) << f.metric << std::right << std::fixed
            << std::setprecision(4) << std::setw(9) << f.importance << " +- " << f.std << "\n"
            << std::defaultfloat << std::setprecision(6);
}

// A small BN + ReLU + ReLU6 network of the kind grad_check is meant for.
inline NetworkConfig gradcheck_network() {
  NetworkConfig nc;
  nc.input_dim = 10;
  nc.hidden_dims = {16, 8};
  return nc;
}

inline bool cmd_gradcheck(const Options& o, const Config& cfg, std::ostream& out) {
  const auto result = grad_check(gradcheck_network(), o.seed, o.tolerance);
  out << "max relative error " << std::scientific << std::setprecision(3)
      << result.max_relative_error << std::defaultfloat << std::setprecision(6) << " ("
      << result.checked << " partials, worst " << result.worst_parameter << ") "
      << (result.passed ? "PASS" : "FAIL") << "\n";
  if (!o.out.empty()) {
    write_json(o.out, {{"config", config_json("gradcheck", cfg)},
                       {"max_relative_error", result.max_relative_error},
                       {"worst_parameter", result.worst_parameter},
                       {"checked", result.checked},
                       {"below_resolution", result.below_resolution},
                       {"tolerance", o.tolerance},
                       {"passed", result.passed}});
    write_manifest(o.out, "gradcheck", cfg);
  }
  return result.passed;
}

inline void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace detail

// Exit codes: 0 success, 1 runtime/data error, 2 usage error, 3 gradcheck
// tolerance exceeded.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Preference score learning-to-rank engine", "prefscore"};
  app.require_subcommand(1, 1);

  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "key=value config file; flags override it");
    return sub;
  };
  auto seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "random seed")->capture_default_str(); };

  CLI::App* synth = add("synth", "generate a synthetic dataset with known ground truth");
  synth->add_option("--out", o.out, "output prefix (<out>.csv, .labels.json, .truth.json)");
  seed(synth);
  synth->add_option("--track", o.track, "talking | listening")->capture_default_str();
  synth->add_option("--solutions", o.solutions)->capture_default_str();
  synth->add_option("--base-videos", o.base_videos)->capture_default_str();
  synth->add_option("--clips", o.clips, "clips per video")->capture_default_str();
  synth->add_option("--noise", o.noise, "noise std of informative metrics")->capture_default_str();
  synth->add_option("--informative", o.informative, "informative metric indices")->delimiter(',');
  synth->add_option("--adversarial", o.adversarial, "anti-correlated metric indices")->delimiter(',');

  CLI::App* augment = add("augment", "stitch and score records for training");
  augment->add_option("--input", o.input, "dataset CSV");
  augment->add_option("--labels", o.labels, "labels JSON");
  augment->add_option("--out", o.out, "augmented CSV");
  seed(augment);
  augment->add_option("--k-values", o.k_values)->delimiter(',')->capture_default_str();
  augment->add_option("--max-per-k", o.max_per_k, "cap on tuples per base video and k");
  augment->add_option("--cross-input", o.cross_input, "other-track dataset CSV (hard negatives)");
  augment->add_option("--cross-labels", o.cross_labels, "other-track labels JSON");

  CLI::App* train_cmd = add("train", "train the preference score network");
  train_cmd->add_option("--input", o.input, "augmented CSV");
  train_cmd->add_option("--labels", o.labels, "labels JSON (sets the track)");
  train_cmd->add_option("--track", o.track, "track when --labels is absent")->capture_default_str();
  train_cmd->add_option("--out", o.out, "checkpoint path");
  seed(train_cmd);
  train_cmd->add_option("--repeats", o.repeats, "independent runs with seeds seed..seed+R-1")
      ->capture_default_str();
  train_cmd->add_option("--epochs", o.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", o.batch_size, "pairs per mini-batch")->capture_default_str();
  train_cmd->add_option("--lr", o.lr)->capture_default_str();
  train_cmd->add_option("--hidden", o.hidden)->delimiter(',')->capture_default_str();
  train_cmd->add_option("--patience", o.patience, "early stop patience, 0 disables")
      ->capture_default_str();
  train_cmd->add_option("--split", o.split, "training fraction")->capture_default_str();

  CLI::App* rank_cmd = add("rank", "score and rank records with a checkpoint");
  rank_cmd->add_option("--checkpoint", o.checkpoint);
  rank_cmd->add_option("--input", o.input, "dataset CSV");
  rank_cmd->add_option("--out", o.out, "ranking JSON");

  CLI::App* eval = add("eval", "MRR/DCG of PS against #Top1 and RS");
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint path(s), comma separated");
  eval->add_option("--input", o.input, "dataset CSV");
  eval->add_option("--labels", o.labels, "labels JSON");
  eval->add_option("--truth", o.truth, "truth JSON for graded relevance");
  eval->add_option("--out", o.out, "report JSON");
  eval->add_option("--repeats", o.repeats, "expand --checkpoint to its .runK files")
      ->capture_default_str();

  CLI::App* importance = add("importance", "permutation feature importance");
  importance->add_option("--checkpoint", o.checkpoint);
  importance->add_option("--input", o.input, "dataset CSV");
  importance->add_option("--labels", o.labels, "labels JSON");
  importance->add_option("--truth", o.truth, "truth JSON for graded relevance");
  importance->add_option("--out", o.out, "report JSON");
  seed(importance);
  importance->add_option("--feature-repeats", o.feature_repeats, "shuffles per metric")
      ->capture_default_str();

  CLI::App* gradcheck = add("gradcheck", "finite-difference gradient check");
  seed(gradcheck);
  gradcheck->add_option("--tolerance", o.tolerance)->capture_default_str();
  gradcheck->add_option("--out", o.out, "optional report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    detail::print_error(err, "usage_error", e.what());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (!o.config.empty()) detail::apply_config(*sub, o.config);
    const auto cfg = detail::resolved_config(*sub);
    if (name == "synth") detail::cmd_synth(o, cfg, out);
    else if (name == "augment") detail::cmd_augment(o, cfg, out);
    else if (name == "train") detail::cmd_train(o, cfg, out);
    else if (name == "rank") detail::cmd_rank(o, cfg, out);
    else if (name == "eval") detail::cmd_eval(o, cfg, out);
    else if (name == "importance") detail::cmd_importance(o, cfg, out);
    else if (name == "gradcheck" && !detail::cmd_gradcheck(o, cfg, out)) {
      detail::print_error(err, "tolerance_exceeded", "gradient check above tolerance");
      return 3;
    }
  } catch (const Error& e) {
    detail::print_error(err, e.kind(), e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    detail::print_error(err, "path_error", e.what());
    return 1;
  } catch (const std::exception& e) {
    detail::print_error(err, "internal_error", e.what());
    return 1;
  }
  return 0;
}

}  // namespace prefscore::cli
