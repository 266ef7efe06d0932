#pragma once

// Preference Score model: pairwise training over scored records, the
// self-contained checkpoint, and scoring / ranking of new metric vectors.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "prefscore/augment.hpp"
#include "prefscore/dataset.hpp"
#include "prefscore/error.hpp"
#include "prefscore/nn.hpp"
#include "prefscore/random.hpp"
#include "prefscore/rank_eval.hpp"
#include "prefscore/schema.hpp"

namespace prefscore {

inline constexpr const char* kCheckpointFormat = "psv1";

struct TrainConfig {
  NetworkConfig network;
  std::size_t epochs = 300;
  std::size_t pair_batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::optional<std::size_t> early_stop_patience = 30;

  void validate() const {
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (pair_batch_size < 2) throw ConfigError("pair_batch_size must be >= 2");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be a finite non-negative number");
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean mini-batch loss, Train mode
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  double saturated_fraction = 0.0;
};

struct ModelCheckpoint {
  Track track = Track::TalkingHead;
  MetricSchema schema;
  NormalizationStats normalization;
  Network network;
  TrainConfig train_config;
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

struct TrainReport {
  double final_train_loss = 0.0;
  std::optional<double> final_val_loss;
  std::optional<double> val_accuracy;
  double saturated_fraction = 0.0;
  double wall_clock_seconds = 0.0;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::size_t train_pairs = 0;
  std::size_t val_pairs = 0;
};

// Normalised feature rows plus the pairs that index into them.
struct PairDataset {
  Matrix features;
  std::vector<TrainingPair> pairs;
};

struct TrainedNetwork {
  Network network;
  std::vector<EpochStats> history;
  TrainReport report;
};

// Raised when the loss or a gradient stops being finite. `last_finite` holds
// the best network seen before the failure.
class TrainingDiverged : public NumericError {
 public:
  TrainingDiverged(const std::string& what, TrainedNetwork last_finite)
      : NumericError(what), last_finite_(std::move(last_finite)) {}
  const TrainedNetwork& last_finite() const { return last_finite_; }

 private:
  TrainedNetwork last_finite_;
};

struct PairEval {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

// Eval-mode loss and pairwise accuracy; a tied score pair counts as wrong.
inline PairEval evaluate_pairs(const Network& net, const PairDataset& data) {
  PairEval out;
  if (data.pairs.empty()) return out;
  const auto scores = net.predict(data.features);
  std::size_t correct = 0;
  double sum = 0.0;
  for (const auto& p : data.pairs) {
    sum += pairwise_loss(scores[p.i], scores[p.j], p.target).loss;
    const bool ok = p.target ? scores[p.i] > scores[p.j] : scores[p.i] < scores[p.j];
    if (ok) ++correct;
  }
  const auto n = static_cast<double>(data.pairs.size());
  out.mean_loss = sum / n;
  out.accuracy = static_cast<double>(correct) / n;
  return out;
}

// Mini-batch pairwise training with Adam. Pairs are reshuffled every epoch;
// the network with the lowest validation loss (training loss when there are
// no validation pairs) is retained.
inline TrainedNetwork train_network(const PairDataset& train, const PairDataset& val,
                                    const TrainConfig& config) {
  config.validate();
  if (train.pairs.empty()) throw DataError("training needs at least one pair");
  const auto started = std::chrono::steady_clock::now();

  NetworkConfig net_config = config.network;
  net_config.input_dim = train.features.cols();
  Network net(net_config);
  if (!val.pairs.empty() && val.features.cols() != net_config.input_dim)
    throw SchemaError("validation features have a different dimension than training features");

  AdamConfig adam;
  adam.learning_rate = config.learning_rate;
  AdamState state;
  Gradients grads = net.zero_gradients();
  Rng rng(derive_seed(config.seed, 0x70A1));

  std::vector<std::size_t> order(train.pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t dim = net_config.input_dim;
  TrainedNetwork best{net, {}, {}};
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<EpochStats> history;

  Matrix stacked;
  std::vector<int> targets;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t saturated = 0;
    for (std::size_t start = 0; start < order.size(); start += config.pair_batch_size) {
      const std::size_t b = std::min(config.pair_batch_size, order.size() - start);
      stacked.resize(2 * b, dim);
      targets.resize(b);
      for (std::size_t p = 0; p < b; ++p) {
        const auto& pair = train.pairs[order[start + p]];
        const auto first = train.features.row(pair.i);
        const auto second = train.features.row(pair.j);
        std::copy(first.begin(), first.end(), stacked.row(p).begin());
        std::copy(second.begin(), second.end(), stacked.row(b + p).begin());
        targets[p] = pair.target;
      }
      const auto batch = pair_batch_gradients(net, stacked, targets, grads);
      if (!std::isfinite(batch.mean_loss)) {
        best.history = history;
        throw TrainingDiverged("non-finite training loss in epoch " + std::to_string(epoch),
                               std::move(best));
      }
      try {
        optimizer_step(net, grads, state, adam);
      } catch (const NumericError& e) {
        best.history = history;
        throw TrainingDiverged(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")",
                               std::move(best));
      }
      loss_sum += batch.mean_loss * static_cast<double>(b);
      saturated += batch.saturated_pairs;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(order.size());
    stats.saturated_fraction = static_cast<double>(saturated) / static_cast<double>(order.size());
    double selection_loss = stats.train_loss;
    if (!val.pairs.empty()) {
      const auto v = evaluate_pairs(net, val);
      stats.val_loss = v.mean_loss;
      stats.val_accuracy = v.accuracy;
      selection_loss = v.mean_loss;
    }
    history.push_back(stats);

    if (selection_loss < best_loss) {
      best_loss = selection_loss;
      best.network = net;
      best.report.best_epoch = epoch;
      best.report.saturated_fraction = stats.saturated_fraction;
      since_best = 0;
    } else if (config.early_stop_patience && ++since_best >= *config.early_stop_patience) {
      break;
    }
  }

  best.history = std::move(history);
  best.report.epochs_run = best.history.size();
  best.report.train_pairs = train.pairs.size();
  best.report.val_pairs = val.pairs.size();
  best.report.final_train_loss = evaluate_pairs(best.network, train).mean_loss;
  if (!val.pairs.empty()) {
    const auto v = evaluate_pairs(best.network, val);
    best.report.final_val_loss = v.mean_loss;
    best.report.val_accuracy = v.accuracy;
  }
  best.report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return best;
}

inline Matrix normalized_features(std::span<const ScoredRecord> records,
                                  const NormalizationStats& stats) {
  Matrix out(records.size(), stats.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto v = normalize(aggregate_clips(records[r].record), stats);
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

struct TrainOutcome {
  ModelCheckpoint checkpoint;
  TrainReport report;
};

// Fits normalisation on the training records, builds both pair sets and
// trains. All records must belong to `track`.
inline TrainOutcome train(std::span<const ScoredRecord> train_records,
                          std::span<const ScoredRecord> val_records, Track track,
                          const TrainConfig& config) {
  const MetricSchema schema = build_schema(track);
  for (auto records : {train_records, val_records})
    for (const auto& sr : records)
      if (sr.record.track != track)
        throw SchemaError("record '" + sr.record.record_id + "' is not a " +
                          std::string(track_name(track)) + " record");

  std::vector<MetricVector> raw;
  raw.reserve(train_records.size());
  for (const auto& sr : train_records) raw.push_back(aggregate_clips(sr.record));
  const NormalizationStats stats = fit_normalization(raw, schema.size());

  PairDataset train_set{normalized_features(train_records, stats), build_pairs(train_records)};
  PairDataset val_set;
  if (val_records.size() >= 2) {
    val_set.features = normalized_features(val_records, stats);
    val_set.pairs = build_pairs(val_records);
  }

  TrainConfig resolved = config;
  resolved.network.input_dim = schema.size();
  auto trained = train_network(train_set, val_set, resolved);

  TrainOutcome out;
  out.checkpoint.track = track;
  out.checkpoint.schema = schema;
  out.checkpoint.normalization = stats;
  out.checkpoint.network = std::move(trained.network);
  out.checkpoint.train_config = resolved;
  out.checkpoint.history = std::move(trained.history);
  out.checkpoint.best_epoch = trained.report.best_epoch;
  out.report = trained.report;
  return out;
}

// ---------------------------------------------------------------------------
// Inference

inline std::vector<double> score_batch(const ModelCheckpoint& checkpoint,
                                       std::span<const MetricVector> raw) {
  if (raw.empty()) return {};
  Matrix features(raw.size(), checkpoint.schema.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto v = normalize(raw[r], checkpoint.normalization);
    std::copy(v.begin(), v.end(), features.row(r).begin());
  }
  return checkpoint.network.predict(features);
}

inline double score(const ModelCheckpoint& checkpoint, const MetricVector& raw) {
  return score_batch(checkpoint, std::span<const MetricVector>(&raw, 1)).front();
}

inline double score(const ModelCheckpoint& checkpoint, const VideoRecord& record) {
  if (record.track != checkpoint.track)
    throw SchemaError("checkpoint is for the " + std::string(track_name(checkpoint.track)) +
                      " track; record '" + record.record_id + "' is not");
  return score(checkpoint, aggregate_clips(record));
}

struct IdentifiedVector {
  std::string id;
  MetricVector values;
};

// Descending preference score; ties broken by ascending id.
inline RankedList rank(const ModelCheckpoint& checkpoint, std::span<const IdentifiedVector> items,
                       std::vector<ScoredId>* scores_out = nullptr) {
  std::vector<MetricVector> raw;
  raw.reserve(items.size());
  for (const auto& item : items) raw.push_back(item.values);
  const auto scores = score_batch(checkpoint, raw);
  std::vector<ScoredId> scored;
  for (std::size_t i = 0; i < items.size(); ++i) scored.push_back({items[i].id, scores[i]});
  if (scores_out) *scores_out = scored;
  return rank_by_score(std::move(scored));
}

inline RankedList rank(const ModelCheckpoint& checkpoint, std::span<const VideoRecord> records,
                       std::vector<ScoredId>* scores_out = nullptr) {
  std::vector<IdentifiedVector> items;
  for (const auto& r : records) {
    if (r.track != checkpoint.track)
      throw SchemaError("record '" + r.record_id + "' does not match the checkpoint track");
    items.push_back({r.record_id, aggregate_clips(r)});
  }
  return rank(checkpoint, items, scores_out);
}

// ---------------------------------------------------------------------------
// Checkpoint serialisation

namespace detail {

inline nlohmann::json tensor_json(std::span<const double> values, std::vector<std::size_t> shape) {
  return {{"shape", shape}, {"data", std::vector<double>(values.begin(), values.end())}};
}

inline std::vector<double> read_tensor(const nlohmann::json& j, std::vector<std::size_t> shape,
                                       const std::string& what) {
  if (j.at("shape").get<std::vector<std::size_t>>() != shape)
    throw DataError("checkpoint tensor '" + what + "' has an unexpected shape");
  auto data = j.at("data").get<std::vector<double>>();
  std::size_t expected = 1;
  for (auto s : shape) expected *= s;
  if (data.size() != expected) throw DataError("checkpoint tensor '" + what + "' has wrong length");
  return data;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> optional_double(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json network_config_json(const NetworkConfig& c) {
  return {{"input_dim", c.input_dim},
          {"hidden_dims", c.hidden_dims},
          {"hidden_activation", activation_name(c.hidden_activation)},
          {"output_activation", activation_name(c.output_activation)},
          {"batch_norm", c.batch_norm},
          {"init_seed", c.init_seed},
          {"bn_momentum", c.bn_momentum},
          {"bn_epsilon", c.bn_epsilon}};
}

inline NetworkConfig network_config_from_json(const nlohmann::json& j) {
  NetworkConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  c.hidden_activation = parse_activation(j.at("hidden_activation").get<std::string>());
  c.output_activation = parse_activation(j.at("output_activation").get<std::string>());
  c.batch_norm = j.at("batch_norm").get<bool>();
  c.init_seed = j.at("init_seed").get<std::uint64_t>();
  c.bn_momentum = j.at("bn_momentum").get<double>();
  c.bn_epsilon = j.at("bn_epsilon").get<double>();
  return c;
}

inline nlohmann::json train_config_json(const TrainConfig& c) {
  return {{"network", network_config_json(c.network)},
          {"epochs", c.epochs},
          {"pair_batch_size", c.pair_batch_size},
          {"learning_rate", c.learning_rate},
          {"seed", c.seed},
          {"early_stop_patience", c.early_stop_patience ? nlohmann::json(*c.early_stop_patience)
                                                         : nlohmann::json(nullptr)}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.network = network_config_from_json(j.at("network"));
  c.epochs = j.at("epochs").get<std::size_t>();
  c.pair_batch_size = j.at("pair_batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("early_stop_patience");
  if (!p.is_null()) c.early_stop_patience = p.get<std::size_t>();
  else c.early_stop_patience.reset();
  return c;
}

inline nlohmann::json train_report_json(const TrainReport& r) {
  // Wall-clock time is left out so report files are reproducible byte for byte.
  return {{"final_train_loss", r.final_train_loss},
          {"final_val_loss", detail::optional_json(r.final_val_loss)},
          {"val_pairwise_accuracy", detail::optional_json(r.val_accuracy)},
          {"saturated_pair_fraction", r.saturated_fraction},
          {"epochs_run", r.epochs_run},
          {"best_epoch", r.best_epoch},
          {"train_pairs", r.train_pairs},
          {"val_pairs", r.val_pairs}};
}

inline nlohmann::json checkpoint_to_json(const ModelCheckpoint& ck) {
  using nlohmann::json;
  json schema = json::array();
  for (const auto& m : ck.schema.metrics)
    schema.push_back({{"name", m.name}, {"index", m.index}, {"higher_is_better", m.higher_is_better}});

  const auto& norm = ck.normalization;
  std::vector<int> constant(norm.constant.begin(), norm.constant.end());
  json normalization = {{"min", norm.min},   {"max", norm.max},
                        {"mean", norm.mean}, {"std", norm.std},
                        {"constant", constant}};

  json layers = json::array();
  const auto& dense = ck.network.dense_layers();
  const auto& norms = ck.network.batch_norms();
  for (std::size_t l = 0; l < dense.size(); ++l) {
    const auto& w = dense[l].weights;
    json layer = {{"weights", detail::tensor_json(w.values(), {w.rows(), w.cols()})}};
    if (!dense[l].bias.empty())
      layer["bias"] = detail::tensor_json(dense[l].bias, {dense[l].bias.size()});
    if (l < norms.size()) {
      const auto& bn = norms[l];
      const std::vector<std::size_t> shape{bn.gamma.size()};
      layer["batch_norm"] = {{"gamma", detail::tensor_json(bn.gamma, shape)},
                             {"beta", detail::tensor_json(bn.beta, shape)},
                             {"running_mean", detail::tensor_json(bn.running_mean, shape)},
                             {"running_var", detail::tensor_json(bn.running_var, shape)},
                             {"momentum", bn.momentum},
                             {"epsilon", bn.epsilon}};
    }
    layers.push_back(std::move(layer));
  }

  json history = json::array();
  for (const auto& e : ck.history)
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", detail::optional_json(e.val_loss)},
                       {"val_accuracy", detail::optional_json(e.val_accuracy)},
                       {"saturated_fraction", e.saturated_fraction}});

  return {{"format", kCheckpointFormat},
          {"track", std::string(track_name(ck.track))},
          {"schema", schema},
          {"normalization", normalization},
          {"network", {{"config", network_config_json(ck.network.config())}, {"layers", layers}}},
          {"train_config", train_config_json(ck.train_config)},
          {"history", history},
          {"best_epoch", ck.best_epoch}};
}

inline ModelCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat)
      throw DataError("unsupported checkpoint format '" + j.at("format").get<std::string>() + "'");
    ModelCheckpoint ck;
    ck.track = parse_track(j.at("track").get<std::string>());
    ck.schema = build_schema(ck.track);
    const auto& schema = j.at("schema");
    if (schema.size() != ck.schema.size()) throw SchemaError("checkpoint schema size mismatch");
    for (std::size_t i = 0; i < schema.size(); ++i)
      if (schema[i].at("name").get<std::string>() != ck.schema.metrics[i].name)
        throw SchemaError("checkpoint schema metric " + std::to_string(i) + " mismatch");

    const auto& nj = j.at("normalization");
    auto& norm = ck.normalization;
    norm.min = nj.at("min").get<std::vector<double>>();
    norm.max = nj.at("max").get<std::vector<double>>();
    norm.mean = nj.at("mean").get<std::vector<double>>();
    norm.std = nj.at("std").get<std::vector<double>>();
    for (int c : nj.at("constant").get<std::vector<int>>()) norm.constant.push_back(c != 0);
    for (auto size : {norm.max.size(), norm.mean.size(), norm.std.size(), norm.constant.size()})
      if (size != norm.min.size()) throw DataError("checkpoint normalization arrays differ in length");
    check_dimension(norm.size(), ck.schema.size(), "checkpoint normalization");

    ck.network = Network(network_config_from_json(j.at("network").at("config")));
    const auto& layers = j.at("network").at("layers");
    auto& dense = ck.network.dense_layers();
    auto& norms = ck.network.batch_norms();
    if (layers.size() != dense.size()) throw DataError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < dense.size(); ++l) {
      const std::string tag = "layer" + std::to_string(l);
      auto& w = dense[l].weights;
      w.values() = detail::read_tensor(layers[l].at("weights"), {w.rows(), w.cols()}, tag + ".weights");
      if (!dense[l].bias.empty())
        dense[l].bias = detail::read_tensor(layers[l].at("bias"), {dense[l].bias.size()}, tag + ".bias");
      if (l < norms.size()) {
        auto& bn = norms[l];
        const auto& bj = layers[l].at("batch_norm");
        const std::vector<std::size_t> shape{bn.gamma.size()};
        bn.gamma = detail::read_tensor(bj.at("gamma"), shape, tag + ".gamma");
        bn.beta = detail::read_tensor(bj.at("beta"), shape, tag + ".beta");
        bn.running_mean = detail::read_tensor(bj.at("running_mean"), shape, tag + ".running_mean");
        bn.running_var = detail::read_tensor(bj.at("running_var"), shape, tag + ".running_var");
        bn.momentum = bj.at("momentum").get<double>();
        bn.epsilon = bj.at("epsilon").get<double>();
      }
    }
    check_dimension(ck.network.config().input_dim, ck.schema.size(), "checkpoint network");

    ck.train_config = train_config_from_json(j.at("train_config"));
    for (const auto& e : j.at("history")) {
      EpochStats s;
      s.epoch = e.at("epoch").get<std::size_t>();
      s.train_loss = e.at("train_loss").get<double>();
      s.val_loss = detail::optional_double(e.at("val_loss"));
      s.val_accuracy = detail::optional_double(e.at("val_accuracy"));
      s.saturated_fraction = e.at("saturated_fraction").get<double>();
      ck.history.push_back(s);
    }
    ck.best_epoch = j.at("best_epoch").get<std::size_t>();
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const ModelCheckpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(ck).dump(1) << '\n';
}

inline ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint '" + path + "': " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace prefscore
