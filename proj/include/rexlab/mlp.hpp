#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "rexlab/explanations.hpp"

#include <json.hpp>

namespace rexlab {

inline constexpr int kModelFileVersion = 1;
// Probability clip inside the cross-entropy, to keep log() finite.
inline constexpr double kBceClip = 1e-12;

/// Fully-connected network with the logistic activation on every layer
/// (hidden and output), plus the feature standardisation statistics it was
/// trained with. Default architecture: 7 -> 8 -> 7 -> 6.
struct MLPModel {
  std::vector<int> layer_sizes;               // e.g. {7, 8, 7, 6}
  std::vector<std::vector<double>> weights;   // per layer, row-major [out][in]
  std::vector<std::vector<double>> biases;    // per layer
  std::vector<double> feature_means;
  std::vector<double> feature_stds;

  int input_width() const { return layer_sizes.front(); }
  int output_width() const { return layer_sizes.back(); }
  int layer_count() const { return static_cast<int>(layer_sizes.size()) - 1; }

  void validate() const {
    if (layer_sizes.size() < 2) throw config_error("model: need at least two layer sizes");
    for (int s : layer_sizes) {
      if (s < 1) throw config_error("model: layer sizes must be positive");
    }
    if (weights.size() != static_cast<std::size_t>(layer_count()) ||
        biases.size() != static_cast<std::size_t>(layer_count())) {
      throw config_error("model: weight/bias layer count mismatch");
    }
    for (int l = 0; l < layer_count(); ++l) {
      const std::size_t rows = static_cast<std::size_t>(layer_sizes[l + 1]);
      const std::size_t cols = static_cast<std::size_t>(layer_sizes[l]);
      if (weights[l].size() != rows * cols) throw config_error("model: weight shape mismatch");
      if (biases[l].size() != rows) throw config_error("model: bias shape mismatch");
    }
    if (feature_means.size() != static_cast<std::size_t>(input_width()) ||
        feature_stds.size() != static_cast<std::size_t>(input_width())) {
      throw config_error("model: normalization statistics do not match the input width");
    }
    for (double s : feature_stds) {
      if (!(s > 0)) throw config_error("model: feature stds must be strictly positive");
    }
  }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Glorot-uniform weights, zero biases, identity normalization.
inline MLPModel init_model(std::uint64_t seed, std::vector<int> layer_sizes = {7, 8, 7, 6}) {
  MLPModel model;
  model.layer_sizes = std::move(layer_sizes);
  Rng rng = make_rng(seed);
  for (int l = 0; l + 1 < static_cast<int>(model.layer_sizes.size()); ++l) {
    const int fan_in = model.layer_sizes[l];
    const int fan_out = model.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
    for (double& x : w) x = uniform_real(rng, -bound, bound);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
  }
  model.feature_means.assign(static_cast<std::size_t>(model.input_width()), 0.0);
  model.feature_stds.assign(static_cast<std::size_t>(model.input_width()), 1.0);
  model.validate();
  return model;
}

namespace detail {

inline std::vector<double> standardize(const MLPModel& m, std::span<const double> features) {
  std::vector<double> z(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    z[i] = (features[i] - m.feature_means[i]) / m.feature_stds[i];
  }
  return z;
}

// Full forward pass keeping every activation, for backprop.
inline std::vector<std::vector<double>> forward_activations(const MLPModel& m,
                                                            std::span<const double> features) {
  std::vector<std::vector<double>> acts;
  acts.push_back(standardize(m, features));
  for (int l = 0; l < m.layer_count(); ++l) {
    const int in = m.layer_sizes[l];
    const int out = m.layer_sizes[l + 1];
    std::vector<double> a(static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      double z = m.biases[l][static_cast<std::size_t>(o)];
      const double* row = m.weights[l].data() + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * acts.back()[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(o)] = sigmoid(z);
    }
    acts.push_back(std::move(a));
  }
  return acts;
}

}  // namespace detail

/// Output probabilities for one feature vector.
inline std::vector<double> forward(const MLPModel& m, std::span<const double> features) {
  m.validate();
  if (static_cast<int>(features.size()) != m.input_width()) {
    throw config_error("forward: expected " + std::to_string(m.input_width()) +
                       " features, got " + std::to_string(features.size()));
  }
  return detail::forward_activations(m, features).back();
}

struct TrainSample {
  std::vector<double> features;
  std::vector<double> labels;  // in [0, 1]
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const MLPModel& m) {
    Gradients g;
    for (int l = 0; l < m.layer_count(); ++l) {
      g.weights.emplace_back(m.weights[l].size(), 0.0);
      g.biases.emplace_back(m.biases[l].size(), 0.0);
    }
    return g;
  }
};

/// Mean binary cross-entropy over the batch and the output units, with exact
/// analytic gradients for every weight and bias.
inline double loss_and_gradient(const MLPModel& m, std::span<const TrainSample> batch,
                                Gradients& grad) {
  if (batch.empty()) throw input_error("loss_and_gradient: empty batch");
  grad = Gradients::zeros_like(m);

  const double scale = 1.0 / (static_cast<double>(batch.size()) * m.output_width());
  double loss = 0.0;
  std::vector<double> delta, next_delta;
  for (const TrainSample& sample : batch) {
    if (static_cast<int>(sample.features.size()) != m.input_width() ||
        static_cast<int>(sample.labels.size()) != m.output_width()) {
      throw config_error("loss_and_gradient: sample width mismatch");
    }
    const auto acts = detail::forward_activations(m, sample.features);
    const auto& out = acts.back();

    delta.assign(out.size(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double p = std::clamp(out[k], kBceClip, 1.0 - kBceClip);
      const double y = sample.labels[k];
      loss -= scale * (y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
      // logistic + cross-entropy: dL/dz = p - y
      delta[k] = scale * (out[k] - y);
    }

    for (int l = m.layer_count() - 1; l >= 0; --l) {
      const int in = m.layer_sizes[l];
      const int out_w = m.layer_sizes[l + 1];
      const auto& a_prev = acts[static_cast<std::size_t>(l)];
      for (int o = 0; o < out_w; ++o) {
        const double d = delta[static_cast<std::size_t>(o)];
        grad.biases[l][static_cast<std::size_t>(o)] += d;
        double* grow = grad.weights[l].data() + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += d * a_prev[static_cast<std::size_t>(i)];
      }
      if (l == 0) break;
      next_delta.assign(static_cast<std::size_t>(in), 0.0);
      for (int i = 0; i < in; ++i) {
        double s = 0.0;
        for (int o = 0; o < out_w; ++o) {
          s += m.weights[l][static_cast<std::size_t>(o) * in + i] *
               delta[static_cast<std::size_t>(o)];
        }
        const double a = acts[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
        next_delta[static_cast<std::size_t>(i)] = s * a * (1.0 - a);
      }
      delta = next_delta;
    }
  }
  return loss;
}

/// One scenario's features with its six selection labels.
struct LabeledScenario {
  FeatureVector features;
  std::array<int, 6> labels{};
};

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 32;
  int max_epochs = 2000;
  int patience = 20;
  double validation_fraction = 0.10;
  double test_fraction = 0.40;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0)) throw input_error("train config: learning_rate must be positive");
    if (batch_size < 1) throw input_error("train config: batch_size must be >= 1");
    if (max_epochs < 1) throw input_error("train config: max_epochs must be >= 1");
    if (patience < 1) throw input_error("train config: patience must be >= 1");
    if (!(validation_fraction > 0 && validation_fraction < 1) ||
        !(test_fraction > 0 && test_fraction < 1) ||
        !(validation_fraction + test_fraction < 1)) {
      throw input_error("train config: fractions must lie in (0,1) and sum below 1");
    }
  }
};

struct TrainHistory {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch
  int best_epoch = 0;              // 1-based epoch whose weights were kept
  double best_val_loss = 0.0;
  std::vector<double> test_per_label_accuracy;
  double test_mean_label_accuracy = 0.0;
  double test_exact_match_accuracy = 0.0;
};

struct TrainResult {
  MLPModel model;
  TrainHistory history;
};

namespace detail {

inline double dataset_loss(const MLPModel& m, std::span<const TrainSample> data) {
  double loss = 0.0;
  for (const TrainSample& s : data) {
    const auto out = forward_activations(m, s.features).back();
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double p = std::clamp(out[k], kBceClip, 1.0 - kBceClip);
      loss -= s.labels[k] * std::log(p) + (1.0 - s.labels[k]) * std::log(1.0 - p);
    }
  }
  return loss / (static_cast<double>(data.size()) * m.output_width());
}

}  // namespace detail

/// Mini-batch gradient descent with early stopping on a held-out validation
/// split. The data is shuffled once per seed and divided into
/// train / validation / test; standardisation statistics come from the
/// training split only. The weights from the best-validation epoch are kept.
inline TrainResult train(const std::vector<LabeledScenario>& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() < 20) {
    throw input_error("train: need at least 20 labeled scenarios, got " +
                      std::to_string(data.size()));
  }

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng = make_rng(cfg.seed, 1);
  shuffle_in_place(order, split_rng);

  const std::size_t n = data.size();
  const std::size_t n_val = static_cast<std::size_t>(cfg.validation_fraction * n);
  const std::size_t n_test = static_cast<std::size_t>(cfg.test_fraction * n);
  const std::size_t n_train = n - n_val - n_test;
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw input_error("train: a split is empty; provide more data");
  }

  auto to_sample = [](const LabeledScenario& ls) {
    TrainSample s;
    const auto f = ls.features.as_array();
    s.features.assign(f.begin(), f.end());
    s.labels.assign(ls.labels.begin(), ls.labels.end());
    return s;
  };
  std::vector<TrainSample> train_set, val_set, test_set;
  for (std::size_t i = 0; i < n_train; ++i) train_set.push_back(to_sample(data[order[i]]));
  for (std::size_t i = n_train; i < n_train + n_val; ++i) val_set.push_back(to_sample(data[order[i]]));
  for (std::size_t i = n_train + n_val; i < n; ++i) test_set.push_back(to_sample(data[order[i]]));

  MLPModel model = init_model(cfg.seed);

  // Standardisation from the training split only (no leakage).
  const std::size_t width = static_cast<std::size_t>(model.input_width());
  model.feature_means.assign(width, 0.0);
  model.feature_stds.assign(width, 0.0);
  for (const TrainSample& s : train_set) {
    for (std::size_t k = 0; k < width; ++k) model.feature_means[k] += s.features[k];
  }
  for (std::size_t k = 0; k < width; ++k) model.feature_means[k] /= static_cast<double>(n_train);
  for (const TrainSample& s : train_set) {
    for (std::size_t k = 0; k < width; ++k) {
      const double d = s.features[k] - model.feature_means[k];
      model.feature_stds[k] += d * d;
    }
  }
  for (std::size_t k = 0; k < width; ++k) {
    model.feature_stds[k] = std::sqrt(model.feature_stds[k] / static_cast<double>(n_train));
    if (!(model.feature_stds[k] > 0)) model.feature_stds[k] = 1.0;  // constant feature
  }

  TrainHistory history;
  MLPModel best_model = model;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;

  Rng epoch_rng = make_rng(cfg.seed, 2);
  std::vector<std::size_t> train_order(train_set.size());
  for (std::size_t i = 0; i < train_order.size(); ++i) train_order[i] = i;

  Gradients grad;
  std::vector<TrainSample> batch;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_in_place(train_order, epoch_rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train_order.size(); start += cfg.batch_size) {
      batch.clear();
      const std::size_t end = std::min(train_order.size(), start + cfg.batch_size);
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[train_order[i]]);
      epoch_loss += loss_and_gradient(model, batch, grad);
      ++batches;
      for (int l = 0; l < model.layer_count(); ++l) {
        for (std::size_t k = 0; k < model.weights[l].size(); ++k) {
          model.weights[l][k] -= cfg.learning_rate * grad.weights[l][k];
        }
        for (std::size_t k = 0; k < model.biases[l].size(); ++k) {
          model.biases[l][k] -= cfg.learning_rate * grad.biases[l][k];
        }
      }
    }
    history.train_loss.push_back(epoch_loss / static_cast<double>(batches));

    const double val = detail::dataset_loss(model, val_set);
    history.val_loss.push_back(val);
    if (val < best_val) {
      best_val = val;
      best_model = model;
      history.best_epoch = epoch;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= cfg.patience) break;
    }
  }
  history.best_val_loss = best_val;

  // Test metrics on the restored best weights.
  const int out_w = best_model.output_width();
  std::vector<double> correct(static_cast<std::size_t>(out_w), 0.0);
  double exact = 0.0;
  for (const TrainSample& s : test_set) {
    const auto p = detail::forward_activations(best_model, s.features).back();
    bool all = true;
    for (int k = 0; k < out_w; ++k) {
      const int pred = p[static_cast<std::size_t>(k)] >= 0.5 ? 1 : 0;
      const int truth = s.labels[static_cast<std::size_t>(k)] >= 0.5 ? 1 : 0;
      if (pred == truth) {
        correct[static_cast<std::size_t>(k)] += 1.0;
      } else {
        all = false;
      }
    }
    if (all) exact += 1.0;
  }
  history.test_per_label_accuracy.resize(static_cast<std::size_t>(out_w));
  double mean_acc = 0.0;
  for (int k = 0; k < out_w; ++k) {
    history.test_per_label_accuracy[static_cast<std::size_t>(k)] =
        correct[static_cast<std::size_t>(k)] / static_cast<double>(test_set.size());
    mean_acc += history.test_per_label_accuracy[static_cast<std::size_t>(k)];
  }
  history.test_mean_label_accuracy = mean_acc / out_w;
  history.test_exact_match_accuracy = exact / static_cast<double>(test_set.size());

  return {std::move(best_model), std::move(history)};
}

// ---------------------------------------------------------------------------
// Synthetic teacher labels: a deterministic favourability rule with optional
// independent label noise, standing in for human selections.

using TeacherThresholds = std::array<double, 6>;

/// Per-slot minimum favourable margin for the default subset:
/// private cost >= $3 cheaper, private cost >= 50% cheaper, shared at most
/// 5 min slower than a taxi, public transit >= 5 min slower, public transit
/// relatively more expensive at all, and >= 1 kg CO2 saved.
inline TeacherThresholds default_teacher_thresholds() {
  return {3.0, 50.0, -5.0, 5.0, 0.0, 1.0};
}

inline std::vector<LabeledScenario> synth_labels(const std::vector<Scenario>& scenarios,
                                                 const SelectionSubset& subset,
                                                 const TeacherThresholds& thresholds,
                                                 double noise_rate, std::uint64_t seed) {
  subset.validate();
  if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
    throw input_error("synth_labels: noise_rate must lie in [0, 0.5)");
  }
  for (double t : thresholds) {
    if (!std::isfinite(t)) throw input_error("synth_labels: thresholds must be finite");
  }
  Rng rng = make_rng(seed);
  std::vector<LabeledScenario> out;
  out.reserve(scenarios.size());
  for (const Scenario& s : scenarios) {
    LabeledScenario ls;
    ls.features = extract_features(s);
    for (int slot = 0; slot < 6; ++slot) {
      const double value = compute_value(subset.descriptor(slot), s);
      int label = value >= thresholds[static_cast<std::size_t>(slot)] ? 1 : 0;
      if (noise_rate > 0.0 && uniform_real01(rng) < noise_rate) label = 1 - label;
      ls.labels[static_cast<std::size_t>(slot)] = label;
    }
    out.push_back(ls);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model persistence: versioned JSON, bit-exact round trip.

inline void save_model(const MLPModel& m, std::ostream& out) {
  m.validate();
  nlohmann::json doc{{"version", kModelFileVersion},
                     {"layer_sizes", m.layer_sizes},
                     {"activation", "logistic"},
                     {"weights", m.weights},
                     {"biases", m.biases},
                     {"feature_means", m.feature_means},
                     {"feature_stds", m.feature_stds}};
  out << doc.dump(2) << "\n";
}

inline MLPModel load_model(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("model file: ") + e.what());
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    throw parse_error("model file: missing version field");
  }
  if (doc["version"] != kModelFileVersion) {
    throw version_error("model file: unsupported version " + doc["version"].dump());
  }
  MLPModel m;
  try {
    doc.at("layer_sizes").get_to(m.layer_sizes);
    if (doc.at("activation") != "logistic") {
      throw parse_error("model file: unsupported activation '" +
                        doc["activation"].get<std::string>() + "'");
    }
    doc.at("weights").get_to(m.weights);
    doc.at("biases").get_to(m.biases);
    doc.at("feature_means").get_to(m.feature_means);
    doc.at("feature_stds").get_to(m.feature_stds);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("model file: ") + e.what());
  }
  try {
    m.validate();
  } catch (const config_error& e) {
    throw parse_error(std::string("model file: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Labeled-scenario CSV: the scenario columns followed by label_0..label_5.

inline constexpr const char* kLabeledCsvHeader =
    "scenario_id,shared_cost_usd,shared_time_min,private_cost_usd,private_time_min,"
    "public_cost_usd,public_time_min,co2_saved_kg,label_0,label_1,label_2,label_3,label_4,label_5";

inline void save_labeled_scenarios(const std::vector<Scenario>& scenarios,
                                   const std::vector<LabeledScenario>& labeled,
                                   std::ostream& out) {
  if (scenarios.size() != labeled.size()) {
    throw input_error("save_labeled_scenarios: scenario/label count mismatch");
  }
  out << kLabeledCsvHeader << "\n";
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const TripQuote& q = scenarios[i].quote;
    out << scenarios[i].scenario_id << ',' << double_to_string(q.shared_cost_usd) << ','
        << double_to_string(q.shared_time_min) << ',' << double_to_string(q.private_cost_usd)
        << ',' << double_to_string(q.private_time_min) << ','
        << double_to_string(q.public_cost_usd) << ',' << double_to_string(q.public_time_min)
        << ',' << double_to_string(q.co2_saved_kg);
    for (int label : labeled[i].labels) out << ',' << label;
    out << "\n";
  }
}

inline std::vector<LabeledScenario> load_labeled_scenarios(std::istream& in) {
  std::vector<LabeledScenario> out;
  read_csv(in, kLabeledCsvHeader, "labeled scenarios",
           [&](int line_no, const std::vector<std::string>& f) {
             const std::string where = "labeled scenarios line " + std::to_string(line_no);
             if (f.size() != 14) {
               throw parse_error(where + ": expected 14 fields, got " + std::to_string(f.size()));
             }
             Scenario s;
             s.scenario_id = static_cast<int>(parse_int(f[0], where));
             s.quote.shared_cost_usd = parse_double(f[1], where);
             s.quote.shared_time_min = parse_double(f[2], where);
             s.quote.private_cost_usd = parse_double(f[3], where);
             s.quote.private_time_min = parse_double(f[4], where);
             s.quote.public_cost_usd = parse_double(f[5], where);
             s.quote.public_time_min = parse_double(f[6], where);
             s.quote.co2_saved_kg = parse_double(f[7], where);
             LabeledScenario ls;
             ls.features = extract_features(s);
             for (int k = 0; k < 6; ++k) {
               const long long v = parse_int(f[static_cast<std::size_t>(8 + k)], where);
               if (v != 0 && v != 1) throw parse_error(where + ": labels must be 0 or 1");
               ls.labels[static_cast<std::size_t>(k)] = static_cast<int>(v);
             }
             out.push_back(ls);
           });
  return out;
}

}  // namespace rexlab
