// Copyright 2026 The DriftArena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "driftarena/nids.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "driftarena/checkpoint.hpp"

namespace driftarena {

namespace {

nn::Matrix feature_matrix(std::span<const FeatureVector> xs) {
  nn::Matrix m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(kFeatureDim));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].values.size() != kFeatureDim) {
      throw DimensionError("feature vector has " + std::to_string(xs[i].values.size()) +
                           " entries, expected 1525");
    }
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(xs[i].values.data(), static_cast<Eigen::Index>(kFeatureDim));
  }
  return m;
}

// Mean cross-entropy of softmax(logits) against labels; fills d_logits when given.
double cross_entropy(const nn::Matrix& logits, std::span<const FeatureVector> xs, nn::Matrix* d_logits) {
  const nn::Matrix p = nn::softmax_rows(logits);
  const double n = static_cast<double>(xs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const int y = to_int(xs[i].label);
    // log-softmax directly for numerical safety
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    loss -= logits(r, y) - lse;
  }
  if (d_logits) {
    *d_logits = p;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      (*d_logits)(static_cast<Eigen::Index>(i), to_int(xs[i].label)) -= 1.0;
    }
    *d_logits /= n;
  }
  return loss / n;
}

}  // namespace

Classifier::Classifier(ClassifierConfig config, std::uint64_t seed)
    : config_(config), seed_(seed), net_(kFeatureDim, config.hidden, 2),
      input_mean_(nn::Vector::Zero(static_cast<Eigen::Index>(kFeatureDim))),
      rng_(seed) {}

Classifier Classifier::fit_initial(std::span<const FeatureVector> train, std::uint64_t seed,
                                   ClassifierConfig config) {
  if (train.empty()) throw ConfigError("initial training set is empty");
  const bool has_benign = std::any_of(train.begin(), train.end(),
                                      [](const auto& s) { return s.label == Label::kBenign; });
  const bool has_malicious = std::any_of(train.begin(), train.end(),
                                         [](const auto& s) { return s.label == Label::kMalicious; });
  if (!has_benign || !has_malicious) throw ConfigError("initial training set must contain both classes");
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");

  Classifier model(config, seed);
  for (const auto& x : train) {
    model.input_mean_ += Eigen::Map<const nn::Vector>(x.values.data(), static_cast<Eigen::Index>(kFeatureDim));
  }
  model.input_mean_ /= static_cast<double>(train.size());
  model.net_.init(model.rng_);
  nn::Adam opt(model.net_.param_count(), nn::AdamConfig{config.learning_rate});
  for (std::size_t e = 0; e < config.epochs; ++e) model.run_epoch(train, &opt);
  return model;
}

void Classifier::run_epoch(std::span<const FeatureVector> samples, nn::Adam* opt) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  std::vector<FeatureVector> mb;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    mb.clear();
    for (std::size_t i = start; i < end; ++i) mb.push_back(samples[order[i]]);
    auto [loss, grad] = loss_and_gradient(mb);
    (void)loss;
    if (config_.weight_decay > 0.0) grad += config_.weight_decay * net_.params();
    if (opt) {
      opt->step(net_.params(), grad);
    } else {
      net_.params() -= config_.incremental_learning_rate * grad;
    }
  }
}

nn::Matrix Classifier::inputs(std::span<const FeatureVector> xs) const {
  nn::Matrix m = feature_matrix(xs);
  m.rowwise() -= input_mean_.transpose();
  return m;
}

ProbabilityPair Classifier::predict_proba(std::span<const double> x) const {
  if (x.size() != kFeatureDim) {
    throw DimensionError("feature vector has " + std::to_string(x.size()) + " entries, expected 1525");
  }
  const nn::Vector centered =
      Eigen::Map<const nn::Vector>(x.data(), static_cast<Eigen::Index>(kFeatureDim)) - input_mean_;
  const nn::Vector z = net_.forward_one(std::span<const double>(centered.data(), kFeatureDim));
  const double mx = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - mx);
  const double e1 = std::exp(z[1] - mx);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

nn::Matrix Classifier::predict_proba(std::span<const FeatureVector> xs) const {
  if (xs.empty()) return nn::Matrix(0, 2);
  return nn::softmax_rows(net_.forward(inputs(xs)));
}

Label Classifier::predict(const FeatureVector& x) const {
  const auto p = predict_proba(x);
  return p[1] > p[0] ? Label::kMalicious : Label::kBenign;
}

double Classifier::loss(std::span<const FeatureVector> samples) const {
  if (samples.empty()) return 0.0;
  return cross_entropy(net_.forward(inputs(samples)), samples, nullptr);
}

std::pair<double, nn::Vector> Classifier::loss_and_gradient(std::span<const FeatureVector> samples) const {
  if (samples.empty()) return {0.0, nn::Vector::Zero(static_cast<Eigen::Index>(net_.param_count()))};
  nn::Mlp::Cache cache;
  const nn::Matrix logits = net_.forward(inputs(samples), &cache);
  nn::Matrix d_logits;
  const double l = cross_entropy(logits, samples, &d_logits);
  return {l, net_.backward(cache, d_logits)};
}

Classifier::UpdateReport Classifier::partial_fit(std::span<const FeatureVector> samples, std::size_t passes) {
  UpdateReport report;
  if (samples.empty()) {
    report.skipped = true;
    return report;
  }
  for (std::size_t p = 0; p < passes; ++p) {
    report.losses.push_back(loss(samples));
    run_epoch(samples, nullptr);
  }
  report.losses.push_back(loss(samples));
  ++version_;
  return report;
}

void Classifier::save(const std::filesystem::path& path) const {
  Checkpoint ck;
  ck.kind = "classifier";
  ck.meta["input_dim"] = std::to_string(net_.in_dim());
  ck.meta["hidden"] = std::to_string(net_.hidden_dim());
  ck.meta["output_dim"] = std::to_string(net_.out_dim());
  ck.meta["seed"] = std::to_string(seed_);
  ck.meta["version"] = std::to_string(version_);
  ck.meta["epochs"] = std::to_string(config_.epochs);
  ck.meta["batch_size"] = std::to_string(config_.batch_size);
  ck.meta["passes"] = std::to_string(config_.passes);
  auto to_vec = [](const nn::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  ck.arrays["params"] = to_vec(net_.params());
  ck.arrays["input_mean"] = to_vec(input_mean_);
  ck.arrays["learning_rates"] = {config_.learning_rate, config_.incremental_learning_rate};
  ck.set_double("weight_decay", config_.weight_decay);
  std::ostringstream rng_state;
  rng_state << rng_;
  ck.meta["rng_state"] = rng_state.str();
  ck.save(path);
}

Classifier Classifier::load(const std::filesystem::path& path) {
  const Checkpoint ck = Checkpoint::load(path);
  if (ck.kind != "classifier") throw ParseError("checkpoint is not a classifier: " + ck.kind);
  if (ck.meta_u64("input_dim") != kFeatureDim || ck.meta_u64("output_dim") != 2) {
    throw ParseError("classifier checkpoint has unexpected dimensions");
  }
  ClassifierConfig cfg;
  cfg.hidden = ck.meta_u64("hidden");
  cfg.epochs = ck.meta_u64("epochs");
  cfg.batch_size = ck.meta_u64("batch_size");
  cfg.passes = ck.meta_u64("passes");
  const auto& lrs = ck.array_at("learning_rates");
  if (lrs.size() != 2) throw ParseError("classifier checkpoint: bad learning_rates");
  cfg.learning_rate = lrs[0];
  cfg.incremental_learning_rate = lrs[1];
  cfg.weight_decay = ck.meta_double("weight_decay");
  Classifier model(cfg, ck.meta_u64("seed"));
  model.version_ = ck.meta_u64("version");
  auto fill = [](nn::Vector& dst, const std::vector<double>& src, const char* what) {
    if (static_cast<std::size_t>(dst.size()) != src.size()) {
      throw ParseError(std::string("classifier checkpoint: ") + what + " has wrong length");
    }
    std::copy(src.begin(), src.end(), dst.data());
  };
  fill(model.net_.params(), ck.array_at("params"), "params");
  fill(model.input_mean_, ck.array_at("input_mean"), "input_mean");
  std::istringstream rng_state(ck.meta_at("rng_state"));
  rng_state >> model.rng_;
  return model;
}

Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const std::size_t n = c.total();
  m.acc = n == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(n);
  if (c.fp + c.tn == 0) {
    m.fpr_undefined = true;
  } else {
    m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  }
  if (c.fn + c.tp == 0) {
    m.fnr_undefined = true;
  } else {
    m.fnr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
  }
  m.balanced_acc = 1.0 - (m.fpr + m.fnr) / 2.0;
  return m;
}

Confusion confusion_of(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw DimensionError("prediction/label count mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool pos = predicted[i] == Label::kMalicious;
    const bool actual = truth[i] == Label::kMalicious;
    if (pos && actual) ++c.tp;
    else if (!pos && !actual) ++c.tn;
    else if (pos) ++c.fp;
    else ++c.fn;
  }
  return c;
}

Metrics evaluate(const Classifier& model, std::span<const FeatureVector> test) {
  const nn::Matrix p = model.predict_proba(test);
  std::vector<Label> predicted(test.size());
  std::vector<Label> truth(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    predicted[i] = p(r, 1) > p(r, 0) ? Label::kMalicious : Label::kBenign;
    truth[i] = test[i].label;
  }
  return metrics_from_confusion(confusion_of(predicted, truth));
}

double entropy(const ProbabilityPair& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace driftarena
