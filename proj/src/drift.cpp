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

#include "driftarena/drift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace driftarena {

namespace {

constexpr std::size_t kLevels = 256;

std::size_t histogram_bin(double v, std::size_t bins) {
  if (v <= 0.0) return 0;
  const auto b = static_cast<std::size_t>(v * static_cast<double>(bins));
  return std::min(b, bins - 1);
}

void check_dim(const FeatureVector& x) {
  if (x.values.size() != kFeatureDim) {
    throw DimensionError("feature vector has " + std::to_string(x.values.size()) +
                         " entries, expected 1525");
  }
}

bool batch_on_grid(std::span<const FeatureVector> batch) {
  for (const auto& x : batch) {
    for (double v : x.values) {
      if (grid_level(v) < 0) return false;
    }
  }
  return true;
}

// kFeatureDim x 256 level counts of a batch known to be on the grid.
std::vector<std::uint32_t> batch_grid_counts(std::span<const FeatureVector> batch) {
  std::vector<std::uint32_t> counts(kFeatureDim * kLevels, 0);
  for (const auto& x : batch) {
    for (std::size_t j = 0; j < kFeatureDim; ++j) ++counts[j * kLevels + grid_level(x.values[j])];
  }
  return counts;
}

std::vector<double> column(std::span<const FeatureVector> xs, std::size_t j) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i].values[j];
  return out;
}

std::vector<double> probabilities(std::vector<double> h) {
  double total = 0.0;
  for (double c : h) total += c;
  if (total > 0.0) {
    for (double& c : h) c /= total;
  }
  return h;
}

void require_inputs(std::span<const FeatureVector> batch, const SeenStats& seen) {
  if (batch.empty()) throw ConfigError("drift measurement needs a non-empty batch");
  if (seen.reservoir().empty()) throw StateError("seen reservoir is empty");
  for (const auto& x : batch) check_dim(x);
}

}  // namespace

int grid_level(double v) {
  if (!(v >= 0.0 && v <= 1.0)) return -1;
  const long k = std::lround(v * 255.0);
  return static_cast<double>(k) / 255.0 == v ? static_cast<int>(k) : -1;
}

SeenStats::SeenStats(std::size_t reservoir_cap, std::uint64_t seed)
    : cap_(reservoir_cap), sum_(kFeatureDim, 0.0L), rng_(seed), grid_(kFeatureDim * kLevels, 0) {
  if (reservoir_cap == 0) throw ConfigError("reservoir cap must be positive");
}

void SeenStats::add_to_grid(const FeatureVector& x, int sign) {
  if (!on_grid_) return;
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    const int k = grid_level(x.values[j]);
    if (k < 0) {
      on_grid_ = false;
      grid_.clear();
      return;
    }
    grid_[j * kLevels + static_cast<std::size_t>(k)] += static_cast<std::uint32_t>(sign);
  }
}

void SeenStats::ingest(const FeatureVector& x) {
  check_dim(x);
  for (std::size_t j = 0; j < kFeatureDim; ++j) sum_[j] += x.values[j];
  ++count_;
  if (reservoir_.size() < cap_) {
    reservoir_.push_back(x);
    add_to_grid(x, +1);
    return;
  }
  std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
  const std::size_t slot = pick(rng_);
  if (slot < cap_) {
    add_to_grid(reservoir_[slot], -1);
    reservoir_[slot] = x;
    add_to_grid(x, +1);
  }
}

void SeenStats::ingest(std::span<const FeatureVector> xs) {
  for (const auto& x : xs) ingest(x);
}

std::vector<double> SeenStats::mean() const {
  std::vector<double> m(kFeatureDim, 0.0);
  if (count_ == 0) return m;
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    m[j] = static_cast<double>(sum_[j] / static_cast<long double>(count_));
  }
  return m;
}

std::span<const std::uint32_t> SeenStats::grid_counts(std::size_t feature) const {
  if (!on_grid_) return {};
  return std::span<const std::uint32_t>(grid_).subspan(feature * kLevels, kLevels);
}

FeatureDiff feature_diff(std::span<const FeatureVector> batch, const SeenStats& seen) {
  if (batch.empty()) throw ConfigError("feature_diff needs a non-empty batch");
  FeatureDiff out;
  out.f.assign(kFeatureDim, 0.0);
  std::vector<long double> sum(kFeatureDim, 0.0L);
  for (const auto& x : batch) {
    check_dim(x);
    for (std::size_t j = 0; j < kFeatureDim; ++j) sum[j] += x.values[j];
  }
  const std::vector<double> mu = seen.mean();
  out.cold_start = seen.count() == 0;
  const auto n = static_cast<long double>(batch.size());
  for (std::size_t j = 0; j < kFeatureDim; ++j) out.f[j] = static_cast<double>(sum[j] / n) - mu[j];
  return out;
}

double kl_divergence_discrete(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("distributions differ in support size");
  const std::vector<double> pp = probabilities({p.begin(), p.end()});
  const std::vector<double> qq = probabilities({q.begin(), q.end()});
  double d = 0.0;
  for (std::size_t i = 0; i < pp.size(); ++i) {
    if (pp[i] == 0.0) continue;
    if (qq[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += pp[i] * std::log(pp[i] / qq[i]);
  }
  return std::max(d, 0.0);
}

double kl_divergence_1d(std::span<const double> p_samples, std::span<const double> q_samples,
                        std::size_t bins, bool smoothing) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  if (p_samples.empty() || q_samples.empty()) throw ConfigError("KL needs non-empty samples");
  const double init = smoothing ? 1.0 : 0.0;
  std::vector<double> hp(bins, init);
  std::vector<double> hq(bins, init);
  for (double v : p_samples) hp[histogram_bin(v, bins)] += 1.0;
  for (double v : q_samples) hq[histogram_bin(v, bins)] += 1.0;
  return kl_divergence_discrete(hp, hq);
}

double kl_divergence(std::span<const FeatureVector> batch, const SeenStats& seen, std::size_t bins,
                     bool smoothing) {
  require_inputs(batch, seen);
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  double total = 0.0;
  if (seen.on_grid() && batch_on_grid(batch)) {
    const auto bc = batch_grid_counts(batch);
    std::vector<std::size_t> level_bin(kLevels);
    for (std::size_t k = 0; k < kLevels; ++k) level_bin[k] = histogram_bin(static_cast<double>(k) / 255.0, bins);
    const double init = smoothing ? 1.0 : 0.0;
    std::vector<double> hp(bins);
    std::vector<double> hq(bins);
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
      std::fill(hp.begin(), hp.end(), init);
      std::fill(hq.begin(), hq.end(), init);
      const auto sc = seen.grid_counts(j);
      for (std::size_t k = 0; k < kLevels; ++k) {
        hp[level_bin[k]] += bc[j * kLevels + k];
        hq[level_bin[k]] += sc[k];
      }
      total += kl_divergence_discrete(hp, hq);
    }
  } else {
    const auto& res = seen.reservoir();
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
      total += kl_divergence_1d(column(batch, j), column(res, j), bins, smoothing);
    }
  }
  return total / static_cast<double>(kFeatureDim);
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("Wasserstein needs non-empty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  // Walk the merged support; between consecutive points both CDFs are flat.
  std::size_t i = 0, j = 0;
  double prev = std::min(sa.front(), sb.front());
  double area = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      x = sa[i];
    } else {
      x = sb[j];
    }
    area += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - prev);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    prev = x;
  }
  return area;
}

double wasserstein(std::span<const FeatureVector> batch, const SeenStats& seen) {
  require_inputs(batch, seen);
  double total = 0.0;
  if (seen.on_grid() && batch_on_grid(batch)) {
    const auto bc = batch_grid_counts(batch);
    const double na = static_cast<double>(batch.size());
    const double nb = static_cast<double>(seen.reservoir().size());
    for (std::size_t j = 0; j < kFeatureDim; ++j) {
      const auto sc = seen.grid_counts(j);
      double ca = 0.0, cb = 0.0, area = 0.0;
      for (std::size_t k = 0; k + 1 < kLevels; ++k) {
        ca += bc[j * kLevels + k];
        cb += sc[k];
        const double gap = static_cast<double>(k + 1) / 255.0 - static_cast<double>(k) / 255.0;
        area += std::abs(ca / na - cb / nb) * gap;
      }
      total += area;
    }
  } else {
    const auto& res = seen.reservoir();
    for (std::size_t j = 0; j < kFeatureDim; ++j) total += wasserstein_1d(column(batch, j), column(res, j));
  }
  return total / static_cast<double>(kFeatureDim);
}

void AdaptationBudget::validate() const {
  if (B == 0) throw ConfigError("query budget B must be at least 1");
  if (!(p_low >= 0.0 && p_low <= p_high && p_high <= 1.0)) throw ConfigError("need 0 <= p_low <= p_high <= 1");
  if (!(tau_low >= 0.0 && tau_low <= tau_high)) throw ConfigError("need 0 <= tau_low <= tau_high");
  if (!(conf_threshold > 0.5 && conf_threshold <= 1.0)) throw ConfigError("conf_threshold must lie in (0.5, 1]");
}

AdaptationAction adaptation_action_from_int(int id) {
  if (id < 0 || id >= static_cast<int>(kAdaptationActionCount)) {
    throw ConfigError("adaptation action out of range: " + std::to_string(id));
  }
  return static_cast<AdaptationAction>(id);
}

std::string_view adaptation_action_name(AdaptationAction a) {
  switch (a) {
    case AdaptationAction::kOnline: return "online";
    case AdaptationAction::kActive: return "active";
    case AdaptationAction::kContinual: return "continual";
    case AdaptationAction::kPseudoLabel: return "pseudo_label";
  }
  return "unknown";
}

std::vector<std::size_t> select_online(std::size_t batch_size, std::size_t B, Rng& rng) {
  if (B == 0) throw ConfigError("query budget B must be at least 1");
  std::vector<std::size_t> idx(batch_size);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t k = std::min(B, batch_size);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, batch_size - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::vector<std::size_t> select_active_from_confidence(std::span<const double> confidence,
                                                       const AdaptationBudget& budget) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    if (confidence[i] >= budget.p_low && confidence[i] <= budget.p_high) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(confidence[a] - 0.5) < std::abs(confidence[b] - 0.5);
  });
  if (cand.size() > budget.B) cand.resize(budget.B);
  return cand;
}

std::vector<std::size_t> select_active(const Classifier& model, std::span<const FeatureVector> batch,
                                       const AdaptationBudget& budget) {
  const nn::Matrix p = model.predict_proba(batch);
  std::vector<double> conf(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) conf[i] = p.row(static_cast<Eigen::Index>(i)).maxCoeff();
  return select_active_from_confidence(conf, budget);
}

ContinualSelection select_continual_from_entropy(std::span<const double> entropies,
                                                 const AdaptationBudget& budget) {
  ContinualSelection sel;
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    if (entropies[i] < budget.tau_low) sel.representative.push_back(i);
    if (entropies[i] > budget.tau_high) sel.discriminative.push_back(i);
  }
  return sel;
}

ContinualSelection select_continual(const Classifier& model, std::span<const FeatureVector> batch,
                                    const AdaptationBudget& budget) {
  const nn::Matrix p = model.predict_proba(batch);
  std::vector<double> h(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    h[i] = entropy({p(r, 0), p(r, 1)});
  }
  return select_continual_from_entropy(h, budget);
}

std::vector<PseudoLabel> select_pseudo_from_proba(std::span<const ProbabilityPair> proba,
                                                  const AdaptationBudget& budget) {
  std::vector<PseudoLabel> out;
  for (std::size_t i = 0; i < proba.size(); ++i) {
    const auto& p = proba[i];
    const bool mal = p[1] > p[0];
    if (std::max(p[0], p[1]) > budget.conf_threshold) {
      out.push_back({i, mal ? Label::kMalicious : Label::kBenign});
    }
  }
  return out;
}

std::vector<PseudoLabel> select_pseudo(const Classifier& model, std::span<const FeatureVector> batch,
                                       const AdaptationBudget& budget) {
  const nn::Matrix p = model.predict_proba(batch);
  std::vector<ProbabilityPair> proba(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    proba[i] = {p(r, 0), p(r, 1)};
  }
  return select_pseudo_from_proba(proba, budget);
}

namespace {

// Most extreme entries first: highest entropy for the discriminative set,
// lowest for the representative set, ties by index.
std::vector<std::size_t> cap_continual(const ContinualSelection& sel, std::span<const double> h,
                                       std::size_t B) {
  std::vector<std::size_t> disc = sel.discriminative;
  std::vector<std::size_t> rep = sel.representative;
  std::stable_sort(disc.begin(), disc.end(), [&](auto a, auto b) { return h[a] > h[b]; });
  std::stable_sort(rep.begin(), rep.end(), [&](auto a, auto b) { return h[a] < h[b]; });
  std::size_t take_disc = std::min(disc.size(), (B + 1) / 2);
  std::size_t take_rep = std::min(rep.size(), B - take_disc);
  take_disc = std::min(disc.size(), B - take_rep);
  std::vector<std::size_t> out(disc.begin(), disc.begin() + static_cast<std::ptrdiff_t>(take_disc));
  out.insert(out.end(), rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(take_rep));
  return out;
}

}  // namespace

AdaptationOutcome apply_adaptation(Classifier& model, AdaptationAction action,
                                   std::span<const FeatureVector> batch, const AdaptationBudget& budget,
                                   const LabelOracle& oracle, const SeenStats& seen, Rng& rng) {
  budget.validate();
  AdaptationOutcome out;
  out.action = action;
  if (batch.empty()) {
    out.update.skipped = true;
    return out;
  }
  std::vector<FeatureVector> train;
  auto labelled = [&](std::size_t i) {
    FeatureVector x{batch[i].values, oracle(i)};
    ++out.labels_queried;
    return x;
  };
  switch (action) {
    case AdaptationAction::kOnline: {
      out.selected_indices = select_online(batch.size(), budget.B, rng);
      for (auto i : out.selected_indices) train.push_back(labelled(i));
      break;
    }
    case AdaptationAction::kActive: {
      out.selected_indices = select_active(model, batch, budget);
      for (auto i : out.selected_indices) train.push_back(labelled(i));
      break;
    }
    case AdaptationAction::kContinual: {
      const nn::Matrix p = model.predict_proba(batch);
      std::vector<double> h(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        h[i] = entropy({p(r, 0), p(r, 1)});
      }
      out.selected_indices = cap_continual(select_continual_from_entropy(h, budget), h, budget.B);
      for (auto i : out.selected_indices) train.push_back(labelled(i));
      if (!train.empty()) {
        const auto& res = seen.reservoir();
        const auto replay = select_online(res.size(), train.size(), rng);
        for (auto i : replay) train.push_back(res[i]);
        out.replay_used = replay.size();
      }
      break;
    }
    case AdaptationAction::kPseudoLabel: {
      for (const auto& pl : select_pseudo(model, batch, budget)) {
        out.selected_indices.push_back(pl.index);
        train.push_back({batch[pl.index].values, pl.label});
      }
      break;
    }
  }
  out.samples_used = out.selected_indices.size();
  if (out.samples_used == 0) {
    out.update.skipped = true;
    return out;
  }
  out.update = model.partial_fit(train);
  return out;
}

}  // namespace driftarena
