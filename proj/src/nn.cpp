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

#include "driftarena/nn.hpp"

#include <cmath>
#include <random>
#include <string>

namespace driftarena::nn {

Matrix stack_rows(std::span<const std::vector<double>> rows, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw DimensionError("expected rows of length " + std::to_string(dim) + ", got " +
                           std::to_string(rows[i].size()));
    }
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), static_cast<Eigen::Index>(dim));
  }
  return m;
}

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out)
    : in_(in), hidden_(hidden), out_(out),
      theta_(Vector::Zero(static_cast<Eigen::Index>(hidden * in + hidden + out * hidden + out))) {
  if (in == 0 || hidden == 0 || out == 0) throw ConfigError("network dimensions must be positive");
}

void Mlp::init(Rng& rng) {
  theta_.setZero();
  const double a1 = std::sqrt(6.0 / static_cast<double>(in_));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_));
  std::uniform_real_distribution<double> u1(-a1, a1);
  std::uniform_real_distribution<double> u2(-a2, a2);
  double* p = theta_.data();
  for (std::size_t i = 0; i < hidden_ * in_; ++i) p[i] = u1(rng);
  p += hidden_ * in_ + hidden_;
  for (std::size_t i = 0; i < out_ * hidden_; ++i) p[i] = u2(rng);
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const {
  if (static_cast<std::size_t>(x.cols()) != in_) {
    throw DimensionError("network expects " + std::to_string(in_) + " inputs, got " +
                         std::to_string(x.cols()));
  }
  Matrix h = x * w1().transpose();
  h.rowwise() += b1().transpose();
  h = h.cwiseMax(0.0);
  Matrix out = h * w2().transpose();
  out.rowwise() += b2().transpose();
  if (cache) {
    cache->input = x;
    cache->hidden = std::move(h);
  }
  return out;
}

Vector Mlp::forward_one(std::span<const double> x) const {
  if (x.size() != in_) {
    throw DimensionError("network expects " + std::to_string(in_) + " inputs, got " +
                         std::to_string(x.size()));
  }
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Vector h = (w1() * xv + b1()).cwiseMax(0.0);
  return w2() * h + b2();
}

Vector Mlp::backward(const Cache& cache, const Matrix& d_out) const {
  Vector grad = Vector::Zero(theta_.size());
  double* g = grad.data();
  Eigen::Map<Matrix> gw1(g, static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(in_));
  Eigen::Map<Vector> gb1(g + hidden_ * in_, static_cast<Eigen::Index>(hidden_));
  Eigen::Map<Matrix> gw2(g + hidden_ * in_ + hidden_, static_cast<Eigen::Index>(out_),
                         static_cast<Eigen::Index>(hidden_));
  Eigen::Map<Vector> gb2(g + hidden_ * in_ + hidden_ + out_ * hidden_, static_cast<Eigen::Index>(out_));

  gw2.noalias() = d_out.transpose() * cache.hidden;
  gb2 = d_out.colwise().sum().transpose();
  Matrix d_hidden = d_out * w2();
  d_hidden = d_hidden.cwiseProduct((cache.hidden.array() > 0.0).cast<double>().matrix());
  gw1.noalias() = d_hidden.transpose() * cache.input;
  gb1 = d_hidden.colwise().sum().transpose();
  return grad;
}

Adam::Adam(std::size_t n, AdamConfig config)
    : config_(config), m_(Vector::Zero(static_cast<Eigen::Index>(n))),
      v_(Vector::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::reset() {
  m_.setZero();
  v_.setZero();
  t_ = 0;
}

void Adam::step(Vector& params, const Vector& grad) {
  if (config_.learning_rate == 0.0) return;
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * grad;
  v_ = b2 * v_ + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;
  params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double mx = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace driftarena::nn
