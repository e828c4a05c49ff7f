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

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "driftarena/common.hpp"

namespace driftarena::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Rows of `rows` stacked into an n x dim matrix.
Matrix stack_rows(std::span<const std::vector<double>> rows, std::size_t dim);

// One-hidden-layer perceptron in -> hidden (ReLU) -> out (linear). All
// parameters live in one flat vector so optimizers and finite-difference
// checks can treat them uniformly. Layout: W1 (hidden x in, row-major), b1,
// W2 (out x hidden, row-major), b2.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t in, std::size_t hidden, std::size_t out);

  // He-uniform weights, zero biases.
  void init(Rng& rng);

  std::size_t in_dim() const { return in_; }
  std::size_t hidden_dim() const { return hidden_; }
  std::size_t out_dim() const { return out_; }
  std::size_t param_count() const { return static_cast<std::size_t>(theta_.size()); }

  Vector& params() { return theta_; }
  const Vector& params() const { return theta_; }

  struct Cache {
    Matrix input;
    Matrix hidden;  // post-activation
  };

  // x: n x in. Returns n x out.
  Matrix forward(const Matrix& x, Cache* cache = nullptr) const;
  Vector forward_one(std::span<const double> x) const;

  // Gradient of a loss whose derivative w.r.t. the outputs is `d_out`.
  Vector backward(const Cache& cache, const Matrix& d_out) const;

  bool operator==(const Mlp& o) const {
    return in_ == o.in_ && hidden_ == o.hidden_ && out_ == o.out_ && theta_ == o.theta_;
  }

 private:
  using MatMap = Eigen::Map<const Matrix>;
  MatMap w1() const { return MatMap(theta_.data(), static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(in_)); }
  Eigen::Map<const Vector> b1() const {
    return Eigen::Map<const Vector>(theta_.data() + hidden_ * in_, static_cast<Eigen::Index>(hidden_));
  }
  MatMap w2() const {
    return MatMap(theta_.data() + hidden_ * in_ + hidden_, static_cast<Eigen::Index>(out_),
                  static_cast<Eigen::Index>(hidden_));
  }
  Eigen::Map<const Vector> b2() const {
    return Eigen::Map<const Vector>(theta_.data() + hidden_ * in_ + hidden_ + out_ * hidden_,
                                    static_cast<Eigen::Index>(out_));
  }

  std::size_t in_ = 0;
  std::size_t hidden_ = 0;
  std::size_t out_ = 0;
  Vector theta_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, AdamConfig config);

  void step(Vector& params, const Vector& grad);
  void reset();

  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  Vector& first_moment() { return m_; }
  Vector& second_moment() { return v_; }
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }
  std::uint64_t steps() const { return t_; }
  void set_steps(std::uint64_t t) { t_ = t; }

 private:
  AdamConfig config_;
  Vector m_;
  Vector v_;
  std::uint64_t t_ = 0;
};

// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace driftarena::nn
