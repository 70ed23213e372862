// Copyright 2026 The facecut-pipeline Authors
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

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "facecut/errors.hpp"

namespace facecut::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A batch of feature maps stored channels x (batch * height * width); the
/// column of (b, y, x) is (b * height + y) * width + x.
template <typename Scalar>
struct FeatureMaps {
  Matrix<Scalar> data;
  int batch = 0;
  int height = 0;
  int width = 0;

  FeatureMaps() = default;
  FeatureMaps(int channels, int batch_, int height_, int width_)
      : data(Matrix<Scalar>::Zero(channels, Eigen::Index{batch_} * height_ * width_)),
        batch(batch_),
        height(height_),
        width(width_) {}

  int channels() const { return static_cast<int>(data.rows()); }
  Eigen::Index plane() const { return Eigen::Index{height} * width; }

  /// Channels x (height * width) block of one sample.
  auto sample(int b) { return data.middleCols(b * plane(), plane()); }
  auto sample(int b) const { return data.middleCols(b * plane(), plane()); }
};

// Convolution ------------------------------------------------------------------

/// Unrolls 3x3 zero-padded neighbourhoods: (channels * 9) x columns, row
/// index channel * 9 + ky * 3 + kx.
template <typename Scalar>
Matrix<Scalar> im2col3x3(const FeatureMaps<Scalar>& in) {
  const int C = in.channels(), H = in.height, W = in.width;
  Matrix<Scalar> cols = Matrix<Scalar>::Zero(C * 9, in.data.cols());
  for (int b = 0; b < in.batch; ++b) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const Eigen::Index col = (Eigen::Index{b} * H + y) * W + x;
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= H) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= W) continue;
            const Eigen::Index src = (Eigen::Index{b} * H + sy) * W + sx;
            for (int c = 0; c < C; ++c) cols(c * 9 + ky * 3 + kx, col) = in.data(c, src);
          }
        }
      }
    }
  }
  return cols;
}

/// Adjoint of im2col3x3.
template <typename Scalar>
FeatureMaps<Scalar> col2im3x3(const Matrix<Scalar>& cols, int channels, int batch, int height,
                              int width) {
  FeatureMaps<Scalar> out(channels, batch, height, width);
  for (int b = 0; b < batch; ++b) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const Eigen::Index col = (Eigen::Index{b} * height + y) * width + x;
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= width) continue;
            const Eigen::Index dst = (Eigen::Index{b} * height + sy) * width + sx;
            for (int c = 0; c < channels; ++c) out.data(c, dst) += cols(c * 9 + ky * 3 + kx, col);
          }
        }
      }
    }
  }
  return out;
}

// Pooling ----------------------------------------------------------------------

/// 2x2 stride-2 max pooling; odd trailing rows/columns are dropped. `argmax`
/// receives the winning input column for every output element.
template <typename Scalar>
FeatureMaps<Scalar> max_pool2(const FeatureMaps<Scalar>& in, std::vector<Eigen::Index>& argmax) {
  const int H = in.height / 2, W = in.width / 2;
  if (H == 0 || W == 0) throw ShapeError("feature map too small to pool");
  FeatureMaps<Scalar> out(in.channels(), in.batch, H, W);
  argmax.assign(static_cast<std::size_t>(out.data.size()), 0);
  for (int b = 0; b < in.batch; ++b) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const Eigen::Index o = (Eigen::Index{b} * H + y) * W + x;
        const Eigen::Index i0 = (Eigen::Index{b} * in.height + 2 * y) * in.width + 2 * x;
        const Eigen::Index candidates[4] = {i0, i0 + 1, i0 + in.width, i0 + in.width + 1};
        for (int c = 0; c < in.channels(); ++c) {
          Eigen::Index best = candidates[0];
          for (int k = 1; k < 4; ++k) {
            if (in.data(c, candidates[k]) > in.data(c, best)) best = candidates[k];
          }
          out.data(c, o) = in.data(c, best);
          argmax[static_cast<std::size_t>(o * out.channels() + c)] = best;
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
FeatureMaps<Scalar> max_pool2_backward(const FeatureMaps<Scalar>& grad_out,
                                       const std::vector<Eigen::Index>& argmax, int in_height,
                                       int in_width) {
  FeatureMaps<Scalar> grad_in(grad_out.channels(), grad_out.batch, in_height, in_width);
  for (Eigen::Index o = 0; o < grad_out.data.cols(); ++o) {
    for (int c = 0; c < grad_out.channels(); ++c) {
      grad_in.data(c, argmax[static_cast<std::size_t>(o * grad_out.channels() + c)]) +=
          grad_out.data(c, o);
    }
  }
  return grad_in;
}

/// Channels x batch spatial means.
template <typename Scalar>
Matrix<Scalar> global_average_pool(const FeatureMaps<Scalar>& in) {
  Matrix<Scalar> pooled(in.channels(), in.batch);
  for (int b = 0; b < in.batch; ++b) pooled.col(b) = in.sample(b).rowwise().mean();
  return pooled;
}

template <typename Scalar>
FeatureMaps<Scalar> global_average_pool_backward(const Matrix<Scalar>& grad_pooled, int height,
                                                 int width) {
  FeatureMaps<Scalar> grad(static_cast<int>(grad_pooled.rows()),
                           static_cast<int>(grad_pooled.cols()), height, width);
  const Scalar scale = Scalar(1) / static_cast<Scalar>(grad.plane());
  for (int b = 0; b < grad.batch; ++b) {
    grad.sample(b).colwise() = grad_pooled.col(b) * scale;
  }
  return grad;
}

// Dense head and losses -----------------------------------------------------------

/// logits = weight * features + bias, weight is classes x features.
template <typename Scalar>
struct Dense {
  Matrix<Scalar> weight;
  Vector<Scalar> bias;

  Eigen::Index parameter_count() const { return weight.size() + bias.size(); }

  Matrix<Scalar> forward(const Matrix<Scalar>& features) const {
    return (weight * features).colwise() + bias;
  }
};

template <typename Scalar>
Matrix<Scalar> log_softmax_columns(const Matrix<Scalar>& logits) {
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar peak = logits.col(j).maxCoeff();
    const Scalar lse = peak + std::log((logits.col(j).array() - peak).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> softmax_columns(const Matrix<Scalar>& logits) {
  return log_softmax_columns(logits).array().exp().matrix();
}

/// Classes x batch indicator matrix.
template <typename Scalar>
Matrix<Scalar> one_hot(std::span<const int> labels, int classes) {
  Matrix<Scalar> targets = Matrix<Scalar>::Zero(classes, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t j = 0; j < labels.size(); ++j) targets(labels[j], static_cast<Eigen::Index>(j)) = 1;
  return targets;
}

/// Batch mean of -sum_k t_k log p_k.
template <typename Scalar>
Scalar cross_entropy(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets) {
  const Matrix<Scalar> log_p = log_softmax_columns(logits);
  return -(targets.array() * log_p.array()).sum() / static_cast<Scalar>(logits.cols());
}

/// Batch mean of sum_k t_k (log t_k - log p_k), with 0 log 0 taken as 0.
template <typename Scalar>
Scalar kl_divergence(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets) {
  const Matrix<Scalar> log_p = log_softmax_columns(logits);
  Scalar total = 0;
  for (Eigen::Index j = 0; j < targets.cols(); ++j) {
    for (Eigen::Index k = 0; k < targets.rows(); ++k) {
      const Scalar t = targets(k, j);
      if (t > Scalar(0)) total += t * (std::log(t) - log_p(k, j));
    }
  }
  return total / static_cast<Scalar>(logits.cols());
}

/// Gradient of either loss w.r.t. the logits when each target column sums to 1.
template <typename Scalar>
Matrix<Scalar> loss_gradient(const Matrix<Scalar>& logits, const Matrix<Scalar>& targets) {
  return (softmax_columns(logits) - targets) / static_cast<Scalar>(logits.cols());
}

// Toy backbone -------------------------------------------------------------------------

/// Stacked conv3x3 -> ReLU -> maxpool2 stages. The output of the last stage
/// is the feature-map tap.
template <typename Scalar>
class ConvStack {
 public:
  struct Stage {
    Matrix<Scalar> weight;  ///< out x (in * 9)
    Vector<Scalar> bias;
  };

  struct Cache {
    std::vector<Matrix<Scalar>> cols;
    std::vector<Matrix<Scalar>> activations;  ///< post-ReLU, pre-pool
    std::vector<std::vector<Eigen::Index>> argmax;
    std::vector<std::pair<int, int>> dims;  ///< input height/width per stage
  };

  ConvStack() = default;

  /// He-normal weights, zero biases.
  ConvStack(int in_channels, std::span<const int> channels, std::mt19937_64& rng) {
    int in = in_channels;
    for (int out : channels) {
      std::normal_distribution<Scalar> normal(Scalar(0), std::sqrt(Scalar(2) / Scalar(in * 9)));
      Stage stage{Matrix<Scalar>(out, in * 9), Vector<Scalar>::Zero(out)};
      for (Eigen::Index i = 0; i < stage.weight.size(); ++i) stage.weight.data()[i] = normal(rng);
      stages_.push_back(std::move(stage));
      in = out;
    }
  }

  std::vector<Stage>& stages() { return stages_; }
  const std::vector<Stage>& stages() const { return stages_; }
  int output_channels() const { return static_cast<int>(stages_.back().weight.rows()); }

  FeatureMaps<Scalar> forward(const FeatureMaps<Scalar>& input, Cache* cache = nullptr) const {
    FeatureMaps<Scalar> x = input;
    if (cache) *cache = Cache{};
    for (const Stage& stage : stages_) {
      Matrix<Scalar> cols = im2col3x3(x);
      FeatureMaps<Scalar> act;
      act.batch = x.batch;
      act.height = x.height;
      act.width = x.width;
      act.data = ((stage.weight * cols).colwise() + stage.bias).cwiseMax(Scalar(0));
      std::vector<Eigen::Index> argmax;
      FeatureMaps<Scalar> pooled = max_pool2(act, argmax);
      if (cache) {
        cache->dims.emplace_back(x.height, x.width);
        cache->cols.push_back(std::move(cols));
        cache->activations.push_back(std::move(act.data));
        cache->argmax.push_back(std::move(argmax));
      }
      x = std::move(pooled);
    }
    return x;
  }

  /// Accumulates parameter gradients into `grads` (same layout as stages()).
  void backward(const FeatureMaps<Scalar>& grad_tap, const Cache& cache,
                std::vector<Stage>& grads) const {
    if (grads.size() != stages_.size()) {
      grads.clear();
      for (const Stage& s : stages_) {
        grads.push_back({Matrix<Scalar>::Zero(s.weight.rows(), s.weight.cols()),
                         Vector<Scalar>::Zero(s.bias.size())});
      }
    }
    FeatureMaps<Scalar> grad = grad_tap;
    for (std::size_t k = stages_.size(); k-- > 0;) {
      const auto [h, w] = cache.dims[k];
      FeatureMaps<Scalar> grad_act = max_pool2_backward(grad, cache.argmax[k], h, w);
      grad_act.data.array() *= (cache.activations[k].array() > Scalar(0)).template cast<Scalar>();
      grads[k].weight.noalias() += grad_act.data * cache.cols[k].transpose();
      grads[k].bias += grad_act.data.rowwise().sum();
      if (k > 0) {
        const Matrix<Scalar> grad_cols = stages_[k].weight.transpose() * grad_act.data;
        grad = col2im3x3(grad_cols, static_cast<int>(stages_[k].weight.cols() / 9), grad.batch, h, w);
      }
    }
  }

 private:
  std::vector<Stage> stages_;
};

}  // namespace facecut::nn
