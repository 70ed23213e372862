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

#include <doctest.h>

#include <random>

#include "facecut/nn.hpp"
#include "oracles.hpp"

using namespace facecut;
using namespace facecut::nn;

namespace {

FeatureMaps<double> random_maps(std::mt19937_64& rng, int c, int b, int h, int w) {
  FeatureMaps<double> m(c, b, h, w);
  std::normal_distribution<double> n(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.data.size(); ++i) m.data.data()[i] = n(rng);
  return m;
}

struct Net {
  ConvStack<double> conv;
  Dense<double> head;
};

double loss_of(const Net& net, const FeatureMaps<double>& x, const Matrix<double>& targets) {
  return cross_entropy<double>(net.head.forward(global_average_pool(net.conv.forward(x))), targets);
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("im2col and col2im are adjoint") {
  std::mt19937_64 rng(1);
  const FeatureMaps<double> x = random_maps(rng, 3, 2, 5, 4);
  const Matrix<double> cols = im2col3x3(x);
  Matrix<double> y = Matrix<double>::Random(cols.rows(), cols.cols());
  const FeatureMaps<double> back = col2im3x3(y, 3, 2, 5, 4);
  const double lhs = (cols.array() * y.array()).sum();
  const double rhs = (x.data.array() * back.data.array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("3x3 convolution by im2col matches a direct loop") {
  std::mt19937_64 rng(2);
  const FeatureMaps<double> x = random_maps(rng, 2, 1, 4, 5);
  const Matrix<double> w = Matrix<double>::Random(3, 18);
  const Matrix<double> y = w * im2col3x3(x);
  for (int o = 0; o < 3; ++o) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 5; ++c) {
        double acc = 0;
        for (int ch = 0; ch < 2; ++ch) {
          for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
              const int rr = r + dr, cc = c + dc;
              if (rr < 0 || rr >= 4 || cc < 0 || cc >= 5) continue;
              acc += w(o, ch * 9 + (dr + 1) * 3 + (dc + 1)) * x.data(ch, rr * 5 + cc);
            }
          }
        }
        CHECK(y(o, r * 5 + c) == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("max pooling halves the grid and routes gradients to the maxima") {
  FeatureMaps<double> x(1, 1, 4, 4);
  x.data << 1, 2, 0, 0, 3, 4, 0, 9, 5, 0, 1, 1, 0, 0, 1, 2;
  std::vector<Eigen::Index> argmax;
  const FeatureMaps<double> y = max_pool2(x, argmax);
  CHECK(y.height == 2);
  CHECK(y.width == 2);
  CHECK(y.data(0, 0) == 4);
  CHECK(y.data(0, 1) == 9);
  CHECK(y.data(0, 2) == 5);
  CHECK(y.data(0, 3) == 2);
  FeatureMaps<double> g(1, 1, 2, 2);
  g.data << 1, 2, 3, 4;
  const FeatureMaps<double> gx = max_pool2_backward(g, argmax, 4, 4);
  CHECK(gx.data.sum() == 10);
  CHECK(gx.data(0, 5) == 1);
  CHECK(gx.data(0, 7) == 2);
}

TEST_CASE("softmax columns are distributions and the losses agree on one-hot targets") {
  std::mt19937_64 rng(3);
  const Matrix<double> logits = Matrix<double>::Random(3, 5) * 4;
  const Matrix<double> p = softmax_columns(logits);
  for (Eigen::Index j = 0; j < p.cols(); ++j) CHECK(p.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<int> labels{0, 2, 1, 1, 0};
  const Matrix<double> t = one_hot<double>(labels, 3);
  CHECK(std::abs(cross_entropy(logits, t) - kl_divergence(logits, t)) < 1e-12);

  Matrix<double> soft = Matrix<double>::Constant(3, 5, 1.0 / 3);
  const double entropy = std::log(3.0);
  CHECK(kl_divergence(logits, soft) == doctest::Approx(cross_entropy(logits, soft) - entropy).epsilon(1e-12));
}

TEST_CASE("dense and convolution gradients match central differences") {
  std::mt19937_64 rng(4);
  const std::vector<int> channels{3, 4};
  Net net{ConvStack<double>(3, channels, rng), {}};
  net.head.weight = Matrix<double>::Random(2, 4);
  net.head.bias = Vector<double>::Random(2);
  const FeatureMaps<double> x = random_maps(rng, 3, 3, 8, 8);
  const std::vector<int> labels{0, 1, 1};
  const Matrix<double> t = one_hot<double>(labels, 2);

  typename ConvStack<double>::Cache cache;
  const FeatureMaps<double> tap = net.conv.forward(x, &cache);
  const Matrix<double> pooled = global_average_pool(tap);
  const Matrix<double> grad_logits = loss_gradient<double>(net.head.forward(pooled), t);
  const Matrix<double> grad_w = grad_logits * pooled.transpose();
  const Vector<double> grad_b = grad_logits.rowwise().sum();
  std::vector<typename ConvStack<double>::Stage> grads;
  net.conv.backward(global_average_pool_backward<double>(net.head.weight.transpose() * grad_logits, tap.height, tap.width),
                    cache, grads);

  const double h = 1e-6;
  auto central = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = loss_of(net, x, t);
    param = saved - h;
    const double down = loss_of(net, x, t);
    param = saved;
    return (up - down) / (2 * h);
  };
  for (Eigen::Index i = 0; i < net.head.weight.size(); ++i) {
    CHECK(oracle::relative_error(grad_w.data()[i], central(net.head.weight.data()[i])) < 1e-3);
  }
  for (Eigen::Index i = 0; i < net.head.bias.size(); ++i) {
    CHECK(oracle::relative_error(grad_b(i), central(net.head.bias(i))) < 1e-3);
  }
  for (std::size_t s = 0; s < net.conv.stages().size(); ++s) {
    auto& stage = net.conv.stages()[s];
    for (Eigen::Index i = 0; i < stage.weight.size(); i += 7) {
      CHECK(oracle::relative_error(grads[s].weight.data()[i], central(stage.weight.data()[i])) < 1e-3);
    }
    for (Eigen::Index i = 0; i < stage.bias.size(); ++i) {
      CHECK(oracle::relative_error(grads[s].bias(i), central(stage.bias(i))) < 1e-3);
    }
  }
}

TEST_CASE("toy stack output shape follows the pooling depth") {
  std::mt19937_64 rng(5);
  const std::vector<int> channels{8, 16, 32};
  const ConvStack<double> conv(3, channels, rng);
  const FeatureMaps<double> tap = conv.forward(FeatureMaps<double>(3, 2, 64, 64));
  CHECK(tap.channels() == 32);
  CHECK(tap.height == 8);
  CHECK(tap.width == 8);
  CHECK(tap.batch == 2);
}

}  // TEST_SUITE
