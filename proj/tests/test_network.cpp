// Copyright 2026 The poseact authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "poseact/network.hpp"
#include "test_helpers.hpp"

using namespace poseact;

namespace {

PatchStack random_stack(Rng& rng, int side) {
  PatchStack stack;
  stack.side = side;
  for (int c = 0; c < 8; ++c) {
    stack.channels[c].resize(side, side);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        stack.channels[c](y, x) = static_cast<float>(rng.uniform());
  }
  return stack;
}

double ce_loss(const PolicyNet<double>& net, const MatX<double>& input, int side,
               int label) {
  PolicyNet<double>::Cache cache;
  net.forward(input, side, 1, cache);
  const auto& logits = cache.logits;
  const double mx = logits.col(0).maxCoeff();
  double denom = 0.0;
  for (int i = 0; i < 13; ++i) denom += std::exp(logits(i, 0) - mx);
  return -(logits(label, 0) - mx - std::log(denom));
}

}  // namespace

TEST_CASE("forward produces 13 logits and an attention map in [0,1]") {
  Rng rng(401);
  PolicyNet<float> net;
  net.init(rng, /*zero_final=*/false);
  const PatchStack stack = random_stack(rng, 128);
  const ForwardResult r = forward(net, stack);
  CHECK(r.logits.size() == 13);
  CHECK(r.attention.rows() == 4);
  CHECK(r.attention.cols() == 4);
  CHECK((r.attention >= 0.0).all());
  CHECK((r.attention <= 1.0).all());
  CHECK(r.logits.allFinite());
}

TEST_CASE("zero-initialized final layer yields uniform logits and action 0") {
  Rng rng(409);
  PolicyNet<float> net;
  net.init(rng);  // final layer zeroed by default
  const PatchStack stack = random_stack(rng, 64);
  const ForwardResult r = forward(net, stack);
  for (int i = 1; i < 13; ++i)
    CHECK(r.logits[i] == doctest::Approx(r.logits[0]));
  CHECK(decide_network(net, stack).index == 0);
}

TEST_CASE("pooling weights are a proper distribution") {
  Rng rng(419);
  PolicyNet<double> net;
  net.init(rng, false);
  const int side = 32;
  MatX<double> input(8, 2 * side * side);
  for (Eigen::Index i = 0; i < input.size(); ++i)
    input.data()[i] = rng.uniform();
  PolicyNet<double>::Cache cache;
  net.forward(input, side, 2, cache);
  const int m2 = cache.emb_side * cache.emb_side;
  for (int b = 0; b < 2; ++b) {
    const double sum = cache.attention_weights.middleCols(b * m2, m2).sum();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("forward is deterministic") {
  Rng rng(421);
  PolicyNet<float> net;
  net.init(rng, false);
  const PatchStack stack = random_stack(rng, 64);
  const ForwardResult a = forward(net, stack);
  const ForwardResult b = forward(net, stack);
  CHECK((a.logits - b.logits).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("argmax tie handling matches an independent scalar scan") {
  Rng rng(431);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd v(13);
    for (int i = 0; i < 13; ++i)
      v[i] = std::round(rng.uniform(-2.0, 2.0) * 4.0) / 4.0;  // force ties
    int expect = 0;
    for (int i = 1; i < 13; ++i)
      if (v[i] > v[expect]) expect = i;
    CHECK(argmax_lowest(v) == expect);
  }
}

TEST_CASE("hamming argmin equals cross-entropy argmax on one-hot candidates") {
  Rng rng(433);
  for (int trial = 0; trial < 1000; ++trial) {
    // Random distribution over the 13 actions.
    Eigen::VectorXd p(13);
    for (int i = 0; i < 13; ++i) p[i] = -std::log(1.0 - rng.uniform());
    p /= p.sum();

    // Hamming distance between p and one-hot e_j is (1 - p_j) + sum_{k!=j} p_k.
    int hamming_best = 0;
    double hamming_min = 1e18;
    for (int j = 0; j < 13; ++j) {
      const double d = (1.0 - p[j]) + (p.sum() - p[j]);
      if (d < hamming_min) {
        hamming_min = d;
        hamming_best = j;
      }
    }
    // Cross-entropy against e_j is -log p_j, minimized at argmax p.
    int ce_best = 0;
    for (int j = 1; j < 13; ++j)
      if (-std::log(p[j]) < -std::log(p[ce_best])) ce_best = j;
    CHECK(hamming_best == ce_best);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(439);
  const int side = 16;
  const double h = 1e-6;
  double worst = 0.0;

  for (int trial = 0; trial < 3; ++trial) {
    PolicyNet<double> net;
    net.init(rng, /*zero_final=*/false);
    MatX<double> input(8, side * side);
    for (Eigen::Index i = 0; i < input.size(); ++i)
      input.data()[i] = rng.uniform();
    const int label = static_cast<int>(rng.uniform_int(0, 12));

    PolicyNet<double>::Cache cache;
    net.forward(input, side, 1, cache);
    MatX<double> dlogits = cache.logits;
    {
      const double mx = dlogits.col(0).maxCoeff();
      dlogits.col(0) = (dlogits.col(0).array() - mx).exp();
      dlogits.col(0) /= dlogits.col(0).sum();
      dlogits(label, 0) -= 1.0;
    }
    const auto grads = net.backward(cache, dlogits);

    const MatX<double>* grad_mats[8] = {&grads.conv_w[0], &grads.conv_w[1],
                                        &grads.conv_w[2], &grads.conv_w[3],
                                        &grads.conv_w[4], &grads.attention_w,
                                        &grads.fc1_w,     &grads.fc2_w};
    auto refs = net.params();
    int mat_index = 0;
    for (auto& ref : refs) {
      if (!ref.matrix) continue;  // biases are covered via the weight paths
      MatX<double>& W = *ref.matrix;
      const MatX<double>& G = *grad_mats[mat_index++];
      for (int pick = 0; pick < 24; ++pick) {
        const Eigen::Index k = rng.uniform_int(0, W.size() - 1);
        const double saved = W.data()[k];
        W.data()[k] = saved + h;
        const double up = ce_loss(net, input, side, label);
        W.data()[k] = saved - h;
        const double down = ce_loss(net, input, side, label);
        W.data()[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = G.data()[k];
        const double rel =
            std::abs(an - fd) / std::max({1e-6, std::abs(an), std::abs(fd)});
        worst = std::max(worst, rel);
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("bias gradients match finite differences too") {
  Rng rng(443);
  const int side = 16;
  const double h = 1e-6;
  PolicyNet<double> net;
  net.init(rng, false);
  MatX<double> input(8, side * side);
  for (Eigen::Index i = 0; i < input.size(); ++i) input.data()[i] = rng.uniform();
  const int label = 4;

  PolicyNet<double>::Cache cache;
  net.forward(input, side, 1, cache);
  MatX<double> dlogits = cache.logits;
  const double mx = dlogits.col(0).maxCoeff();
  dlogits.col(0) = (dlogits.col(0).array() - mx).exp();
  dlogits.col(0) /= dlogits.col(0).sum();
  dlogits(label, 0) -= 1.0;
  const auto grads = net.backward(cache, dlogits);

  const VecX<double>* grad_vecs[8] = {&grads.conv_b[0], &grads.conv_b[1],
                                      &grads.conv_b[2], &grads.conv_b[3],
                                      &grads.conv_b[4], &grads.attention_b,
                                      &grads.fc1_b,     &grads.fc2_b};
  auto refs = net.params();
  int vec_index = 0;
  double worst = 0.0;
  for (auto& ref : refs) {
    if (!ref.vector) continue;
    VecX<double>& bias = *ref.vector;
    const VecX<double>& G = *grad_vecs[vec_index++];
    for (int pick = 0; pick < 8; ++pick) {
      const Eigen::Index k = rng.uniform_int(0, bias.size() - 1);
      const double saved = bias[k];
      bias[k] = saved + h;
      const double up = ce_loss(net, input, side, label);
      bias[k] = saved - h;
      const double down = ce_loss(net, input, side, label);
      bias[k] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(G[k] - fd) / std::max({1e-6, std::abs(G[k]), std::abs(fd)});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("a confident prediction has near-zero loss") {
  Rng rng(449);
  PolicyNet<float> net;
  net.init(rng);
  const int label = 5;
  net.fc2.weight.setZero();
  net.fc2.bias.setZero();
  net.fc2.bias[label] = 20.0f;  // force probability ~1 on the target

  const int side = 32;
  MatX<float> input(8, side * side);
  for (Eigen::Index i = 0; i < input.size(); ++i)
    input.data()[i] = static_cast<float>(rng.uniform());

  AdamState<float> adam;
  adam.init(net);
  TrainConfig cfg;
  const double loss = train_step(net, adam, input, {label}, side, cfg, 0);
  CHECK(loss < 1e-3);
}

TEST_CASE("repeated steps on a fixed batch overfit it") {
  Rng rng(457);
  PolicyNet<float> net;
  net.init(rng);
  const int side = 32;
  const int batch = 8;
  MatX<float> input(8, batch * side * side);
  for (Eigen::Index i = 0; i < input.size(); ++i)
    input.data()[i] = static_cast<float>(rng.uniform());
  std::vector<int> labels;
  for (int b = 0; b < batch; ++b)
    labels.push_back(static_cast<int>(rng.uniform_int(0, 12)));

  AdamState<float> adam;
  adam.init(net);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;  // speeds the smoke test up
  double first = 0.0, last = 0.0;
  for (int step = 0; step < 200; ++step) {
    const double loss = train_step(net, adam, input, labels, side, cfg, step);
    if (step == 0) first = loss;
    last = loss;
  }
  CHECK(last < 0.5 * first);
}

TEST_CASE("learning rate decays 5 percent every thousand steps") {
  TrainConfig cfg;
  CHECK(cfg.lr_at(0) == doctest::Approx(1e-4));
  CHECK(cfg.lr_at(999) == doctest::Approx(1e-4));
  CHECK(cfg.lr_at(1000) == doctest::Approx(9.5e-5));
  CHECK(cfg.lr_at(3000) == doctest::Approx(1e-4 * 0.95 * 0.95 * 0.95));
}

TEST_CASE("non-finite parameters abort the step with diagnostics") {
  Rng rng(461);
  PolicyNet<float> net;
  net.init(rng, false);
  net.fc1.weight(0, 0) = std::numeric_limits<float>::quiet_NaN();
  const int side = 16;
  MatX<float> input(8, side * side);
  input.setOnes();
  AdamState<float> adam;
  adam.init(net);
  TrainConfig cfg;
  try {
    train_step(net, adam, input, {3}, side, cfg, 0);
    FAIL("expected non_finite_loss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite_loss);
  }
}

TEST_CASE("checkpoints round-trip through the binary format") {
  Rng rng(463);
  PolicyNet<float> net;
  net.init(rng, false);
  const PatchStack stack = random_stack(rng, 64);
  const ForwardResult before = forward(net, stack);

  TempDir dir("ckpt");
  const std::string path = dir.str() + "/model.ckpt";
  save_checkpoint(net, path);

  PolicyNet<float> loaded;
  load_checkpoint(loaded, path);
  const ForwardResult after = forward(loaded, stack);
  CHECK((before.logits - after.logits).cwiseAbs().maxCoeff() == 0.0);

  // Version gate: a corrupted header must be rejected.
  PolicyNet<float> reject;
  try {
    load_checkpoint(reject, dir.str() + "/missing.ckpt");
    FAIL("expected io_error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io_error);
  }
}
