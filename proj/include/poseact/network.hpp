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

#pragma once

#include <array>
#include <string>
#include <vector>

#include "poseact/policy.hpp"
#include "poseact/rng.hpp"
#include "poseact/types.hpp"

namespace poseact {

inline constexpr double kLeakySlope = 0.1;

/// Action-decision CNN: five stride-2 3x3 conv blocks with leaky
/// activations, channels 8 -> (16, 32, 64, 64, 128); a sigmoid 1-channel
/// projection of the embedding forms the attention mask; pooled feature =
/// attention-weighted global average (weights renormalized to sum 1); two
/// fully connected layers produce the 13 action logits.
///
/// Feature maps are stored as (channels x pixels) matrices, pixels in
/// row-major raster order; a batch concatenates samples along columns.
template <typename T>
class PolicyNet {
 public:
  static constexpr int kInputChannels = 8;
  static constexpr int kActions = 13;
  static constexpr std::array<int, 5> kChannels = {16, 32, 64, 64, 128};
  static constexpr int kEmbedding = 128;
  static constexpr int kHidden = 64;

  struct Conv {
    int in = 0, out = 0;
    MatX<T> weight;  // (out, 9 * in), column (k * in + c)
    VecX<T> bias;
  };
  struct Dense {
    MatX<T> weight;  // (out, in)
    VecX<T> bias;
  };

  std::array<Conv, 5> conv;
  Dense attention;  // 1 x 128 projection of the embedding
  Dense fc1;        // 64 x 128
  Dense fc2;        // 13 x 64

  /// Fan-in-scaled uniform weights, zero biases. The final layer starts at
  /// zero (uniform logits) unless `zero_final` is cleared.
  void init(Rng& rng, bool zero_final = true);

  /// Activations kept for the backward pass.
  struct Cache {
    int batch = 0;
    int input_side = 0;
    int emb_side = 0;
    MatX<T> input;                  // (8, B * n * n)
    std::array<MatX<T>, 5> cols;    // im2col inputs per layer
    std::array<MatX<T>, 5> acts;    // post-activation outputs per layer
    MatX<T> attention_logits;       // (1, B * m * m)
    MatX<T> attention_weights;      // normalized, (1, B * m * m)
    MatX<T> pooled;                 // (128, B)
    MatX<T> hidden;                 // (64, B), post-activation
    MatX<T> logits;                 // (13, B)
  };

  /// Batched forward. `input` is (8, B * side * side); throws
  /// shape_mismatch if the geometry is inconsistent or values non-finite.
  void forward(const MatX<T>& input, int side, int batch, Cache& cache) const;

  struct Gradients {
    std::array<MatX<T>, 5> conv_w;
    std::array<VecX<T>, 5> conv_b;
    MatX<T> attention_w, fc1_w, fc2_w;
    VecX<T> attention_b, fc1_b, fc2_b;
    void setZero(const PolicyNet& net);
    void add(const Gradients& other);
  };

  /// Backward from dL/dlogits; returns parameter gradients (input gradients
  /// are not needed anywhere).
  Gradients backward(const Cache& cache, const MatX<T>& dlogits) const;

  /// Named views over all parameter tensors in serialization order.
  struct ParamRef {
    std::string name;
    MatX<T>* matrix;
    VecX<T>* vector;  // exactly one of matrix/vector is set
  };
  struct ConstParamRef {
    std::string name;
    const MatX<T>* matrix;
    const VecX<T>* vector;
  };
  std::vector<ParamRef> params();
  std::vector<ConstParamRef> const_params() const;

  std::size_t parameter_count() const;

  template <typename U>
  PolicyNet<U> cast() const;
};

/// Single-sample forward: 13 action logits and the m x m attention map in
/// [0, 1].
struct ForwardResult {
  Eigen::Matrix<double, 13, 1> logits;
  Eigen::ArrayXXd attention;
};

template <typename T>
ForwardResult forward(const PolicyNet<T>& net, const PatchStack& stack);

/// Argmax over the logits, ties resolved to the lowest action index.
template <typename T>
ActionVector decide_network(const PolicyNet<T>& net, const PatchStack& stack);

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Flattens a patch stack into the (8, n*n) network input column block.
template <typename T>
void stack_to_input(const PatchStack& stack, Eigen::Ref<MatX<T>> out, int column_offset);

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-4;
  double decay_factor = 0.95;   // applied every decay_every steps
  int decay_every = 1000;
  int total_steps = 25000;      // 25k object-specific, 50k multi-object
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  double lr_at(int step_index) const {
    return learning_rate * std::pow(decay_factor, step_index / decay_every);
  }
};

/// Adam moment buffers, one pair per parameter tensor.
template <typename T>
struct AdamState {
  std::vector<MatX<T>> m, v;
  void init(PolicyNet<T>& net);
};

/// One supervised update: cross-entropy between softmax(logits) and the
/// one-hot oracle label (the trainable surrogate of the Hamming objective;
/// both pick the same argmax), followed by one Adam step at
/// cfg.lr_at(step_index). Returns the batch loss. Throws non_finite_loss
/// with diagnostics if the loss or a gradient is not finite.
template <typename T>
double train_step(PolicyNet<T>& net, AdamState<T>& adam, const MatX<T>& input,
                  const std::vector<int>& labels, int side,
                  const TrainConfig& cfg, int step_index, int gemm_workers = 1);

/// Checkpoint: 4-byte little-endian header length, JSON header with a
/// mandatory version plus tensor names/shapes, then the tensors as
/// little-endian 32-bit floats in column-major order.
template <typename T>
void save_checkpoint(const PolicyNet<T>& net, const std::string& path);

template <typename T>
void load_checkpoint(PolicyNet<T>& net, const std::string& path);

/// Policy adapter: renders patches and picks argmax actions.
class NetworkPolicy : public Policy {
 public:
  explicit NetworkPolicy(PolicyNet<float> net) : net_(std::move(net)) {}
  static NetworkPolicy from_checkpoint(const std::string& path);

  bool needs_patches() const override { return true; }
  ActionVector decide(const DecisionContext& ctx) override;

  const PolicyNet<float>& net() const { return net_; }

 private:
  PolicyNet<float> net_;
};

extern template class PolicyNet<float>;
extern template class PolicyNet<double>;
extern template ForwardResult forward(const PolicyNet<float>&, const PatchStack&);
extern template ForwardResult forward(const PolicyNet<double>&, const PatchStack&);
extern template ActionVector decide_network(const PolicyNet<float>&, const PatchStack&);
extern template ActionVector decide_network(const PolicyNet<double>&, const PatchStack&);
extern template void stack_to_input<float>(const PatchStack&, Eigen::Ref<MatX<float>>, int);
extern template void stack_to_input<double>(const PatchStack&, Eigen::Ref<MatX<double>>, int);
extern template struct AdamState<float>;
extern template struct AdamState<double>;
extern template double train_step(PolicyNet<float>&, AdamState<float>&, const MatX<float>&,
                                  const std::vector<int>&, int, const TrainConfig&, int, int);
extern template double train_step(PolicyNet<double>&, AdamState<double>&, const MatX<double>&,
                                  const std::vector<int>&, int, const TrainConfig&, int, int);
extern template void save_checkpoint(const PolicyNet<float>&, const std::string&);
extern template void save_checkpoint(const PolicyNet<double>&, const std::string&);
extern template void load_checkpoint(PolicyNet<float>&, const std::string&);
extern template void load_checkpoint(PolicyNet<double>&, const std::string&);

}  // namespace poseact
