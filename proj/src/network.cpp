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

#include "poseact/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "poseact/threading.hpp"

namespace poseact {

namespace {

constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPad = 1;

inline int conv_out_side(int in) { return (in + 2 * kPad - kKernel) / kStride + 1; }

template <typename T>
void leaky_forward(MatX<T>& x) {
  x = x.array().max(x.array() * static_cast<T>(kLeakySlope)).matrix();
}

// Gradient mask: 1 where the stored post-activation output is positive,
// kLeakySlope elsewhere (output sign matches pre-activation sign).
template <typename T>
void leaky_backward(const MatX<T>& activated, MatX<T>& grad) {
  grad = (activated.array() > T(0))
             .select(grad.array(), grad.array() * static_cast<T>(kLeakySlope))
             .matrix();
}

// Gathers the 3x3 stride-2 receptive fields of `input` (channels x H*W,
// raster order) into `col` (9*channels x out*out), one output pixel per
// column. Out-of-image taps are zero.
template <typename T>
void im2col(const Eigen::Ref<const MatX<T>>& input, int side, int channels,
            Eigen::Ref<MatX<T>> col) {
  const int out = conv_out_side(side);
  col.setZero();
  for (int oy = 0; oy < out; ++oy) {
    for (int ox = 0; ox < out; ++ox) {
      const int c0 = oy * out + ox;
      for (int k = 0; k < kKernel * kKernel; ++k) {
        const int iy = oy * kStride - kPad + k / kKernel;
        const int ix = ox * kStride - kPad + k % kKernel;
        if (iy < 0 || iy >= side || ix < 0 || ix >= side) continue;
        col.block(k * channels, c0, channels, 1) =
            input.col(iy * side + ix);
      }
    }
  }
}

// Scatter-add transpose of im2col.
template <typename T>
void col2im(const Eigen::Ref<const MatX<T>>& col, int side, int channels,
            Eigen::Ref<MatX<T>> input_grad) {
  const int out = conv_out_side(side);
  for (int oy = 0; oy < out; ++oy) {
    for (int ox = 0; ox < out; ++ox) {
      const int c0 = oy * out + ox;
      for (int k = 0; k < kKernel * kKernel; ++k) {
        const int iy = oy * kStride - kPad + k / kKernel;
        const int ix = ox * kStride - kPad + k % kKernel;
        if (iy < 0 || iy >= side || ix < 0 || ix >= side) continue;
        input_grad.col(iy * side + ix) += col.block(k * channels, c0, channels, 1);
      }
    }
  }
}

template <typename T>
MatX<T> softmax_columns(const MatX<T>& logits) {
  MatX<T> p = logits;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    const T m = p.col(c).maxCoeff();
    p.col(c) = (p.col(c).array() - m).exp();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

}  // namespace

template <typename T>
void PolicyNet<T>::init(Rng& rng, bool zero_final) {
  auto uniform_fill = [&](MatX<T>& w, int fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
  };

  int in = kInputChannels;
  for (int l = 0; l < 5; ++l) {
    conv[l].in = in;
    conv[l].out = kChannels[l];
    conv[l].weight.resize(kChannels[l], kKernel * kKernel * in);
    conv[l].bias = VecX<T>::Zero(kChannels[l]);
    uniform_fill(conv[l].weight, kKernel * kKernel * in);
    in = kChannels[l];
  }
  attention.weight.resize(1, kEmbedding);
  attention.bias = VecX<T>::Zero(1);
  uniform_fill(attention.weight, kEmbedding);
  fc1.weight.resize(kHidden, kEmbedding);
  fc1.bias = VecX<T>::Zero(kHidden);
  uniform_fill(fc1.weight, kEmbedding);
  fc2.weight.resize(kActions, kHidden);
  fc2.bias = VecX<T>::Zero(kActions);
  if (zero_final)
    fc2.weight.setZero();
  else
    uniform_fill(fc2.weight, kHidden);
}

template <typename T>
void PolicyNet<T>::forward(const MatX<T>& input, int side, int batch,
                           Cache& cache) const {
  if (input.rows() != kInputChannels ||
      input.cols() != static_cast<Eigen::Index>(batch) * side * side)
    throw Error(ErrorCode::shape_mismatch, "forward: bad input geometry");
  if (!input.allFinite())
    throw Error(ErrorCode::shape_mismatch, "forward: non-finite input");

  cache.batch = batch;
  cache.input_side = side;
  cache.input = input;

  int cur_side = side;
  const MatX<T>* cur = &cache.input;
  for (int l = 0; l < 5; ++l) {
    const int out_side = conv_out_side(cur_side);
    const int pixels = cur_side * cur_side;
    const int out_pixels = out_side * out_side;
    MatX<T>& col = cache.cols[l];
    col.resize(kKernel * kKernel * conv[l].in,
               static_cast<Eigen::Index>(batch) * out_pixels);
    for (int b = 0; b < batch; ++b) {
      im2col<T>(cur->middleCols(static_cast<Eigen::Index>(b) * pixels, pixels),
                cur_side, conv[l].in,
                col.middleCols(static_cast<Eigen::Index>(b) * out_pixels, out_pixels));
    }
    MatX<T>& act = cache.acts[l];
    act.noalias() = conv[l].weight * col;
    act.colwise() += conv[l].bias;
    leaky_forward(act);
    cur = &act;
    cur_side = out_side;
  }

  cache.emb_side = cur_side;
  const int m2 = cur_side * cur_side;
  const MatX<T>& emb = cache.acts[4];

  cache.attention_logits.noalias() = attention.weight * emb;
  cache.attention_logits.array() += attention.bias(0);
  MatX<T> att = (T(1) / (T(1) + (-cache.attention_logits.array()).exp())).matrix();

  cache.attention_weights.resize(1, att.cols());
  cache.pooled.resize(kEmbedding, batch);
  for (int b = 0; b < batch; ++b) {
    const auto block = att.middleCols(static_cast<Eigen::Index>(b) * m2, m2);
    const T total = block.sum();
    // Sigmoid outputs are strictly positive, so the total never vanishes.
    cache.attention_weights.middleCols(static_cast<Eigen::Index>(b) * m2, m2) =
        block / total;
    cache.pooled.col(b).noalias() =
        emb.middleCols(static_cast<Eigen::Index>(b) * m2, m2) *
        cache.attention_weights.middleCols(static_cast<Eigen::Index>(b) * m2, m2)
            .transpose();
  }

  cache.hidden.noalias() = fc1.weight * cache.pooled;
  cache.hidden.colwise() += fc1.bias;
  leaky_forward(cache.hidden);
  cache.logits.noalias() = fc2.weight * cache.hidden;
  cache.logits.colwise() += fc2.bias;
}

template <typename T>
void PolicyNet<T>::Gradients::setZero(const PolicyNet& net) {
  for (int l = 0; l < 5; ++l) {
    conv_w[l].setZero(net.conv[l].weight.rows(), net.conv[l].weight.cols());
    conv_b[l].setZero(net.conv[l].bias.size());
  }
  attention_w.setZero(1, kEmbedding);
  attention_b.setZero(1);
  fc1_w.setZero(kHidden, kEmbedding);
  fc1_b.setZero(kHidden);
  fc2_w.setZero(kActions, kHidden);
  fc2_b.setZero(kActions);
}

template <typename T>
void PolicyNet<T>::Gradients::add(const Gradients& other) {
  for (int l = 0; l < 5; ++l) {
    conv_w[l] += other.conv_w[l];
    conv_b[l] += other.conv_b[l];
  }
  attention_w += other.attention_w;
  attention_b += other.attention_b;
  fc1_w += other.fc1_w;
  fc1_b += other.fc1_b;
  fc2_w += other.fc2_w;
  fc2_b += other.fc2_b;
}

template <typename T>
typename PolicyNet<T>::Gradients PolicyNet<T>::backward(
    const Cache& cache, const MatX<T>& dlogits) const {
  Gradients g;
  g.setZero(*this);

  const int batch = cache.batch;
  const int m2 = cache.emb_side * cache.emb_side;
  const MatX<T>& emb = cache.acts[4];

  g.fc2_w.noalias() = dlogits * cache.hidden.transpose();
  g.fc2_b = dlogits.rowwise().sum();
  MatX<T> dhidden = fc2.weight.transpose() * dlogits;
  leaky_backward(cache.hidden, dhidden);

  g.fc1_w.noalias() = dhidden * cache.pooled.transpose();
  g.fc1_b = dhidden.rowwise().sum();
  MatX<T> dpooled = fc1.weight.transpose() * dhidden;

  // Attention-weighted pooling: p = E w, w_j = a_j / sum(a), a = sigmoid(u),
  // u_j = w_att . E_j + b_att. Two gradient paths into the embedding.
  MatX<T> demb(kEmbedding, emb.cols());
  MatX<T> datt_logits(1, emb.cols());
  for (int b = 0; b < batch; ++b) {
    const auto Eb = emb.middleCols(static_cast<Eigen::Index>(b) * m2, m2);
    const auto wb =
        cache.attention_weights.middleCols(static_cast<Eigen::Index>(b) * m2, m2);
    const auto ub =
        cache.attention_logits.middleCols(static_cast<Eigen::Index>(b) * m2, m2);
    const VecX<T> dp = dpooled.col(b);

    // du_j = (dp . (E_j - p)) * w_j * (1 - a_j); the w_j factor carries the
    // 1/sum(a) of the renormalization.
    VecX<T> du(m2);
    const VecX<T> p = cache.pooled.col(b);
    for (int j = 0; j < m2; ++j) {
      const T aj = T(1) / (T(1) + std::exp(-ub(0, j)));
      const T dwj = dp.dot(Eb.col(j) - p);
      du(j) = dwj * wb(0, j) * (T(1) - aj);
    }
    datt_logits.middleCols(static_cast<Eigen::Index>(b) * m2, m2) = du.transpose();
    demb.middleCols(static_cast<Eigen::Index>(b) * m2, m2).noalias() =
        dp * wb + attention.weight.transpose() * du.transpose();
  }
  g.attention_w.noalias() = datt_logits * emb.transpose();
  g.attention_b(0) = datt_logits.sum();

  // Conv chain, back to front.
  MatX<T> dout = demb;
  int sides[6];
  sides[0] = cache.input_side;
  for (int l = 0; l < 5; ++l) sides[l + 1] = conv_out_side(sides[l]);

  for (int l = 4; l >= 0; --l) {
    leaky_backward(cache.acts[l], dout);
    g.conv_w[l].noalias() = dout * cache.cols[l].transpose();
    g.conv_b[l] = dout.rowwise().sum();
    if (l == 0) break;
    MatX<T> dcol = conv[l].weight.transpose() * dout;
    const int in_side = sides[l];
    const int in_pixels = in_side * in_side;
    const int out_pixels = sides[l + 1] * sides[l + 1];
    MatX<T> din = MatX<T>::Zero(conv[l].in, static_cast<Eigen::Index>(batch) * in_pixels);
    for (int b = 0; b < batch; ++b) {
      col2im<T>(dcol.middleCols(static_cast<Eigen::Index>(b) * out_pixels, out_pixels),
                in_side, conv[l].in,
                din.middleCols(static_cast<Eigen::Index>(b) * in_pixels, in_pixels));
    }
    dout = std::move(din);
  }
  return g;
}

template <typename T>
std::vector<typename PolicyNet<T>::ParamRef> PolicyNet<T>::params() {
  std::vector<ParamRef> refs;
  for (int l = 0; l < 5; ++l) {
    const std::string base = "conv" + std::to_string(l + 1);
    refs.push_back({base + ".weight", &conv[l].weight, nullptr});
    refs.push_back({base + ".bias", nullptr, &conv[l].bias});
  }
  refs.push_back({"attention.weight", &attention.weight, nullptr});
  refs.push_back({"attention.bias", nullptr, &attention.bias});
  refs.push_back({"fc1.weight", &fc1.weight, nullptr});
  refs.push_back({"fc1.bias", nullptr, &fc1.bias});
  refs.push_back({"fc2.weight", &fc2.weight, nullptr});
  refs.push_back({"fc2.bias", nullptr, &fc2.bias});
  return refs;
}

template <typename T>
std::vector<typename PolicyNet<T>::ConstParamRef> PolicyNet<T>::const_params() const {
  std::vector<ConstParamRef> refs;
  auto mutable_refs = const_cast<PolicyNet<T>*>(this)->params();
  refs.reserve(mutable_refs.size());
  for (const auto& r : mutable_refs)
    refs.push_back({r.name, r.matrix, r.vector});
  return refs;
}

template <typename T>
std::size_t PolicyNet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& r : const_params())
    n += r.matrix ? r.matrix->size() : r.vector->size();
  return n;
}

template <typename T>
template <typename U>
PolicyNet<U> PolicyNet<T>::cast() const {
  PolicyNet<U> out;
  Rng rng(0);
  out.init(rng);
  auto src = const_params();
  auto dst = out.params();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].matrix)
      *dst[i].matrix = src[i].matrix->template cast<U>();
    else
      *dst[i].vector = src[i].vector->template cast<U>();
  }
  return out;
}

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

template <typename T>
void stack_to_input(const PatchStack& stack, Eigen::Ref<MatX<T>> out,
                    int column_offset) {
  const int n = stack.side;
  for (int c = 0; c < 8; ++c) {
    const Plane& plane = stack.channels[c];
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        out(c, column_offset + y * n + x) = static_cast<T>(plane(y, x));
  }
}

template <typename T>
ForwardResult forward(const PolicyNet<T>& net, const PatchStack& stack) {
  const int n = stack.side;
  MatX<T> input(PolicyNet<T>::kInputChannels, n * n);
  stack_to_input<T>(stack, input, 0);
  typename PolicyNet<T>::Cache cache;
  net.forward(input, n, 1, cache);

  ForwardResult result;
  result.logits = cache.logits.col(0).template cast<double>();
  const int m = cache.emb_side;
  result.attention.resize(m, m);
  for (int j = 0; j < m * m; ++j) {
    const double u = static_cast<double>(cache.attention_logits(0, j));
    result.attention(j / m, j % m) = 1.0 / (1.0 + std::exp(-u));
  }
  return result;
}

template <typename T>
ActionVector decide_network(const PolicyNet<T>& net, const PatchStack& stack) {
  const ForwardResult r = forward(net, stack);
  return ActionVector{argmax_lowest(r.logits)};
}

template <typename T>
void AdamState<T>::init(PolicyNet<T>& net) {
  m.clear();
  v.clear();
  for (auto& ref : net.params()) {
    const Eigen::Index rows = ref.matrix ? ref.matrix->rows() : ref.vector->size();
    const Eigen::Index cols = ref.matrix ? ref.matrix->cols() : 1;
    m.push_back(MatX<T>::Zero(rows, cols));
    v.push_back(MatX<T>::Zero(rows, cols));
  }
}

template <typename T>
double train_step(PolicyNet<T>& net, AdamState<T>& adam, const MatX<T>& input,
                  const std::vector<int>& labels, int side,
                  const TrainConfig& cfg, int step_index, int gemm_workers) {
  const int batch = static_cast<int>(labels.size());
  if (batch < 1) throw Error(ErrorCode::bad_config, "empty batch");

  // Split the batch across workers; each part runs its own forward/backward
  // and the gradients are summed in a fixed order.
  const int parts = std::max(1, std::min(gemm_workers, batch));
  std::vector<int> begin(parts + 1, 0);
  for (int p = 0; p <= parts; ++p) begin[p] = batch * p / parts;

  std::vector<typename PolicyNet<T>::Gradients> grads(parts);
  std::vector<double> losses(parts, 0.0);
  const Eigen::Index pixels = static_cast<Eigen::Index>(side) * side;

  parallel_for(parts, parts, [&](std::size_t p) {
    const int b0 = begin[p], b1 = begin[p + 1];
    const int nb = b1 - b0;
    if (nb == 0) {
      grads[p].setZero(net);
      return;
    }
    typename PolicyNet<T>::Cache cache;
    const MatX<T> part = input.middleCols(b0 * pixels, static_cast<Eigen::Index>(nb) * pixels);
    net.forward(part, side, nb, cache);

    MatX<T> prob = softmax_columns(cache.logits);
    double loss = 0.0;
    for (int b = 0; b < nb; ++b) {
      const int label = labels[b0 + b];
      if (label < 0 || label >= PolicyNet<T>::kActions)
        throw Error(ErrorCode::bad_config, "label out of range");
      loss -= std::log(std::max(static_cast<double>(prob(label, b)), 1e-30));
      prob(label, b) -= T(1);
    }
    prob /= static_cast<T>(batch);  // mean over the full batch
    losses[p] = loss;
    grads[p] = net.backward(cache, prob);
  });

  for (int p = 1; p < parts; ++p) grads[0].add(grads[p]);
  const double loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
                      static_cast<double>(batch);
  if (!std::isfinite(loss))
    throw Error(ErrorCode::non_finite_loss,
                "training loss diverged at step " + std::to_string(step_index) +
                    " (loss = " + std::to_string(loss) + ")");

  // Adam with bias correction at the scheduled learning rate.
  const double lr = cfg.lr_at(step_index);
  const double t = step_index + 1;
  const T b1 = static_cast<T>(cfg.adam_beta1);
  const T b2 = static_cast<T>(cfg.adam_beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(cfg.adam_beta1, t));
  const T correction2 = static_cast<T>(1.0 - std::pow(cfg.adam_beta2, t));

  auto refs = net.params();
  std::vector<MatX<T>*> grad_ptrs;
  std::vector<MatX<T>> bias_as_mat;  // gradients for vector params
  auto& g = grads[0];
  MatX<T>* grad_list[16] = {
      &g.conv_w[0], nullptr, &g.conv_w[1], nullptr, &g.conv_w[2], nullptr,
      &g.conv_w[3], nullptr, &g.conv_w[4], nullptr, &g.attention_w, nullptr,
      &g.fc1_w, nullptr, &g.fc2_w, nullptr};
  VecX<T>* grad_vecs[16] = {
      nullptr, &g.conv_b[0], nullptr, &g.conv_b[1], nullptr, &g.conv_b[2],
      nullptr, &g.conv_b[3], nullptr, &g.conv_b[4], nullptr, &g.attention_b,
      nullptr, &g.fc1_b, nullptr, &g.fc2_b};

  for (std::size_t i = 0; i < refs.size(); ++i) {
    auto apply = [&](auto& param, const auto& grad) {
      if (!grad.allFinite())
        throw Error(ErrorCode::non_finite_loss,
                    "non-finite gradient in " + refs[i].name + " at step " +
                        std::to_string(step_index));
      adam.m[i] = b1 * adam.m[i] + (T(1) - b1) * grad;
      adam.v[i] = b2 * adam.v[i].array().matrix() +
                  (T(1) - b2) * grad.array().square().matrix();
      const auto mhat = adam.m[i] / correction1;
      const auto vhat = adam.v[i] / correction2;
      param.array() -= static_cast<T>(lr) * mhat.array() /
                       (vhat.array().sqrt() + static_cast<T>(cfg.adam_epsilon));
    };
    if (refs[i].matrix)
      apply(*refs[i].matrix, *grad_list[i]);
    else
      apply(*refs[i].vector, *grad_vecs[i]);
  }
  return loss;
}

template <typename T>
void save_checkpoint(const PolicyNet<T>& net, const std::string& path) {
  nlohmann::ordered_json header;
  header["format"] = "poseact-checkpoint";
  header["version"] = 1;
  header["dtype"] = "float32";
  header["layout"] = "col-major";
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& ref : net.const_params()) {
    nlohmann::ordered_json t;
    t["name"] = ref.name;
    if (ref.matrix)
      t["shape"] = {ref.matrix->rows(), ref.matrix->cols()};
    else
      t["shape"] = {ref.vector->size(), 1};
    tensors.push_back(t);
  }
  header["tensors"] = tensors;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write checkpoint: " + path);
  const std::uint32_t len = static_cast<std::uint32_t>(header_str.size());
  std::uint8_t len_le[4] = {
      static_cast<std::uint8_t>(len & 0xff),
      static_cast<std::uint8_t>((len >> 8) & 0xff),
      static_cast<std::uint8_t>((len >> 16) & 0xff),
      static_cast<std::uint8_t>((len >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(len_le), 4);
  out.write(header_str.data(), header_str.size());

  for (const auto& ref : net.const_params()) {
    const Eigen::Index count = ref.matrix ? ref.matrix->size() : ref.vector->size();
    std::vector<float> buf(static_cast<std::size_t>(count));
    if (ref.matrix)
      for (Eigen::Index i = 0; i < count; ++i)
        buf[i] = static_cast<float>(ref.matrix->data()[i]);
    else
      for (Eigen::Index i = 0; i < count; ++i)
        buf[i] = static_cast<float>(ref.vector->data()[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
}

template <typename T>
void load_checkpoint(PolicyNet<T>& net, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open checkpoint: " + path);
  std::uint8_t len_le[4];
  in.read(reinterpret_cast<char*>(len_le), 4);
  if (!in) throw Error(ErrorCode::io_error, "truncated checkpoint header");
  const std::uint32_t len = len_le[0] | (len_le[1] << 8) | (len_le[2] << 16) |
                            (static_cast<std::uint32_t>(len_le[3]) << 24);
  std::string header_str(len, '\0');
  in.read(header_str.data(), len);
  nlohmann::json header = nlohmann::json::parse(header_str);
  if (!header.contains("version"))
    throw Error(ErrorCode::io_error, "checkpoint header missing version");
  if (header["version"].get<int>() != 1)
    throw Error(ErrorCode::io_error, "unsupported checkpoint version");

  Rng rng(0);
  net.init(rng);
  auto refs = net.params();
  const auto& tensors = header["tensors"];
  if (tensors.size() != refs.size())
    throw Error(ErrorCode::shape_mismatch, "checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& t = tensors[i];
    if (t["name"].get<std::string>() != refs[i].name)
      throw Error(ErrorCode::shape_mismatch,
                  "checkpoint tensor order mismatch at " + refs[i].name);
    const Eigen::Index rows = t["shape"][0].get<Eigen::Index>();
    const Eigen::Index cols = t["shape"][1].get<Eigen::Index>();
    const Eigen::Index expect_rows =
        refs[i].matrix ? refs[i].matrix->rows() : refs[i].vector->size();
    const Eigen::Index expect_cols = refs[i].matrix ? refs[i].matrix->cols() : 1;
    if (rows != expect_rows || cols != expect_cols)
      throw Error(ErrorCode::shape_mismatch,
                  "checkpoint shape mismatch at " + refs[i].name);
    std::vector<float> buf(static_cast<std::size_t>(rows * cols));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw Error(ErrorCode::io_error, "truncated checkpoint payload");
    if (refs[i].matrix)
      for (Eigen::Index k = 0; k < rows * cols; ++k)
        refs[i].matrix->data()[k] = static_cast<T>(buf[k]);
    else
      for (Eigen::Index k = 0; k < rows; ++k)
        refs[i].vector->data()[k] = static_cast<T>(buf[k]);
  }
}

NetworkPolicy NetworkPolicy::from_checkpoint(const std::string& path) {
  PolicyNet<float> net;
  load_checkpoint(net, path);
  return NetworkPolicy(std::move(net));
}

ActionVector NetworkPolicy::decide(const DecisionContext& ctx) {
  if (ctx.patches == nullptr)
    throw Error(ErrorCode::bad_config, "network policy needs patches");
  return decide_network(net_, *ctx.patches);
}

template class PolicyNet<float>;
template class PolicyNet<double>;
template PolicyNet<double> PolicyNet<float>::cast<double>() const;
template PolicyNet<float> PolicyNet<double>::cast<float>() const;
template ForwardResult forward(const PolicyNet<float>&, const PatchStack&);
template ForwardResult forward(const PolicyNet<double>&, const PatchStack&);
template ActionVector decide_network(const PolicyNet<float>&, const PatchStack&);
template ActionVector decide_network(const PolicyNet<double>&, const PatchStack&);
template void stack_to_input<float>(const PatchStack&, Eigen::Ref<MatX<float>>, int);
template void stack_to_input<double>(const PatchStack&, Eigen::Ref<MatX<double>>, int);
template struct AdamState<float>;
template struct AdamState<double>;
template double train_step(PolicyNet<float>&, AdamState<float>&, const MatX<float>&,
                           const std::vector<int>&, int, const TrainConfig&, int, int);
template double train_step(PolicyNet<double>&, AdamState<double>&, const MatX<double>&,
                           const std::vector<int>&, int, const TrainConfig&, int, int);
template void save_checkpoint(const PolicyNet<float>&, const std::string&);
template void save_checkpoint(const PolicyNet<double>&, const std::string&);
template void load_checkpoint(PolicyNet<float>&, const std::string&);
template void load_checkpoint(PolicyNet<double>&, const std::string&);

}  // namespace poseact
