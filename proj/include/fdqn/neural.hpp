#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdqn/rng.hpp"

namespace fdqn {

inline constexpr int kInputDim = 36;
inline constexpr int kHidden1 = 128;
inline constexpr int kHidden2 = 64;
inline constexpr int kOutputDim = 10;

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline std::vector<double> relu(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = relu(x[i]);
  return out;
}

// Numerically stable softmax (max subtraction before exponentiation).
inline std::vector<double> softmax(const std::vector<double>& z) {
  if (z.empty()) throw std::invalid_argument("softmax: empty input");
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

// F(x) = g(x) + x with a shape check on g's output.
template <typename G>
std::vector<double> residual_block(const std::vector<double>& x, G&& g) {
  std::vector<double> gx = g(x);
  if (gx.size() != x.size()) {
    throw std::invalid_argument("residual_block: g(x) dimension mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) gx[i] += x[i];
  return gx;
}

struct MseResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d pred
};

inline MseResult mse_loss(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw std::invalid_argument("mse_loss: length mismatch");
  }
  MseResult res;
  res.grad.resize(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = target[i] - pred[i];
    res.loss += d * d;
    res.grad[i] = 2.0 * (pred[i] - target[i]) / n;
  }
  res.loss /= n;
  return res;
}

enum class Topology { Standard, Dueling };

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;

  friend bool operator==(const Layer&, const Layer&) = default;
};

// Plain value type holding every weight and bias of a Q-network. Copying it
// is the target-network clone.
//
// Standard layout: layers = {l1 36->128, l2 128->64, l3 64->10}.
// Dueling layout:  layers = {feature 36->128,
//                            value 128->64, value 64->1,
//                            advantage 128->64, advantage 64->10}.
struct NetworkParams {
  Topology topology = Topology::Standard;
  std::vector<Layer> layers;

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

namespace detail {

inline Layer make_layer(int in, int out) {
  Layer l;
  l.in = in;
  l.out = out;
  l.w.assign(static_cast<std::size_t>(in) * out, 0.0);
  l.b.assign(out, 0.0);
  return l;
}

inline void glorot_fill(Layer& l, Rng& rng) {
  const double bound = std::sqrt(6.0 / (l.in + l.out));
  for (double& v : l.w) v = rng.uniform_real(-bound, bound);
}

inline void affine(const Layer& l, const double* x, double* z) {
  for (int o = 0; o < l.out; ++o) {
    const double* row = l.w.data() + static_cast<std::size_t>(o) * l.in;
    double acc = l.b[o];
    for (int i = 0; i < l.in; ++i) acc += row[i] * x[i];
    z[o] = acc;
  }
}

// dz is the gradient at the layer output; accumulates into gw/gb and writes
// the gradient wrt the layer input into dx (may be null for the first layer).
inline void affine_backward(const Layer& l, const double* x, const double* dz, Layer& grad,
                            double* dx) {
  for (int o = 0; o < l.out; ++o) {
    double* grow = grad.w.data() + static_cast<std::size_t>(o) * l.in;
    const double g = dz[o];
    for (int i = 0; i < l.in; ++i) grow[i] += g * x[i];
    grad.b[o] += g;
  }
  if (dx) {
    for (int i = 0; i < l.in; ++i) dx[i] = 0.0;
    for (int o = 0; o < l.out; ++o) {
      const double* row = l.w.data() + static_cast<std::size_t>(o) * l.in;
      const double g = dz[o];
      for (int i = 0; i < l.in; ++i) dx[i] += row[i] * g;
    }
  }
}

}  // namespace detail

inline NetworkParams make_network(Topology topology) {
  NetworkParams p;
  p.topology = topology;
  if (topology == Topology::Standard) {
    p.layers = {detail::make_layer(kInputDim, kHidden1), detail::make_layer(kHidden1, kHidden2),
                detail::make_layer(kHidden2, kOutputDim)};
  } else {
    p.layers = {detail::make_layer(kInputDim, kHidden1), detail::make_layer(kHidden1, kHidden2),
                detail::make_layer(kHidden2, 1), detail::make_layer(kHidden1, kHidden2),
                detail::make_layer(kHidden2, kOutputDim)};
  }
  return p;
}

// Glorot-uniform weights, zero biases, drawn in layer order.
inline NetworkParams init_network(Topology topology, Rng& rng) {
  NetworkParams p = make_network(topology);
  for (Layer& l : p.layers) detail::glorot_fill(l, rng);
  return p;
}

inline NetworkParams clone(const NetworkParams& params) { return params; }

struct ForwardCache {
  std::array<double, kInputDim> input{};
  // standard path
  std::vector<double> z1, h1, z2, h2;
  // dueling path
  std::vector<double> zf, f, zv1, hv, za1, ha, adv;
  double value = 0.0;
  std::vector<double> q;
};

inline ForwardCache forward(const NetworkParams& params, std::span<const double> state) {
  if (state.size() != kInputDim) throw std::invalid_argument("forward: state must have 36 values");
  for (double v : state) {
    if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite input");
  }
  ForwardCache c;
  std::copy(state.begin(), state.end(), c.input.begin());

  if (params.topology == Topology::Standard) {
    const Layer& l1 = params.layers[0];
    const Layer& l2 = params.layers[1];
    const Layer& l3 = params.layers[2];
    c.z1.resize(l1.out);
    detail::affine(l1, c.input.data(), c.z1.data());
    c.h1 = relu(c.z1);
    c.z2.resize(l2.out);
    detail::affine(l2, c.h1.data(), c.z2.data());
    c.h2 = relu(c.z2);
    c.q.resize(l3.out);
    detail::affine(l3, c.h2.data(), c.q.data());
    return c;
  }

  const Layer& lf = params.layers[0];
  const Layer& lv1 = params.layers[1];
  const Layer& lv2 = params.layers[2];
  const Layer& la1 = params.layers[3];
  const Layer& la2 = params.layers[4];
  c.zf.resize(lf.out);
  detail::affine(lf, c.input.data(), c.zf.data());
  c.f = relu(c.zf);
  c.zv1.resize(lv1.out);
  detail::affine(lv1, c.f.data(), c.zv1.data());
  c.hv = relu(c.zv1);
  double v = 0.0;
  detail::affine(lv2, c.hv.data(), &v);
  c.value = v;
  c.za1.resize(la1.out);
  detail::affine(la1, c.f.data(), c.za1.data());
  c.ha = relu(c.za1);
  c.adv.resize(la2.out);
  detail::affine(la2, c.ha.data(), c.adv.data());

  // Q(s,a) = V(s) + (A(s,a) - mean_a A(s,a))
  double mean_adv = std::accumulate(c.adv.begin(), c.adv.end(), 0.0) / c.adv.size();
  c.q.resize(c.adv.size());
  for (std::size_t i = 0; i < c.adv.size(); ++i) c.q[i] = c.value + c.adv[i] - mean_adv;
  return c;
}

inline std::vector<double> q_values(const NetworkParams& params, std::span<const double> state) {
  return forward(params, state).q;
}

struct TrainSample {
  std::array<double, kInputDim> state{};
  int action = 0;     // output index the loss applies to
  double target = 0;  // target Q-value for that index
};

namespace detail {

// Per-sample backprop; dq carries the loss gradient on the acted output and
// zeros elsewhere.
inline void backward_sample(const NetworkParams& params, const ForwardCache& c,
                            const std::vector<double>& dq, NetworkParams& grad) {
  if (params.topology == Topology::Standard) {
    std::vector<double> dh2(kHidden2);
    affine_backward(params.layers[2], c.h2.data(), dq.data(), grad.layers[2], dh2.data());
    std::vector<double> dz2(kHidden2);
    for (int i = 0; i < kHidden2; ++i) dz2[i] = c.z2[i] > 0.0 ? dh2[i] : 0.0;
    std::vector<double> dh1(kHidden1);
    affine_backward(params.layers[1], c.h1.data(), dz2.data(), grad.layers[1], dh1.data());
    std::vector<double> dz1(kHidden1);
    for (int i = 0; i < kHidden1; ++i) dz1[i] = c.z1[i] > 0.0 ? dh1[i] : 0.0;
    affine_backward(params.layers[0], c.input.data(), dz1.data(), grad.layers[0], nullptr);
    return;
  }

  // Dueling combine: dV = sum(dq), dA_j = dq_j - mean(dq).
  double sum_dq = std::accumulate(dq.begin(), dq.end(), 0.0);
  const double dv = sum_dq;
  std::vector<double> dadv(dq.size());
  for (std::size_t j = 0; j < dq.size(); ++j) dadv[j] = dq[j] - sum_dq / dq.size();

  std::vector<double> dhv(kHidden2);
  affine_backward(params.layers[2], c.hv.data(), &dv, grad.layers[2], dhv.data());
  std::vector<double> dzv1(kHidden2);
  for (int i = 0; i < kHidden2; ++i) dzv1[i] = c.zv1[i] > 0.0 ? dhv[i] : 0.0;
  std::vector<double> df_value(kHidden1);
  affine_backward(params.layers[1], c.f.data(), dzv1.data(), grad.layers[1], df_value.data());

  std::vector<double> dha(kHidden2);
  affine_backward(params.layers[4], c.ha.data(), dadv.data(), grad.layers[4], dha.data());
  std::vector<double> dza1(kHidden2);
  for (int i = 0; i < kHidden2; ++i) dza1[i] = c.za1[i] > 0.0 ? dha[i] : 0.0;
  std::vector<double> df_adv(kHidden1);
  affine_backward(params.layers[3], c.f.data(), dza1.data(), grad.layers[3], df_adv.data());

  std::vector<double> dzf(kHidden1);
  for (int i = 0; i < kHidden1; ++i) {
    dzf[i] = c.zf[i] > 0.0 ? df_value[i] + df_adv[i] : 0.0;
  }
  affine_backward(params.layers[0], c.input.data(), dzf.data(), grad.layers[0], nullptr);
}

}  // namespace detail

// MSE over the acted Q-values of the batch, one vanilla gradient-descent
// step. Returns the batch loss before the update.
inline double backward_and_step(NetworkParams& params, const std::vector<TrainSample>& batch,
                                double learning_rate) {
  if (batch.empty()) throw std::invalid_argument("backward_and_step: empty batch");
  NetworkParams grad = make_network(params.topology);

  double loss = 0.0;
  const double n = static_cast<double>(batch.size());
  std::vector<double> dq(kOutputDim, 0.0);
  for (const TrainSample& s : batch) {
    ForwardCache c = forward(params, s.state);
    const double diff = c.q[s.action] - s.target;
    loss += diff * diff;
    std::fill(dq.begin(), dq.end(), 0.0);
    dq[s.action] = 2.0 * diff / n;
    detail::backward_sample(params, c, dq, grad);
  }
  loss /= n;

  if (!std::isfinite(loss)) throw std::runtime_error("divergence: non-finite loss");
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    for (double g : grad.layers[li].w) {
      if (!std::isfinite(g)) throw std::runtime_error("divergence: non-finite gradient");
    }
    for (std::size_t i = 0; i < params.layers[li].w.size(); ++i) {
      params.layers[li].w[i] -= learning_rate * grad.layers[li].w[i];
    }
    for (std::size_t i = 0; i < params.layers[li].b.size(); ++i) {
      params.layers[li].b[i] -= learning_rate * grad.layers[li].b[i];
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Checkpoint format. Line 1: "FDQN 1 <algo> <dims>", then one line per
// parameter array: name, length, values at 17 significant digits.
// Load followed by save reproduces the file byte for byte.

inline std::string topology_dims(Topology t) {
  return t == Topology::Standard ? "36-128-64-10" : "36-128/128-64-1/128-64-10";
}

inline std::vector<std::pair<std::string, const std::vector<double>*>> named_arrays(
    const NetworkParams& p) {
  if (p.topology == Topology::Standard) {
    return {{"w1", &p.layers[0].w}, {"b1", &p.layers[0].b}, {"w2", &p.layers[1].w},
            {"b2", &p.layers[1].b}, {"w3", &p.layers[2].w}, {"b3", &p.layers[2].b}};
  }
  return {{"wf", &p.layers[0].w},  {"bf", &p.layers[0].b},  {"wv1", &p.layers[1].w},
          {"bv1", &p.layers[1].b}, {"wv2", &p.layers[2].w}, {"bv2", &p.layers[2].b},
          {"wa1", &p.layers[3].w}, {"ba1", &p.layers[3].b}, {"wa2", &p.layers[4].w},
          {"ba2", &p.layers[4].b}};
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string checkpoint_to_string(const NetworkParams& params, const std::string& algo) {
  std::ostringstream out;
  out << "FDQN 1 " << algo << ' ' << topology_dims(params.topology) << '\n';
  for (const auto& [name, values] : named_arrays(params)) {
    out << name << ' ' << values->size();
    for (double v : *values) out << ' ' << format_double(v);
    out << '\n';
  }
  return out.str();
}

inline void save_checkpoint(const std::string& path, const NetworkParams& params,
                            const std::string& algo) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << checkpoint_to_string(params, algo);
}

struct Checkpoint {
  NetworkParams params;
  std::string algo;
};

inline Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint is empty");
  std::istringstream header(line);
  std::string magic, algo, dims;
  int version = 0;
  header >> magic >> version >> algo >> dims;
  if (magic != "FDQN" || version != 1 || algo.empty() || dims.empty()) {
    throw std::runtime_error("bad checkpoint header");
  }
  Topology topology;
  if (dims == topology_dims(Topology::Standard)) {
    topology = Topology::Standard;
  } else if (dims == topology_dims(Topology::Dueling)) {
    topology = Topology::Dueling;
  } else {
    throw std::runtime_error("unknown checkpoint topology dims: " + dims);
  }

  Checkpoint ck;
  ck.algo = algo;
  ck.params = make_network(topology);
  auto arrays = named_arrays(ck.params);
  for (const auto& [name, cvalues] : arrays) {
    auto* values = const_cast<std::vector<double>*>(cvalues);
    if (!std::getline(in, line)) {
      throw std::runtime_error("checkpoint truncated before array '" + name + "'");
    }
    std::istringstream row(line);
    std::string got_name;
    std::size_t len = 0;
    row >> got_name >> len;
    if (got_name != name) {
      throw std::runtime_error("checkpoint array '" + name + "' missing (found '" + got_name +
                               "')");
    }
    if (len != values->size()) {
      throw std::runtime_error("checkpoint array '" + name + "' has length " +
                               std::to_string(len) + ", expected " +
                               std::to_string(values->size()));
    }
    for (std::size_t i = 0; i < len; ++i) {
      if (!(row >> (*values)[i])) {
        throw std::runtime_error("checkpoint array '" + name + "' truncated at value " +
                                 std::to_string(i));
      }
    }
    double extra;
    if (row >> extra) {
      throw std::runtime_error("checkpoint array '" + name + "' has trailing values");
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw std::runtime_error("checkpoint has trailing data");
  }
  return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace fdqn
