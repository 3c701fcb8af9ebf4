#include "softtype/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "softtype/error.hpp"
#include "softtype/rng.hpp"

namespace softtype {

std::vector<std::size_t> CharVocab::encode(std::string_view name) {
  std::vector<std::size_t> out;
  out.reserve(name.size());
  for (char c : name) out.push_back(index(c));
  return out;
}

LstmModel::LstmModel(TypeUniverse types, LstmDims dims) : types_(std::move(types)), dims_(dims) {
  if (dims.embed == 0 || dims.hidden == 0) throw InvalidArgument("LSTM dimensions must be positive");
  const std::size_t h4 = 4 * dims.hidden;
  std::size_t at = 0;
  auto take = [&](std::size_t n) {
    std::size_t start = at;
    at += n;
    return start;
  };
  layout_.embedding = take(CharVocab::size() * dims.embed);
  layout_.input_weights = take(h4 * dims.embed);
  layout_.recurrent_weights = take(h4 * dims.hidden);
  layout_.gate_bias = take(h4);
  layout_.head_weights = take(types_.size() * dims.hidden);
  layout_.head_bias = take(types_.size());
  layout_.total = at;
  params_.assign(at, 0.0);
}

LstmModel LstmModel::initialised(TypeUniverse types, LstmDims dims, std::uint64_t seed) {
  LstmModel m(std::move(types), dims);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  for (double& p : m.params_) p = rng.uniform(-k, k);
  const std::size_t h = dims.hidden;
  for (std::size_t j = 0; j < h; ++j) m.params_[m.layout_.gate_bias + h + j] = 1.0;
  return m;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

struct LstmModel::Trace {
  std::vector<std::size_t> chars;
  // Per step t (1-based; index 0 holds the zero initial state): gate
  // activations i, f, g, o and states c, h, each of length H.
  std::vector<double> gates;  // N x 4H
  std::vector<double> cells;  // (N+1) x H
  std::vector<double> hidden; // (N+1) x H
  std::vector<double> log_probs;
};

void LstmModel::run(std::string_view name, Trace& tr) const {
  if (name.empty()) throw InvalidArgument("cannot classify an empty name");
  const std::size_t h = dims_.hidden, d = dims_.embed, h4 = 4 * h, n = name.size();
  const double* emb = params_.data() + layout_.embedding;
  const double* w = params_.data() + layout_.input_weights;
  const double* u = params_.data() + layout_.recurrent_weights;
  const double* b = params_.data() + layout_.gate_bias;

  tr.chars = CharVocab::encode(name);
  tr.gates.assign(n * h4, 0.0);
  tr.cells.assign((n + 1) * h, 0.0);
  tr.hidden.assign((n + 1) * h, 0.0);

  std::vector<double> z(h4);
  for (std::size_t t = 0; t < n; ++t) {
    const double* x = emb + tr.chars[t] * d;
    const double* h_prev = tr.hidden.data() + t * h;
    const double* c_prev = tr.cells.data() + t * h;
    for (std::size_t r = 0; r < h4; ++r) {
      double acc = b[r];
      const double* wr = w + r * d;
      for (std::size_t k = 0; k < d; ++k) acc += wr[k] * x[k];
      const double* ur = u + r * h;
      for (std::size_t k = 0; k < h; ++k) acc += ur[k] * h_prev[k];
      z[r] = acc;
    }
    double* gate = tr.gates.data() + t * h4;
    double* c = tr.cells.data() + (t + 1) * h;
    double* hn = tr.hidden.data() + (t + 1) * h;
    for (std::size_t j = 0; j < h; ++j) {
      double ig = sigmoid(z[j]);
      double fg = sigmoid(z[h + j]);
      double gg = std::tanh(z[2 * h + j]);
      double og = sigmoid(z[3 * h + j]);
      gate[j] = ig;
      gate[h + j] = fg;
      gate[2 * h + j] = gg;
      gate[3 * h + j] = og;
      c[j] = fg * c_prev[j] + ig * gg;
      hn[j] = og * std::tanh(c[j]);
    }
  }

  const std::size_t nt = types_.size();
  const double* a = params_.data() + layout_.head_weights;
  const double* hb = params_.data() + layout_.head_bias;
  const double* hn = tr.hidden.data() + n * h;
  tr.log_probs.assign(nt, 0.0);
  for (std::size_t k = 0; k < nt; ++k) {
    double acc = hb[k];
    for (std::size_t j = 0; j < h; ++j) acc += a[k * h + j] * hn[j];
    tr.log_probs[k] = acc;
  }
  double mx = *std::max_element(tr.log_probs.begin(), tr.log_probs.end());
  double sum = 0.0;
  for (double v : tr.log_probs) sum += std::exp(v - mx);
  double lse = mx + std::log(sum);
  for (double& v : tr.log_probs) v -= lse;
}

std::vector<double> LstmModel::forward(std::string_view name) const {
  Trace tr;
  run(name, tr);
  return std::move(tr.log_probs);
}

double LstmModel::backward(std::string_view name, TypeIndex label, std::span<double> grad) const {
  if (label >= types_.size()) throw InvalidArgument("label outside the type universe");
  if (grad.size() != params_.size()) throw DimensionMismatch("gradient buffer has the wrong size");
  Trace tr;
  run(name, tr);
  const std::size_t h = dims_.hidden, d = dims_.embed, h4 = 4 * h, n = name.size(), nt = types_.size();

  // Head: d(NLL)/d(logits) = softmax - onehot.
  std::vector<double> dlogits(nt);
  for (std::size_t k = 0; k < nt; ++k) dlogits[k] = std::exp(tr.log_probs[k]) - (k == label ? 1.0 : 0.0);

  const double* a = params_.data() + layout_.head_weights;
  const double* w = params_.data() + layout_.input_weights;
  const double* u = params_.data() + layout_.recurrent_weights;
  double* ga = grad.data() + layout_.head_weights;
  double* ghb = grad.data() + layout_.head_bias;
  double* gemb = grad.data() + layout_.embedding;
  double* gw = grad.data() + layout_.input_weights;
  double* gu = grad.data() + layout_.recurrent_weights;
  double* gb = grad.data() + layout_.gate_bias;

  std::vector<double> dh(h, 0.0), dc(h, 0.0), dz(h4);
  const double* h_last = tr.hidden.data() + n * h;
  for (std::size_t k = 0; k < nt; ++k) {
    ghb[k] += dlogits[k];
    for (std::size_t j = 0; j < h; ++j) {
      ga[k * h + j] += dlogits[k] * h_last[j];
      dh[j] += a[k * h + j] * dlogits[k];
    }
  }

  for (std::size_t t = n; t-- > 0;) {
    const double* gate = tr.gates.data() + t * h4;
    const double* c = tr.cells.data() + (t + 1) * h;
    const double* c_prev = tr.cells.data() + t * h;
    const double* h_prev = tr.hidden.data() + t * h;
    const double* x = params_.data() + layout_.embedding + tr.chars[t] * d;
    for (std::size_t j = 0; j < h; ++j) {
      double ig = gate[j], fg = gate[h + j], gg = gate[2 * h + j], og = gate[3 * h + j];
      double tc = std::tanh(c[j]);
      double dct = dc[j] + dh[j] * og * (1.0 - tc * tc);
      dz[j] = dct * gg * ig * (1.0 - ig);
      dz[h + j] = dct * c_prev[j] * fg * (1.0 - fg);
      dz[2 * h + j] = dct * ig * (1.0 - gg * gg);
      dz[3 * h + j] = dh[j] * tc * og * (1.0 - og);
      dc[j] = dct * fg;
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    double* gx = gemb + tr.chars[t] * d;
    for (std::size_t r = 0; r < h4; ++r) {
      double g = dz[r];
      gb[r] += g;
      const double* wr = w + r * d;
      double* gwr = gw + r * d;
      for (std::size_t k = 0; k < d; ++k) {
        gwr[k] += g * x[k];
        gx[k] += g * wr[k];
      }
      const double* ur = u + r * h;
      double* gur = gu + r * h;
      for (std::size_t k = 0; k < h; ++k) {
        gur[k] += g * h_prev[k];
        dh[k] += g * ur[k];
      }
    }
  }
  return -tr.log_probs[label];
}

}  // namespace softtype
