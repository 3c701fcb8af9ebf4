#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "softtype/logic.hpp"

namespace softtype {

// Printable ASCII (0x20..0x7e) plus one out-of-vocabulary slot at index 0.
class CharVocab {
public:
  static constexpr std::size_t kOov = 0;
  static constexpr std::size_t kSize = 96;

  static std::size_t index(char c) noexcept {
    auto u = static_cast<unsigned char>(c);
    return (u >= 0x20 && u <= 0x7e) ? static_cast<std::size_t>(u - 0x20 + 1) : kOov;
  }
  static std::vector<std::size_t> encode(std::string_view name);
  static constexpr std::size_t size() noexcept { return kSize; }
};

struct LstmDims {
  std::size_t embed = 32;
  std::size_t hidden = 32;

  friend bool operator==(const LstmDims&, const LstmDims&) = default;
};

// Character-level LSTM classifier: embedding, one four-gate LSTM layer, and an
// affine head followed by log-softmax over the type universe.
//
// All parameters live in one flat vector, laid out as
//   embedding [vocab x embed]
//   input weights W [4H x embed], recurrent weights U [4H x H], bias [4H]
//   head weights A [T x H], head bias [T]
// with gate blocks ordered input, forget, cell candidate, output.
class LstmModel {
public:
  LstmModel() = default;
  // All parameters zero.
  LstmModel(TypeUniverse types, LstmDims dims);
  // Uniform(-k, k) with k = 1/sqrt(H); forget-gate bias 1.
  static LstmModel initialised(TypeUniverse types, LstmDims dims, std::uint64_t seed);

  const TypeUniverse& types() const noexcept { return types_; }
  const LstmDims& dims() const noexcept { return dims_; }
  std::size_t numTypes() const noexcept { return types_.size(); }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }

  struct Layout {
    std::size_t embedding, input_weights, recurrent_weights, gate_bias, head_weights, head_bias, total;

    friend bool operator==(const Layout&, const Layout&) = default;
  };
  Layout layout() const noexcept { return layout_; }

  // Log-probabilities over the type universe. Throws InvalidArgument on an empty name.
  std::vector<double> forward(std::string_view name) const;

  // Negative log-likelihood of `label` for `name`; adds d(NLL)/d(params) into grad.
  double backward(std::string_view name, TypeIndex label, std::span<double> grad) const;

  friend bool operator==(const LstmModel&, const LstmModel&) = default;

private:
  struct Trace;
  void run(std::string_view name, Trace& trace) const;

  TypeUniverse types_;
  LstmDims dims_;
  Layout layout_{};
  std::vector<double> params_;
};

}  // namespace softtype
