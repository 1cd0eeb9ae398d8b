#ifndef GAZECOMP_RECURRENT_HPP
#define GAZECOMP_RECURRENT_HPP

#include <array>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gazecomp/autodiff.hpp"

namespace gazecomp {

using ad::Index;

enum class Gate { input = 0, forget = 1, output = 2, candidate = 3 };

inline constexpr std::array<Gate, 4> kGates = {Gate::input, Gate::forget, Gate::output, Gate::candidate};

const char* gate_name(Gate gate);

/// One direction of an LSTM layer, no peepholes. Matrices are owned by a
/// ParameterSet; this struct only points at them.
struct LstmParams {
  std::array<ad::Parameter*, 4> input_weights{};      // W_g: hidden x input
  std::array<ad::Parameter*, 4> recurrent_weights{};  // U_g: hidden x hidden
  std::array<ad::Parameter*, 4> biases{};             // b_g: hidden x 1
  Index hidden_size = 0;
  Index input_size = 0;

  ad::Parameter& W(Gate g) const { return *input_weights[static_cast<int>(g)]; }
  ad::Parameter& U(Gate g) const { return *recurrent_weights[static_cast<int>(g)]; }
  ad::Parameter& b(Gate g) const { return *biases[static_cast<int>(g)]; }

  std::vector<ad::Parameter*> parameters() const;

  /// Registers `<prefix>.W_<gate>`, `<prefix>.U_<gate>`, `<prefix>.b_<gate>`.
  /// Weights are Glorot-uniform, forget bias 1, other biases 0.
  static LstmParams create(ad::ParameterSet& store, const std::string& prefix, Index input_size, Index hidden_size,
                           std::mt19937_64& rng);
};

struct BiLstmParams {
  LstmParams fwd;
  LstmParams bwd;

  Index input_size() const { return fwd.input_size; }
  Index output_size() const { return fwd.hidden_size + bwd.hidden_size; }
  std::vector<ad::Parameter*> parameters() const;
};

struct LstmState {
  ad::Var h;
  ad::Var c;
};

/// Per-position [h_fwd(t); h_bwd(t)].
using LayerOutput = std::vector<ad::Var>;

LstmState lstm_step(ad::Tape& tape, ad::Var x, ad::Var h_prev, ad::Var c_prev, const LstmParams& params);

LayerOutput run_bilstm_layer(ad::Tape& tape, std::span<const ad::Var> inputs, const BiLstmParams& layer);

/// Checks the width chain: layer 0 consumes `input_width`, layer i consumes
/// the concatenated output of layer i-1. Throws ConfigError.
void validate_stack(std::span<const BiLstmParams> layers, Index input_width);

/// Outputs of every layer, bottom first. `depth` limits how many layers run.
std::vector<LayerOutput> stack_forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                                       std::span<const BiLstmParams> layers, std::optional<std::size_t> depth = {});

}  // namespace gazecomp

#endif  // GAZECOMP_RECURRENT_HPP
