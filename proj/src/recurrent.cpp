#include "gazecomp/recurrent.hpp"

#include <cmath>

namespace gazecomp {

const char* gate_name(Gate gate) {
  switch (gate) {
    case Gate::input: return "input";
    case Gate::forget: return "forget";
    case Gate::output: return "output";
    case Gate::candidate: return "candidate";
  }
  return "?";
}

namespace {

ad::Tensor glorot_uniform(Index rows, Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  ad::Tensor m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

}  // namespace

std::vector<ad::Parameter*> LstmParams::parameters() const {
  std::vector<ad::Parameter*> out;
  for (Gate g : kGates) {
    out.push_back(&W(g));
    out.push_back(&U(g));
    out.push_back(&b(g));
  }
  return out;
}

LstmParams LstmParams::create(ad::ParameterSet& store, const std::string& prefix, Index input_size, Index hidden_size,
                              std::mt19937_64& rng) {
  if (input_size <= 0 || hidden_size <= 0) {
    throw ConfigError(prefix + ": LSTM sizes must be positive");
  }
  LstmParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  for (Gate g : kGates) {
    const int k = static_cast<int>(g);
    const std::string suffix = gate_name(g);
    p.input_weights[k] = &store.add(prefix + ".W_" + suffix, glorot_uniform(hidden_size, input_size, rng));
    p.recurrent_weights[k] = &store.add(prefix + ".U_" + suffix, glorot_uniform(hidden_size, hidden_size, rng));
    const double bias = g == Gate::forget ? 1.0 : 0.0;
    p.biases[k] = &store.add(prefix + ".b_" + suffix, ad::Tensor::Constant(hidden_size, 1, bias));
  }
  return p;
}

std::vector<ad::Parameter*> BiLstmParams::parameters() const {
  auto out = fwd.parameters();
  auto back = bwd.parameters();
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

LstmState lstm_step(ad::Tape& tape, ad::Var x, ad::Var h_prev, ad::Var c_prev, const LstmParams& params) {
  if (x.rows() != params.input_size || x.cols() != 1) {
    throw ShapeError("lstm_step: input " + ad::detail::shape_string(x.rows(), x.cols()) + " vs expected (" +
                     std::to_string(params.input_size) + "x1)");
  }
  if (h_prev.rows() != params.hidden_size || c_prev.rows() != params.hidden_size || h_prev.cols() != 1 ||
      c_prev.cols() != 1) {
    throw ShapeError("lstm_step: state " + ad::detail::shape_string(h_prev.rows(), h_prev.cols()) + " vs expected (" +
                     std::to_string(params.hidden_size) + "x1)");
  }
  auto preactivation = [&](Gate g) {
    return ad::affine(tape.parameter(params.W(g)), x, tape.parameter(params.b(g))) +
           ad::matmul(tape.parameter(params.U(g)), h_prev);
  };
  ad::Var i = ad::sigmoid(preactivation(Gate::input));
  ad::Var f = ad::sigmoid(preactivation(Gate::forget));
  ad::Var o = ad::sigmoid(preactivation(Gate::output));
  ad::Var g = ad::tanh(preactivation(Gate::candidate));
  ad::Var c = ad::cmul(f, c_prev) + ad::cmul(i, g);
  ad::Var h = ad::cmul(o, ad::tanh(c));
  return {h, c};
}

LayerOutput run_bilstm_layer(ad::Tape& tape, std::span<const ad::Var> inputs, const BiLstmParams& layer) {
  if (inputs.empty()) throw DataError("run_bilstm_layer: empty sequence");
  const Index width = inputs[0].rows();
  for (const auto& x : inputs) {
    if (x.rows() != width || x.cols() != 1) {
      throw ShapeError("run_bilstm_layer: non-uniform input width " + ad::detail::shape_string(x.rows(), x.cols()) +
                       " vs (" + std::to_string(width) + "x1)");
    }
  }
  const std::size_t n = inputs.size();

  std::vector<ad::Var> forward(n);
  {
    ad::Var h = tape.constant(ad::Tensor::Zero(layer.fwd.hidden_size, 1));
    ad::Var c = tape.constant(ad::Tensor::Zero(layer.fwd.hidden_size, 1));
    for (std::size_t t = 0; t < n; ++t) {
      auto state = lstm_step(tape, inputs[t], h, c, layer.fwd);
      h = state.h;
      c = state.c;
      forward[t] = h;
    }
  }
  std::vector<ad::Var> backward(n);
  {
    ad::Var h = tape.constant(ad::Tensor::Zero(layer.bwd.hidden_size, 1));
    ad::Var c = tape.constant(ad::Tensor::Zero(layer.bwd.hidden_size, 1));
    for (std::size_t t = n; t-- > 0;) {
      auto state = lstm_step(tape, inputs[t], h, c, layer.bwd);
      h = state.h;
      c = state.c;
      backward[t] = h;
    }
  }

  LayerOutput out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = ad::concat(forward[t], backward[t]);
  return out;
}

void validate_stack(std::span<const BiLstmParams> layers, Index input_width) {
  Index width = input_width;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& layer = layers[i];
    if (layer.fwd.input_size != width || layer.bwd.input_size != width) {
      throw ConfigError("layer " + std::to_string(i) + " expects input width " + std::to_string(layer.fwd.input_size) +
                        " but receives " + std::to_string(width));
    }
    width = layer.output_size();
  }
}

std::vector<LayerOutput> stack_forward(ad::Tape& tape, std::span<const ad::Var> inputs,
                                       std::span<const BiLstmParams> layers, std::optional<std::size_t> depth) {
  const std::size_t count = std::min(depth.value_or(layers.size()), layers.size());
  std::vector<LayerOutput> outputs;
  outputs.reserve(count);
  std::span<const ad::Var> current = inputs;
  for (std::size_t i = 0; i < count; ++i) {
    outputs.push_back(run_bilstm_layer(tape, current, layers[i]));
    current = outputs.back();
  }
  return outputs;
}

}  // namespace gazecomp
