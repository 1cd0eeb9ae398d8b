#ifndef GAZECOMP_AUTODIFF_HPP
#define GAZECOMP_AUTODIFF_HPP

// Tape-based reverse-mode differentiation over dense matrices and column
// vectors. A tape is rebuilt for every forward pass; backward() consumes it.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gazecomp/error.hpp"

namespace gazecomp::ad {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

/// Names of parameters whose gradients a backward pass may touch.
/// std::nullopt means every parameter.
using Scope = std::optional<std::unordered_set<std::string>>;

template <typename Scalar>
struct BasicParameter {
  BasicParameter(std::string n, MatrixX<Scalar> v)
      : name(std::move(n)), value(std::move(v)), grad(MatrixX<Scalar>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }

  std::string name;
  MatrixX<Scalar> value;
  MatrixX<Scalar> grad;
};

/// Owns parameters in registration order. Element addresses are stable.
template <typename Scalar>
class BasicParameterSet {
 public:
  using Parameter = BasicParameter<Scalar>;

  Parameter& add(std::string name, MatrixX<Scalar> value) {
    if (index_.contains(name)) {
      throw ConfigError("duplicate parameter name: " + name);
    }
    index_.emplace(name, params_.size());
    return params_.emplace_back(std::move(name), std::move(value));
  }

  Parameter* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
  }
  const Parameter* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
  }

  Parameter& at(const std::string& name) {
    if (auto* p = find(name)) return *p;
    throw ConfigError("unknown parameter: " + name);
  }

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t coefficient_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grads() {
    for (auto& p : params_) p.zero_grad();
  }

  std::vector<Parameter*> pointers() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(&p);
    return out;
  }

 private:
  std::deque<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class OpKind {
  constant,
  parameter,
  row_lookup,
  matmul,
  add,
  cmul,
  sigmoid,
  tanh,
  concat,
  affine,
  sum,
  scale,
  softmax_cross_entropy,
};

inline const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::constant: return "constant";
    case OpKind::parameter: return "parameter";
    case OpKind::row_lookup: return "row_lookup";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::cmul: return "elementwise-mul";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::tanh: return "tanh";
    case OpKind::concat: return "concat";
    case OpKind::affine: return "affine";
    case OpKind::sum: return "sum";
    case OpKind::scale: return "scale";
    case OpKind::softmax_cross_entropy: return "softmax_cross_entropy";
  }
  return "?";
}

template <typename Scalar>
class BasicTape;

/// Handle to a value recorded on a tape. Cheap to copy.
template <typename Scalar>
struct BasicVar {
  BasicTape<Scalar>* tape = nullptr;
  std::size_t id = 0;
  std::uint64_t generation = 0;

  const MatrixX<Scalar>& value() const { return tape->value(*this); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

namespace detail {

inline std::string shape_string(Index rows, Index cols) {
  std::ostringstream os;
  os << '(' << rows << 'x' << cols << ')';
  return os.str();
}

template <typename Scalar>
Scalar log_sum_exp(const MatrixX<Scalar>& x) {
  const Scalar m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

}  // namespace detail

template <typename Scalar>
class BasicTape {
 public:
  using Matrix = MatrixX<Scalar>;
  using Var = BasicVar<Scalar>;
  using Parameter = BasicParameter<Scalar>;

  BasicTape() = default;
  BasicTape(const BasicTape&) = delete;
  BasicTape& operator=(const BasicTape&) = delete;

  Var constant(Matrix value) {
    Record r;
    r.kind = OpKind::constant;
    r.value = std::move(value);
    return push(std::move(r));
  }

  /// Leaf bound to a parameter; one leaf per parameter per tape.
  Var parameter(Parameter& p) {
    auto it = param_leaves_.find(&p);
    if (it != param_leaves_.end()) return handle(it->second);
    Record r;
    r.kind = OpKind::parameter;
    r.param = &p;
    r.value = p.value;
    Var v = push(std::move(r));
    param_leaves_.emplace(&p, v.id);
    return v;
  }

  /// Row `row` of a parameter matrix as a column vector (embedding lookup).
  Var row(Parameter& p, Index row) {
    if (row < 0 || row >= p.value.rows()) {
      throw ShapeError("row_lookup: row " + std::to_string(row) + " outside " +
                       detail::shape_string(p.value.rows(), p.value.cols()) + " of " + p.name);
    }
    Record r;
    r.kind = OpKind::row_lookup;
    r.param = &p;
    r.row = row;
    r.value = p.value.row(row).transpose();
    return push(std::move(r));
  }

  Var matmul(Var a, Var b) {
    const Matrix& x = value(a);
    const Matrix& y = value(b);
    if (x.cols() != y.rows()) shape_error(OpKind::matmul, x, y);
    return push_op(OpKind::matmul, {a.id, b.id}, x * y);
  }

  Var add(Var a, Var b) {
    const Matrix& x = value(a);
    const Matrix& y = value(b);
    if (x.rows() != y.rows() || x.cols() != y.cols()) shape_error(OpKind::add, x, y);
    return push_op(OpKind::add, {a.id, b.id}, x + y);
  }

  Var cmul(Var a, Var b) {
    const Matrix& x = value(a);
    const Matrix& y = value(b);
    if (x.rows() != y.rows() || x.cols() != y.cols()) shape_error(OpKind::cmul, x, y);
    return push_op(OpKind::cmul, {a.id, b.id}, x.cwiseProduct(y));
  }

  Var sigmoid(Var a) {
    const Matrix& x = value(a);
    Matrix y = x.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
    return push_op(OpKind::sigmoid, {a.id}, std::move(y));
  }

  Var tanh(Var a) {
    Matrix y = value(a).array().tanh().matrix();
    return push_op(OpKind::tanh, {a.id}, std::move(y));
  }

  /// Stacks operands vertically; all operands need the same column count.
  Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat: no operands");
    const Index cols = value(parts[0]).cols();
    Index rows = 0;
    for (const Var& p : parts) {
      const Matrix& x = value(p);
      if (x.cols() != cols) shape_error(OpKind::concat, value(parts[0]), x);
      rows += x.rows();
    }
    Matrix y(rows, cols);
    std::vector<std::size_t> ids;
    ids.reserve(parts.size());
    Index offset = 0;
    for (const Var& p : parts) {
      const Matrix& x = value(p);
      y.middleRows(offset, x.rows()) = x;
      offset += x.rows();
      ids.push_back(p.id);
    }
    return push_op(OpKind::concat, std::move(ids), std::move(y));
  }

  Var concat(Var a, Var b) {
    const Var parts[] = {a, b};
    return concat(std::span<const Var>(parts));
  }

  /// weight * x + bias
  Var affine(Var weight, Var x, Var bias) {
    const Matrix& w = value(weight);
    const Matrix& v = value(x);
    const Matrix& b = value(bias);
    if (w.cols() != v.rows()) shape_error(OpKind::affine, w, v);
    if (b.rows() != w.rows() || b.cols() != v.cols()) shape_error(OpKind::affine, w, b);
    Matrix y = w * v + b;
    return push_op(OpKind::affine, {weight.id, x.id, bias.id}, std::move(y));
  }

  Var sum(Var a) {
    Matrix y(1, 1);
    y(0, 0) = value(a).sum();
    return push_op(OpKind::sum, {a.id}, std::move(y));
  }

  Var scale(Var a, Scalar factor) {
    Var out = push_op(OpKind::scale, {a.id}, value(a) * factor);
    records_[out.id].factor = factor;
    return out;
  }

  /// -log softmax(logits)[gold] for a column vector of logits.
  Var softmax_cross_entropy(Var logits, Index gold) {
    const Matrix& z = value(logits);
    if (z.cols() != 1 || z.rows() < 2) {
      throw ShapeError("softmax_cross_entropy: logits must be a column vector with at least 2 entries, got " +
                       detail::shape_string(z.rows(), z.cols()));
    }
    if (gold < 0 || gold >= z.rows()) {
      throw ShapeError("softmax_cross_entropy: gold label " + std::to_string(gold) + " outside [0, " +
                       std::to_string(z.rows()) + ")");
    }
    const Scalar lse = detail::log_sum_exp(z);
    Matrix loss(1, 1);
    loss(0, 0) = lse - z(gold, 0);
    Matrix probs = (z.array() - lse).exp().matrix();
    Var out = push_op(OpKind::softmax_cross_entropy, {logits.id}, std::move(loss));
    records_[out.id].row = gold;
    records_[out.id].cache = std::move(probs);
    return out;
  }

  const Matrix& value(Var v) const {
    check(v);
    return records_[v.id].value;
  }

  /// Accumulates d(loss)/d(parameter) into every in-scope parameter's grad,
  /// then clears the tape. Out-of-scope grads are never written.
  void backward(Var loss, const Scope& scope = std::nullopt) {
    if (loss.tape != this || loss.generation != generation_ || loss.id >= records_.size()) {
      throw Error("backward: loss does not belong to the current tape (already consumed?)");
    }
    Record& top = records_[loss.id];
    if (top.value.rows() != 1 || top.value.cols() != 1) {
      throw ShapeError("backward: loss must be 1x1, got " + detail::shape_string(top.value.rows(), top.value.cols()));
    }
    top.grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Record& r = records_[i];
      if (r.grad.size() == 0) continue;
      propagate(r, scope);
    }
    clear();
  }

  /// Drops all records; outstanding handles become invalid.
  void clear() {
    records_.clear();
    param_leaves_.clear();
    ++generation_;
  }

  std::size_t size() const { return records_.size(); }

 private:
  struct Record {
    OpKind kind = OpKind::constant;
    std::vector<std::size_t> inputs;
    Matrix value;
    Matrix grad;
    Parameter* param = nullptr;
    Index row = 0;
    Scalar factor = 1;
    Matrix cache;
  };

  Var handle(std::size_t id) { return Var{this, id, generation_}; }

  Var push(Record r) {
    records_.push_back(std::move(r));
    return handle(records_.size() - 1);
  }

  Var push_op(OpKind kind, std::vector<std::size_t> inputs, Matrix value) {
    Record r;
    r.kind = kind;
    r.inputs = std::move(inputs);
    r.value = std::move(value);
    return push(std::move(r));
  }

  void check(Var v) const {
    if (v.tape != this || v.generation != generation_ || v.id >= records_.size()) {
      throw Error("stale or foreign tape handle");
    }
  }

  [[noreturn]] static void shape_error(OpKind kind, const Matrix& a, const Matrix& b) {
    throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " + detail::shape_string(a.rows(), a.cols()) +
                     " vs " + detail::shape_string(b.rows(), b.cols()));
  }

  template <typename Expr>
  void accumulate(std::size_t id, const Expr& g) {
    Matrix& target = records_[id].grad;
    if (target.size() == 0) {
      target = g;
    } else {
      target += g;
    }
  }

  static bool in_scope(const Parameter& p, const Scope& scope) {
    return !scope || scope->contains(p.name);
  }

  void propagate(Record& r, const Scope& scope) {
    const Matrix& g = r.grad;
    switch (r.kind) {
      case OpKind::constant:
        break;
      case OpKind::parameter:
        if (in_scope(*r.param, scope)) r.param->grad += g;
        break;
      case OpKind::row_lookup:
        if (in_scope(*r.param, scope)) r.param->grad.row(r.row) += g.transpose();
        break;
      case OpKind::matmul: {
        const Matrix& a = records_[r.inputs[0]].value;
        const Matrix& b = records_[r.inputs[1]].value;
        Matrix ga = g * b.transpose();
        Matrix gb = a.transpose() * g;
        accumulate(r.inputs[0], ga);
        accumulate(r.inputs[1], gb);
        break;
      }
      case OpKind::add:
        accumulate(r.inputs[0], g);
        accumulate(r.inputs[1], g);
        break;
      case OpKind::cmul: {
        Matrix ga = g.cwiseProduct(records_[r.inputs[1]].value);
        Matrix gb = g.cwiseProduct(records_[r.inputs[0]].value);
        accumulate(r.inputs[0], ga);
        accumulate(r.inputs[1], gb);
        break;
      }
      case OpKind::sigmoid: {
        const Matrix& y = r.value;
        Matrix gx = (g.array() * y.array() * (Scalar(1) - y.array())).matrix();
        accumulate(r.inputs[0], gx);
        break;
      }
      case OpKind::tanh: {
        const Matrix& y = r.value;
        Matrix gx = (g.array() * (Scalar(1) - y.array().square())).matrix();
        accumulate(r.inputs[0], gx);
        break;
      }
      case OpKind::concat: {
        Index offset = 0;
        for (std::size_t id : r.inputs) {
          const Index rows = records_[id].value.rows();
          Matrix part = g.middleRows(offset, rows);
          accumulate(id, part);
          offset += rows;
        }
        break;
      }
      case OpKind::affine: {
        const Matrix& w = records_[r.inputs[0]].value;
        const Matrix& x = records_[r.inputs[1]].value;
        Matrix gw = g * x.transpose();
        Matrix gx = w.transpose() * g;
        accumulate(r.inputs[0], gw);
        accumulate(r.inputs[1], gx);
        accumulate(r.inputs[2], g);
        break;
      }
      case OpKind::sum: {
        const Matrix& x = records_[r.inputs[0]].value;
        Matrix gx = Matrix::Constant(x.rows(), x.cols(), g(0, 0));
        accumulate(r.inputs[0], gx);
        break;
      }
      case OpKind::scale: {
        Matrix gx = g * r.factor;
        accumulate(r.inputs[0], gx);
        break;
      }
      case OpKind::softmax_cross_entropy: {
        Matrix gx = r.cache;
        gx(r.row, 0) -= Scalar(1);
        gx *= g(0, 0);
        accumulate(r.inputs[0], gx);
        break;
      }
    }
  }

  std::vector<Record> records_;
  std::unordered_map<const Parameter*, std::size_t> param_leaves_;
  std::uint64_t generation_ = 0;
};

// Free-function forms, so model code reads as expressions over handles.

namespace detail {
template <typename Scalar>
BasicTape<Scalar>& same_tape(BasicVar<Scalar> a, BasicVar<Scalar> b) {
  if (a.tape == nullptr || a.tape != b.tape) throw Error("operands recorded on different tapes");
  return *a.tape;
}
}  // namespace detail

template <typename Scalar>
BasicVar<Scalar> matmul(BasicVar<Scalar> a, BasicVar<Scalar> b) { return detail::same_tape(a, b).matmul(a, b); }
template <typename Scalar>
BasicVar<Scalar> add(BasicVar<Scalar> a, BasicVar<Scalar> b) { return detail::same_tape(a, b).add(a, b); }
template <typename Scalar>
BasicVar<Scalar> cmul(BasicVar<Scalar> a, BasicVar<Scalar> b) { return detail::same_tape(a, b).cmul(a, b); }
template <typename Scalar>
BasicVar<Scalar> sigmoid(BasicVar<Scalar> a) { return a.tape->sigmoid(a); }
template <typename Scalar>
BasicVar<Scalar> tanh(BasicVar<Scalar> a) { return a.tape->tanh(a); }
template <typename Scalar>
BasicVar<Scalar> concat(BasicVar<Scalar> a, BasicVar<Scalar> b) { return detail::same_tape(a, b).concat(a, b); }
template <typename Scalar>
BasicVar<Scalar> affine(BasicVar<Scalar> w, BasicVar<Scalar> x, BasicVar<Scalar> b) {
  detail::same_tape(w, x);
  return detail::same_tape(w, b).affine(w, x, b);
}
template <typename Scalar>
BasicVar<Scalar> sum(BasicVar<Scalar> a) { return a.tape->sum(a); }
template <typename Scalar>
BasicVar<Scalar> scale(BasicVar<Scalar> a, Scalar factor) { return a.tape->scale(a, factor); }
template <typename Scalar>
BasicVar<Scalar> softmax_cross_entropy(BasicVar<Scalar> logits, Index gold) {
  return logits.tape->softmax_cross_entropy(logits, gold);
}

template <typename Scalar>
BasicVar<Scalar> operator+(BasicVar<Scalar> a, BasicVar<Scalar> b) { return add(a, b); }

/// Plain SGD. Grads of every listed parameter are validated first, so a
/// non-finite gradient aborts before any value changes.
template <typename Scalar>
void sgd_step(std::span<BasicParameter<Scalar>* const> params, Scalar learning_rate) {
  if (!(learning_rate > Scalar(0)) || !std::isfinite(learning_rate)) {
    throw ConfigError("sgd_step: learning rate must be positive and finite");
  }
  for (const auto* p : params) {
    if (!p->grad.allFinite()) throw NumericError("sgd_step: non-finite gradient in parameter " + p->name);
  }
  for (auto* p : params) {
    p->value -= learning_rate * p->grad;
    p->zero_grad();
  }
}

/// Rescales grads so their joint L2 norm is at most max_norm. Returns the norm before clipping.
template <typename Scalar>
Scalar clip_grad_norm(std::span<BasicParameter<Scalar>* const> params, Scalar max_norm) {
  Scalar sq = 0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  const Scalar norm = std::sqrt(sq);
  if (norm > max_norm && norm > Scalar(0)) {
    const Scalar factor = max_norm / norm;
    for (auto* p : params) p->grad *= factor;
  }
  return norm;
}

template <typename Scalar>
struct BasicGradCheckEntry {
  std::string name;
  Index row = 0;
  Index col = 0;
  Scalar analytic = 0;
  Scalar numeric = 0;
  Scalar rel_error = 0;
};

template <typename Scalar>
struct BasicGradCheckReport {
  Scalar max_rel_error = 0;
  std::size_t coordinates = 0;
  /// Worst coordinate of each parameter, in the order the parameters were given.
  std::vector<BasicGradCheckEntry<Scalar>> worst;
};

template <typename Scalar>
using LossFunction = std::function<BasicVar<Scalar>(BasicTape<Scalar>&)>;

/// Compares backprop gradients with central differences for every
/// coordinate of `params`. Relative error per coordinate is
/// |a - n| / max(1e-6, |a| + |n|); the floor sits above the roundoff of a central
/// difference, so near-zero gradients are compared absolutely. Parameter
/// values and grads are restored.
template <typename Scalar>
BasicGradCheckReport<Scalar> finite_difference_check(const LossFunction<Scalar>& loss_fn,
                                                     std::span<BasicParameter<Scalar>* const> params, Scalar epsilon) {
  if (!(epsilon > Scalar(0)) || !std::isfinite(epsilon)) {
    throw ConfigError("finite_difference_check: epsilon must be positive and finite");
  }
  std::vector<MatrixX<Scalar>> saved_grads;
  std::unordered_set<std::string> names;
  for (auto* p : params) {
    saved_grads.push_back(p->grad);
    names.insert(p->name);
    p->zero_grad();
  }

  BasicTape<Scalar> tape;
  tape.backward(loss_fn(tape), names);
  std::vector<MatrixX<Scalar>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);

  auto evaluate = [&]() {
    Scalar v = loss_fn(tape).value()(0, 0);
    tape.clear();
    return v;
  };

  BasicGradCheckReport<Scalar> report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    BasicGradCheckEntry<Scalar> worst{p->name};
    worst.rel_error = -1;
    for (Index r = 0; r < p->value.rows(); ++r) {
      for (Index c = 0; c < p->value.cols(); ++c) {
        const Scalar original = p->value(r, c);
        p->value(r, c) = original + epsilon;
        const Scalar plus = evaluate();
        p->value(r, c) = original - epsilon;
        const Scalar minus = evaluate();
        p->value(r, c) = original;
        const Scalar numeric = (plus - minus) / (Scalar(2) * epsilon);
        const Scalar a = analytic[k](r, c);
        const Scalar denom = std::max(Scalar(1e-6), std::abs(a) + std::abs(numeric));
        Scalar rel = std::abs(a - numeric) / denom;
        if (!std::isfinite(rel)) rel = std::numeric_limits<Scalar>::infinity();
        ++report.coordinates;
        if (rel > worst.rel_error) worst = {p->name, r, c, a, numeric, rel};
      }
    }
    if (worst.rel_error < 0) worst.rel_error = 0;
    report.max_rel_error = std::max(report.max_rel_error, worst.rel_error);
    report.worst.push_back(std::move(worst));
  }

  for (std::size_t k = 0; k < params.size(); ++k) params[k]->grad = saved_grads[k];
  return report;
}

using Tensor = MatrixX<double>;
using Parameter = BasicParameter<double>;
using ParameterSet = BasicParameterSet<double>;
using Tape = BasicTape<double>;
using Var = BasicVar<double>;
using GradCheckEntry = BasicGradCheckEntry<double>;
using GradCheckReport = BasicGradCheckReport<double>;

}  // namespace gazecomp::ad

#endif  // GAZECOMP_AUTODIFF_HPP
