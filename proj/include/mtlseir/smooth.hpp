#pragma once

// Differentiable surrogate of the robustness degree.
//
// A formula evaluated at a fixed index unrolls into a tree of min/max
// aggregations over affine atom terms. Negations are pushed to the atoms,
// nested aggregations of the same kind are flattened, and `true` constants are
// folded away. Each min is then replaced by a log-sum-exp softmin with
// sharpness beta (and each max by the dual softmax), so a single aggregation
// of arity m deviates from the exact value by at most ln(m)/beta.

#include "mtlseir/errors.hpp"
#include "mtlseir/formula.hpp"
#include "mtlseir/robustness.hpp"
#include "mtlseir/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mtlseir {

/// softmin(v; beta) = -(1/beta) log sum exp(-beta v_j), evaluated with a
/// max-shift. When `weights` is non-null it receives d softmin / d v_j.
inline double softmin(std::span<const double> v, double beta, std::vector<double>* weights = nullptr) {
  if (v.empty()) throw std::invalid_argument("softmin of an empty set");
  const double m = *std::min_element(v.begin(), v.end());
  double sum = 0.0;
  if (weights) weights->resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double e = std::exp(-beta * (v[j] - m));
    if (weights) (*weights)[j] = e;
    sum += e;
  }
  if (weights)
    for (double& w : *weights) w /= sum;
  return m - std::log(sum) / beta;
}

inline double softmax(std::span<const double> v, double beta, std::vector<double>* weights = nullptr) {
  if (v.empty()) throw std::invalid_argument("softmax of an empty set");
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  if (weights) weights->resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double e = std::exp(beta * (v[j] - m));
    if (weights) (*weights)[j] = e;
    sum += e;
  }
  if (weights)
    for (double& w : *weights) w /= sum;
  return m + std::log(sum) / beta;
}

struct SmoothValue {
  double value = 0.0;
  std::vector<State> gradient; // d value / d xi_k[i], same length as the trajectory
};

/// Compiled aggregation tree for one (formula, index) pair. The tree depends
/// only on the formula, so it can be reused across many trajectories.
class SmoothRobustness {
public:
  SmoothRobustness(const Formula& phi, std::size_t k) : horizon_(k + phi.horizon()) {
    root_ = build(phi, k, false);
  }

  /// Number of states the trajectory must contain.
  std::size_t required_length() const { return horizon_ + 1; }

  /// Largest arity of any aggregation in the flattened tree (1 if none).
  std::size_t max_arity() const {
    std::size_t m = 1;
    for (const auto& n : nodes_)
      if (n.kind == Kind::Min || n.kind == Kind::Max) m = std::max<std::size_t>(m, n.count);
    return m;
  }

  /// Rigorous bound on |smooth - exact|. Softmin errs downward and softmax
  /// upward, so the bound accumulates ln(m)/beta only along chains of like
  /// aggregations separated by the opposite kind. For formulas with at most
  /// one min/max alternation this equals ln(max_arity)/beta.
  double error_bound(double beta) const {
    std::vector<double> down(nodes_.size(), 0.0), up(nodes_.size(), 0.0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      if (n.kind != Kind::Min && n.kind != Kind::Max) continue;
      double d = 0.0, u = 0.0;
      for (std::uint32_t c = 0; c < n.count; ++c) {
        d = std::max(d, down[children_[n.first + c]]);
        u = std::max(u, up[children_[n.first + c]]);
      }
      const double own = std::log(static_cast<double>(n.count)) / beta;
      if (n.kind == Kind::Min) d += own;
      else u += own;
      down[i] = d;
      up[i] = u;
    }
    return std::max(down[root_], up[root_]);
  }

  /// Exact robustness read off the same tree (min/max instead of soft versions).
  double exact(const Trajectory& xi) const {
    check(xi);
    std::vector<double> val(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      switch (n.kind) {
      case Kind::Const: val[i] = n.offset; break;
      case Kind::Leaf: val[i] = leaf_value(n, xi); break;
      case Kind::Min:
      case Kind::Max: {
        double r = val[children_[n.first]];
        for (std::uint32_t c = 1; c < n.count; ++c) {
          const double v = val[children_[n.first + c]];
          r = n.kind == Kind::Min ? std::min(r, v) : std::max(r, v);
        }
        val[i] = r;
        break;
      }
      }
    }
    return val[root_];
  }

  /// Smooth value; when `gradient` is non-null it is resized to the
  /// trajectory length and filled with d value / d xi.
  double evaluate(const Trajectory& xi, double beta, std::vector<State>* gradient = nullptr) const {
    if (!(beta > 0.0)) throw std::invalid_argument("smooth robustness requires beta > 0");
    check(xi);
    std::vector<double> val(nodes_.size());
    std::vector<double> scratch;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& n = nodes_[i];
      switch (n.kind) {
      case Kind::Const: val[i] = n.offset; break;
      case Kind::Leaf: val[i] = leaf_value(n, xi); break;
      case Kind::Min:
      case Kind::Max: {
        scratch.resize(n.count);
        for (std::uint32_t c = 0; c < n.count; ++c) scratch[c] = val[children_[n.first + c]];
        val[i] = n.kind == Kind::Min ? softmin(scratch, beta) : softmax(scratch, beta);
        break;
      }
      }
    }
    if (gradient) backpropagate(xi, beta, val, *gradient);
    return val[root_];
  }

  SmoothValue operator()(const Trajectory& xi, double beta) const {
    SmoothValue out;
    out.value = evaluate(xi, beta, &out.gradient);
    return out;
  }

private:
  enum class Kind : std::uint8_t { Const, Leaf, Min, Max };

  struct Node {
    Kind kind = Kind::Const;
    // Leaf: value = sign * xi[time][coord] + offset. Const: value = offset.
    double sign = 0.0;
    double offset = 0.0;
    std::uint32_t coord = 0;
    std::uint32_t time = 0;
    // Min/Max: children_[first, first + count).
    std::uint32_t first = 0;
    std::uint32_t count = 0;
  };

  void check(const Trajectory& xi) const {
    if (xi.size() < required_length())
      throw HorizonError("trajectory of length " + std::to_string(xi.size()) + " is too short; need " +
                         std::to_string(required_length()));
  }

  static double leaf_value(const Node& n, const Trajectory& xi) { return n.sign * xi[n.time][n.coord] + n.offset; }

  std::uint32_t push(Node n) {
    nodes_.push_back(n);
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  std::uint32_t constant(double v) {
    Node n;
    n.kind = Kind::Const;
    n.offset = v;
    return push(n);
  }

  // Creates a min (is_min) or max aggregation, splicing same-kind children and
  // folding infinite constants.
  std::uint32_t aggregate(bool is_min, const std::vector<std::uint32_t>& items) {
    const Kind kind = is_min ? Kind::Min : Kind::Max;
    const double identity = is_min ? kInf : -kInf;
    std::vector<std::uint32_t> flat;
    flat.reserve(items.size());
    for (auto id : items) {
      const Node& c = nodes_[id];
      if (c.kind == Kind::Const) {
        if (c.offset == identity) continue;
        if (c.offset == -identity) return constant(-identity);
        flat.push_back(id);
      } else if (c.kind == kind) {
        for (std::uint32_t j = 0; j < c.count; ++j) flat.push_back(children_[c.first + j]);
      } else {
        flat.push_back(id);
      }
    }
    if (flat.empty()) return constant(identity);
    if (flat.size() == 1) return flat.front();
    Node n;
    n.kind = kind;
    n.first = static_cast<std::uint32_t>(children_.size());
    n.count = static_cast<std::uint32_t>(flat.size());
    children_.insert(children_.end(), flat.begin(), flat.end());
    return push(n);
  }

  // Builds the tree for phi at index k; `negated` pushes a pending negation.
  std::uint32_t build(const Formula& phi, std::size_t k, bool negated) {
    switch (phi.kind()) {
    case FormulaKind::True: return constant(negated ? -kInf : kInf);
    case FormulaKind::Atomic: {
      const auto& p = phi.predicate();
      // LE: c - x ; GE: x - c ; negation flips both.
      const double s = (p.relation == Relation::LE ? -1.0 : 1.0) * (negated ? -1.0 : 1.0);
      Node n;
      n.kind = Kind::Leaf;
      n.sign = s;
      n.offset = -s * p.threshold;
      n.coord = static_cast<std::uint32_t>(index(p.coordinate));
      n.time = static_cast<std::uint32_t>(k);
      return push(n);
    }
    case FormulaKind::Not: return build(phi.child(), k, !negated);
    case FormulaKind::And:
    case FormulaKind::Or: {
      const bool is_min = (phi.kind() == FormulaKind::And) != negated;
      const auto a = build(phi.left(), k, negated);
      const auto b = build(phi.right(), k, negated);
      return aggregate(is_min, {a, b});
    }
    case FormulaKind::Eventually:
    case FormulaKind::Always: {
      const bool is_min = (phi.kind() == FormulaKind::Always) != negated;
      const auto b = phi.bound();
      std::vector<std::uint32_t> items;
      for (std::size_t j = k + b.lo; j <= k + b.hi; ++j) items.push_back(build(phi.child(), j, negated));
      return aggregate(is_min, items);
    }
    case FormulaKind::Until: {
      // max_{j in k+I} min(rho2(j), min_{k<=i<j} rho1(i)); negation swaps min/max.
      const auto b = phi.bound();
      std::vector<std::uint32_t> outer;
      for (std::size_t j = k + b.lo; j <= k + b.hi; ++j) {
        std::vector<std::uint32_t> inner{build(phi.right(), j, negated)};
        for (std::size_t i = k; i < j; ++i) inner.push_back(build(phi.left(), i, negated));
        outer.push_back(aggregate(!negated, inner));
      }
      return aggregate(negated, outer);
    }
    }
    return constant(0.0);
  }

  void backpropagate(const Trajectory& xi, double beta, const std::vector<double>& val,
                     std::vector<State>& gradient) const {
    gradient.assign(xi.size(), State{});
    std::vector<double> adj(nodes_.size(), 0.0);
    adj[root_] = 1.0;
    std::vector<double> scratch, weights;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (adj[i] == 0.0) continue;
      const auto& n = nodes_[i];
      switch (n.kind) {
      case Kind::Const: break;
      case Kind::Leaf: gradient[n.time][n.coord] += adj[i] * n.sign; break;
      case Kind::Min:
      case Kind::Max: {
        scratch.resize(n.count);
        for (std::uint32_t c = 0; c < n.count; ++c) scratch[c] = val[children_[n.first + c]];
        if (n.kind == Kind::Min) softmin(scratch, beta, &weights);
        else softmax(scratch, beta, &weights);
        for (std::uint32_t c = 0; c < n.count; ++c) adj[children_[n.first + c]] += adj[i] * weights[c];
        break;
      }
      }
    }
  }

  std::size_t horizon_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> children_;
  std::uint32_t root_ = 0;
};

/// One-shot smooth robustness of `phi` on `xi` at index `k`.
inline SmoothValue smooth_robustness(const Trajectory& xi, const Formula& phi, std::size_t k, double beta) {
  return SmoothRobustness(phi, k)(xi, beta);
}

} // namespace mtlseir
