#pragma once

// Metric temporal logic over discrete-time SEIR trajectories.
//
// Formulas are immutable trees of shared nodes. Atoms compare one state
// coordinate against a threshold (millions of persons). Temporal bounds are
// integer day offsets [lo, hi] with lo <= hi.

#include "mtlseir/state.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>

namespace mtlseir {

enum class Relation { LE, GE };

struct AtomicPredicate {
  Compartment coordinate = Compartment::I;
  Relation relation = Relation::LE;
  double threshold = 0.0;

  // Signed infinity-norm distance to the half-space {x : x_i <= c} (or >=).
  double robustness(const State& x) const {
    const double v = at(x, coordinate);
    return relation == Relation::LE ? threshold - v : v - threshold;
  }

  friend bool operator==(const AtomicPredicate&, const AtomicPredicate&) = default;
};

enum class FormulaKind { True, Atomic, Not, And, Or, Until, Eventually, Always };

struct TimeBound {
  std::size_t lo = 0;
  std::size_t hi = 0;

  friend bool operator==(const TimeBound&, const TimeBound&) = default;
};

class Formula {
public:
  static Formula truth() { return Formula(make(FormulaKind::True)); }

  static Formula atom(AtomicPredicate p) {
    if (!std::isfinite(p.threshold)) throw std::invalid_argument("atom threshold must be finite");
    if (index(p.coordinate) >= kStateDim) throw std::invalid_argument("atom coordinate out of range");
    auto n = make(FormulaKind::Atomic);
    n->atom = p;
    return Formula(std::move(n));
  }

  static Formula atom(Compartment c, Relation r, double threshold) {
    return atom(AtomicPredicate{c, r, threshold});
  }

  static Formula negation(Formula f) {
    auto n = make(FormulaKind::Not);
    n->left = std::move(f.node_);
    return Formula(std::move(n));
  }

  static Formula conjunction(Formula a, Formula b) { return binary(FormulaKind::And, std::move(a), std::move(b)); }
  static Formula disjunction(Formula a, Formula b) { return binary(FormulaKind::Or, std::move(a), std::move(b)); }

  static Formula until(Formula a, Formula b, TimeBound bound) {
    check_bound(bound);
    auto n = make(FormulaKind::Until);
    n->left = std::move(a.node_);
    n->right = std::move(b.node_);
    n->bound = bound;
    return Formula(std::move(n));
  }

  static Formula eventually(Formula f, TimeBound bound) { return unary_temporal(FormulaKind::Eventually, std::move(f), bound); }
  static Formula always(Formula f, TimeBound bound) { return unary_temporal(FormulaKind::Always, std::move(f), bound); }

  FormulaKind kind() const { return node_->kind; }
  const AtomicPredicate& predicate() const { return node_->atom; }
  TimeBound bound() const { return node_->bound; }

  // Not / Eventually / Always have a single operand, stored on the left.
  Formula child() const { return Formula(node_->left); }
  Formula left() const { return Formula(node_->left); }
  Formula right() const { return Formula(node_->right); }

  bool is_unary() const {
    const auto k = kind();
    return k == FormulaKind::Not || k == FormulaKind::Eventually || k == FormulaKind::Always;
  }
  bool is_binary() const {
    const auto k = kind();
    return k == FormulaKind::And || k == FormulaKind::Or || k == FormulaKind::Until;
  }

  friend bool operator==(const Formula& a, const Formula& b) { return equal(a.node_.get(), b.node_.get()); }

  // Smallest K such that evaluating at index 0 reads only indices <= K.
  std::size_t horizon() const { return horizon_of(*node_); }

  // Canonical text that `parse` maps back to a structurally identical tree.
  std::string to_string() const {
    std::string out;
    print(*node_, out);
    return out;
  }

private:
  struct Node {
    FormulaKind kind = FormulaKind::True;
    AtomicPredicate atom{};
    TimeBound bound{};
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static std::shared_ptr<Node> make(FormulaKind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
  }

  static void check_bound(TimeBound b) {
    if (b.lo > b.hi) throw std::invalid_argument("temporal bound requires lo <= hi");
  }

  static Formula binary(FormulaKind k, Formula a, Formula b) {
    auto n = make(k);
    n->left = std::move(a.node_);
    n->right = std::move(b.node_);
    return Formula(std::move(n));
  }

  static Formula unary_temporal(FormulaKind k, Formula f, TimeBound b) {
    check_bound(b);
    auto n = make(k);
    n->left = std::move(f.node_);
    n->bound = b;
    return Formula(std::move(n));
  }

  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case FormulaKind::True: return true;
    case FormulaKind::Atomic: return a->atom == b->atom;
    case FormulaKind::Not: return equal(a->left.get(), b->left.get());
    case FormulaKind::And:
    case FormulaKind::Or: return equal(a->left.get(), b->left.get()) && equal(a->right.get(), b->right.get());
    case FormulaKind::Until:
      return a->bound == b->bound && equal(a->left.get(), b->left.get()) && equal(a->right.get(), b->right.get());
    case FormulaKind::Eventually:
    case FormulaKind::Always: return a->bound == b->bound && equal(a->left.get(), b->left.get());
    }
    return false;
  }

  static std::size_t horizon_of(const Node& n) {
    switch (n.kind) {
    case FormulaKind::True:
    case FormulaKind::Atomic: return 0;
    case FormulaKind::Not: return horizon_of(*n.left);
    case FormulaKind::And:
    case FormulaKind::Or: return std::max(horizon_of(*n.left), horizon_of(*n.right));
    case FormulaKind::Eventually:
    case FormulaKind::Always: return n.bound.hi + horizon_of(*n.left);
    case FormulaKind::Until: {
      // phi2 is read at k' <= k+hi, phi1 at k'' < k', i.e. k'' <= k+hi-1.
      const std::size_t h2 = n.bound.hi + horizon_of(*n.right);
      if (n.bound.hi == 0) return h2;
      return std::max(h2, n.bound.hi - 1 + horizon_of(*n.left));
    }
    }
    return 0;
  }

  // Precedence: | < & < U < prefix operators and atoms.
  static int precedence(const Node& n) {
    switch (n.kind) {
    case FormulaKind::Or: return 1;
    case FormulaKind::And: return 2;
    case FormulaKind::Until: return 3;
    default: return 4;
    }
  }

  static void print_number(double v, std::string& out) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
  }

  static void print_bound(TimeBound b, std::string& out) {
    out += '[';
    out += std::to_string(b.lo);
    out += ',';
    out += std::to_string(b.hi);
    out += ']';
  }

  static void print_parenthesized(const Node& n, std::string& out) {
    out += '(';
    print(n, out);
    out += ')';
  }

  static void print_operand(const Node& n, bool parens, std::string& out) {
    if (parens) print_parenthesized(n, out);
    else print(n, out);
  }

  static void print(const Node& n, std::string& out) {
    switch (n.kind) {
    case FormulaKind::True: out += "true"; return;
    case FormulaKind::Atomic:
      out += name(n.atom.coordinate);
      out += n.atom.relation == Relation::LE ? " <= " : " >= ";
      print_number(n.atom.threshold, out);
      return;
    case FormulaKind::Not:
      out += '!';
      print_operand(*n.left, n.left->kind != FormulaKind::True, out);
      return;
    case FormulaKind::Eventually:
    case FormulaKind::Always:
      out += n.kind == FormulaKind::Eventually ? 'F' : 'G';
      print_bound(n.bound, out);
      print_parenthesized(*n.left, out);
      return;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Until: {
      const int p = precedence(n);
      print_operand(*n.left, precedence(*n.left) < p, out);
      if (n.kind == FormulaKind::Until) {
        out += " U";
        print_bound(n.bound, out);
        out += ' ';
      } else {
        out += n.kind == FormulaKind::And ? " & " : " | ";
      }
      print_operand(*n.right, precedence(*n.right) <= p, out);
      return;
    }
    }
  }

  std::shared_ptr<const Node> node_;
};

inline std::size_t horizon(const Formula& f) { return f.horizon(); }

} // namespace mtlseir
