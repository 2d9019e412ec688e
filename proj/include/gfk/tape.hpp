#ifndef GFK_TAPE_HPP
#define GFK_TAPE_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gfk/errors.hpp"

namespace gfk {

// Reverse-mode tape: an append-only Wengert list. Each node stores up to two
// parents and the local partials with respect to them. Values live on the Var
// handles, not on the tape, so a forward pass is a single growing vector of
// 24-byte nodes.
//
// A tape is confined to one evaluation context. Var arithmetic records onto
// the thread-local active tape installed by Tape::Scope; with no active tape
// every Var degrades to a plain constant.
class Tape {
 public:
  struct Node {
    double w0, w1;
    int32_t p0, p1;
  };

  int32_t leaf(double /*value*/) {
    nodes_.push_back({0.0, 0.0, -1, -1});
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  int32_t push(int32_t p0, double w0, int32_t p1, double w1) {
    nodes_.push_back({w0, w1, p0, p1});
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

  // Adjoints of every node given d(output)/d(output) = 1 at `root`.
  std::vector<double> adjoints(int32_t root) const {
    if (nodes_.empty()) throw NumericError("gradient of an empty tape");
    if (root < 0 || root >= static_cast<int32_t>(nodes_.size()))
      throw ContractError("adjoint root is not a tape node");
    std::vector<double> adj(nodes_.size(), 0.0);
    adj[static_cast<std::size_t>(root)] = 1.0;
    for (int32_t i = root; i >= 0; --i) {
      const double a = adj[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.p0 >= 0) adj[static_cast<std::size_t>(n.p0)] += n.w0 * a;
      if (n.p1 >= 0) adj[static_cast<std::size_t>(n.p1)] += n.w1 * a;
    }
    return adj;
  }

  std::vector<double> gradient(int32_t root, std::span<const int32_t> leaves) const {
    const std::vector<double> adj = adjoints(root);
    std::vector<double> g(leaves.size());
    for (std::size_t k = 0; k < leaves.size(); ++k)
      g[k] = adj[static_cast<std::size_t>(leaves[k])];
    return g;
  }

  static Tape*& active() {
    thread_local Tape* current = nullptr;
    return current;
  }

  // RAII installer for the thread-local active tape.
  class Scope {
   public:
    explicit Scope(Tape& t) : prev_(active()) { active() = &t; }
    ~Scope() { active() = prev_; }
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* prev_;
  };

 private:
  std::vector<Node> nodes_;
};

// Differentiable scalar bound to the active tape. idx < 0 marks a constant.
struct Var {
  double v = 0.0;
  int32_t idx = -1;

  Var() = default;
  Var(double x) : v(x) {}  // NOLINT: implicit by design, constants are Vars
  Var(double x, int32_t i) : v(x), idx(i) {}

  static Var leaf(double x) {
    Tape* t = Tape::active();
    if (!t) throw ContractError("Var::leaf requires an active tape");
    return Var(x, t->leaf(x));
  }
};

namespace detail {
inline Var record(double value, const Var& a, double wa, const Var& b, double wb) {
  Tape* t = Tape::active();
  if (!t || (a.idx < 0 && b.idx < 0)) return Var(value);
  return Var(value, t->push(a.idx, wa, b.idx, wb));
}
inline Var record(double value, const Var& a, double wa) {
  Tape* t = Tape::active();
  if (!t || a.idx < 0) return Var(value);
  return Var(value, t->push(a.idx, wa, -1, 0.0));
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  return detail::record(a.v + b.v, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  return detail::record(a.v - b.v, a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
  return detail::record(a.v * b.v, a, b.v, b, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.v;
  return detail::record(a.v * inv, a, inv, b, -a.v * inv * inv);
}
inline Var operator-(const Var& a) { return detail::record(-a.v, a, -1.0); }
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline bool operator<(const Var& a, const Var& b) { return a.v < b.v; }
inline bool operator>(const Var& a, const Var& b) { return a.v > b.v; }

inline Var exp(const Var& a) {
  const double e = std::exp(a.v);
  return detail::record(e, a, e);
}
inline Var log(const Var& a) { return detail::record(std::log(a.v), a, 1.0 / a.v); }
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.v);
  return detail::record(s, a, 0.5 / s);
}
inline Var tanh(const Var& a) {
  const double t = std::tanh(a.v);
  return detail::record(t, a, 1.0 - t * t);
}
inline Var sigmoid(const Var& a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return detail::record(s, a, s * (1.0 - s));
}
// Tie goes to the first argument (right-continuous subgradient).
inline Var max(const Var& a, const Var& b) {
  return a.v >= b.v ? detail::record(a.v, a, 1.0) : detail::record(b.v, b, 1.0);
}

inline double value(const Var& a) { return a.v; }
inline double value(double a) { return a; }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace gfk

#endif
