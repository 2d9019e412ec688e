#ifndef GFK_IRREPS_HPP
#define GFK_IRREPS_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "gfk/errors.hpp"

namespace gfk {

inline constexpr int kDefaultLMax = 2;
inline constexpr int kMaxCachedDegree = 4;  // Clebsch-Gordan tables go this far

enum class Parity : int { even = +1, odd = -1 };

inline Parity operator*(Parity a, Parity b) {
  return static_cast<int>(a) * static_cast<int>(b) > 0 ? Parity::even : Parity::odd;
}

// Natural parity of the spherical harmonic of a given degree: (-1)^l.
inline Parity sh_parity(int degree) {
  return degree % 2 == 0 ? Parity::even : Parity::odd;
}

// One irreducible representation label: degree l and parity, e.g. 0e, 1o.
struct IrrepSpec {
  int degree = 0;
  Parity parity = Parity::even;

  IrrepSpec() = default;
  IrrepSpec(int l, Parity p) : degree(l), parity(p) {
    if (l < 0) throw ContractError("irrep degree must be non-negative");
  }

  int dim() const { return 2 * degree + 1; }

  bool operator==(const IrrepSpec& o) const {
    return degree == o.degree && parity == o.parity;
  }
  bool operator<(const IrrepSpec& o) const {
    if (degree != o.degree) return degree < o.degree;
    return static_cast<int>(parity) > static_cast<int>(o.parity);  // even first
  }

  std::string str() const {
    return std::to_string(degree) + (parity == Parity::even ? "e" : "o");
  }
};

inline const IrrepSpec kScalar{0, Parity::even};  // 0e
inline const IrrepSpec kVector{1, Parity::odd};   // 1o

// Ordered multiset of irreps with multiplicities; the signature of a tensor.
struct Signature {
  struct Entry {
    IrrepSpec irrep;
    int multiplicity = 0;
  };
  std::vector<Entry> entries;

  Signature() = default;
  Signature(std::initializer_list<Entry> e) : entries(e) { canonicalize(); }

  void add(const IrrepSpec& ir, int mult) {
    if (mult <= 0) throw ContractError("multiplicity must be positive");
    entries.push_back({ir, mult});
    canonicalize();
  }

  void canonicalize() {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.irrep < b.irrep; });
    // merge duplicates
    std::vector<Entry> merged;
    for (const Entry& e : entries) {
      if (!merged.empty() && merged.back().irrep == e.irrep)
        merged.back().multiplicity += e.multiplicity;
      else
        merged.push_back(e);
    }
    entries = std::move(merged);
  }

  // Total coefficient count.
  int size() const {
    int n = 0;
    for (const Entry& e : entries) n += e.multiplicity * e.irrep.dim();
    return n;
  }

  bool operator==(const Signature& o) const {
    if (entries.size() != o.entries.size()) return false;
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (!(entries[i].irrep == o.entries[i].irrep) ||
          entries[i].multiplicity != o.entries[i].multiplicity)
        return false;
    return true;
  }

  std::string str() const {
    std::string s;
    for (const Entry& e : entries) {
      if (!s.empty()) s += "+";
      s += std::to_string(e.multiplicity) + "x" + e.irrep.str();
    }
    return s;
  }
};

// Typed collection of irrep blocks; the currency of every equivariant layer.
// Block order is canonical (by degree, then parity), so two tensors of the
// same signature are comparable elementwise.
template <class T>
struct GeometricTensorT {
  struct Block {
    IrrepSpec irrep;
    int multiplicity = 0;
    std::vector<T> coeffs;  // multiplicity x (2l+1), row-major
  };
  std::vector<Block> blocks;

  GeometricTensorT() = default;

  // Zero tensor of a given signature.
  static GeometricTensorT zeros(const Signature& sig) {
    GeometricTensorT t;
    for (const auto& e : sig.entries)
      t.blocks.push_back({e.irrep, e.multiplicity,
                          std::vector<T>(static_cast<std::size_t>(e.multiplicity * e.irrep.dim()), T(0.0))});
    return t;
  }

  Signature signature() const {
    Signature s;
    for (const Block& b : blocks) s.entries.push_back({b.irrep, b.multiplicity});
    return s;
  }

  Block* find(const IrrepSpec& ir) {
    for (Block& b : blocks)
      if (b.irrep == ir) return &b;
    return nullptr;
  }
  const Block* find(const IrrepSpec& ir) const {
    for (const Block& b : blocks)
      if (b.irrep == ir) return &b;
    return nullptr;
  }

  // Coefficient (channel c, component m+l) of an irrep block.
  T& at(const IrrepSpec& ir, int channel, int m) {
    Block* b = find(ir);
    if (!b) throw ContractError("no block " + ir.str() + " in tensor");
    return b->coeffs[static_cast<std::size_t>(channel * ir.dim() + (m + ir.degree))];
  }
  const T& at(const IrrepSpec& ir, int channel, int m) const {
    const Block* b = find(ir);
    if (!b) throw ContractError("no block " + ir.str() + " in tensor");
    return b->coeffs[static_cast<std::size_t>(channel * ir.dim() + (m + ir.degree))];
  }

  void check_invariants() const {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Block& b = blocks[i];
      if (b.coeffs.size() != static_cast<std::size_t>(b.multiplicity * b.irrep.dim()))
        throw ContractError("block " + b.irrep.str() + " coefficient count mismatch");
      if (i > 0 && !(blocks[i - 1].irrep < b.irrep))
        throw ContractError("blocks out of canonical order");
    }
  }
};

using GeometricTensor = GeometricTensorT<double>;

}  // namespace gfk

#endif
