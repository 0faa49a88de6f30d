#pragma once

// Structural linear maps. A LinMap is a first-class matrix built from block
// combinators instead of an entry grid:
//
//   Zero         any zero map
//   Id           identity on a shape
//   Scale c      the 1x1 matrix [c]
//   Join(f, g)   horizontal juxtaposition  (a, b) -> c
//   Fork(f, g)   vertical juxtaposition    a -> (c, d)
//   JoinI(fs)    n-ary horizontal block    [n x a] -> b
//   ForkI(fs)    n-ary vertical block      a -> [n x b]
//
// Composition, addition, and transposition rewrite these blocks
// algebraically; dense extraction recovers the ordinary entry grid by basis
// application. LinMapCat exposes the representation as a category so the
// derivative machinery can target it directly.

#include <string>
#include <vector>

#include "catgrad/category.hpp"
#include "catgrad/shape.hpp"

namespace catgrad {

enum class LmTag { Zero, Id, Scale, Fork, Join, ForkI, JoinI };

class LinMap {
 public:
  LinMap() : LinMap(zero(Shape::unit(), Shape::unit())) {}

  static LinMap zero(Shape dom, Shape cod);
  static LinMap identity(Shape s);
  static LinMap scale(double c);
  static LinMap fork(LinMap f, LinMap g);    // shared domain
  static LinMap join(LinMap f, LinMap g);    // shared codomain
  static LinMap fork_i(std::vector<LinMap> fs);
  static LinMap join_i(std::vector<LinMap> fs);

  LmTag tag() const { return node_->tag; }
  const Shape& dom() const { return node_->dom; }
  const Shape& cod() const { return node_->cod; }
  double factor() const;                      // Scale only
  const LinMap& first() const;                // Fork/Join
  const LinMap& second() const;               // Fork/Join
  const std::vector<LinMap>& parts() const;   // ForkI/JoinI

 private:
  struct Node {
    LmTag tag;
    Shape dom, cod;
    double c = 0.0;
    std::vector<LinMap> kids;
  };
  explicit LinMap(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct DenseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;  // row major

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  // Rows newline separated, entries space separated, 17 significant digits.
  std::string to_text() const;
};

Value lm_apply(const LinMap& m, const Value& v);

// g after f, rewritten structurally. Zero absorbs, Id cancels, Scale fuses,
// Fork distributes over the right operand, Join over the left, and a Join
// meeting a Fork multiplies out blockwise into a sum.
LinMap lm_compose(const LinMap& g, const LinMap& f);

// Pointwise sum. Matching constructors add componentwise; mismatched
// constructors fall back to dense extraction and structural rebuilding.
LinMap lm_add(const LinMap& f, const LinMap& g);

// Swaps Join with Fork (and the indexed pair), reverses dom/cod.
LinMap lm_transpose(const LinMap& m);

DenseMatrix lm_to_dense(const LinMap& m);

// Canonical structural form of an entry grid: Join/JoinI splits mirror the
// domain shape, Fork/ForkI splits mirror the codomain, Scale at the leaves.
LinMap lm_from_dense(const Shape& dom, const Shape& cod, const DenseMatrix& m);

struct ChainPlan {
  unsigned long long cost = 0;
  std::string order;  // e.g. "((A1 A2) A3)"
};

// Minimum-cost association of a product of matrices whose sizes are
// dims[0] x dims[1], dims[1] x dims[2], ... Interval dynamic programming,
// ties broken toward the smallest split index.
ChainPlan chain_order(const std::vector<std::size_t>& dims);

// The category of structural linear maps.
class LinMapCat final : public Category {
 public:
  static CatPtr instance();
  static Morph lift(LinMap m);
  static const LinMap& linmap_of(const Morph& m);

  std::string name() const override { return "LinMap"; }
  Morph id(const Shape& a) const override;
  Morph compose(const Morph& g, const Morph& f) const override;
  Morph cross(const Morph& f, const Morph& g) const override;
  Morph exl(const Shape& a, const Shape& b) const override;
  Morph exr(const Shape& a, const Shape& b) const override;
  Morph dup(const Shape& a) const override;
  Morph inl(const Shape& a, const Shape& b) const override;
  Morph inr(const Shape& a, const Shape& b) const override;
  Morph jam(const Shape& a) const override;
  Morph it(const Shape& a) const override;
  Morph ti(const Shape& a) const override;
  Morph hom_zero(const Shape& a, const Shape& b) const override;
  Morph hom_add(const Morph& f, const Morph& g) const override;
  Morph scale(double c) const override;
  Morph cross_i(const std::vector<Morph>& fs) const override;
  Morph ex_i(std::size_t n, const Shape& a, std::size_t i) const override;
  Morph repl_i(std::size_t n, const Shape& a) const override;
  Morph in_i(std::size_t n, const Shape& a, std::size_t i) const override;
  Morph jam_i(std::size_t n, const Shape& a) const override;
  Value apply(const Morph& f, const Value& a) const override;

 private:
  LinMapCat() = default;
};

}  // namespace catgrad
