#pragma once

// Derivative carriers that control composition order. Each category here
// wraps an inner category k of linear maps (AddFunCat or LinMapCat) and
// re-expresses every operation so that long chains of compositions get
// applied in the association that suits the mode:
//
//   ContCat   a morphism a -> b is carried as its action h |-> h . m on
//             "continuations" h : b -> r. Composition nests the actions in
//             reversed order, so a whole pipeline collapses into one
//             left-to-right sweep from the result backwards: reverse mode.
//   DualCat   a morphism is carried as its reversal rev : b -> a. At the
//             matrix level this is transposition; a gradient falls out by
//             running rev on the unit scalar. No matrices are involved
//             unless the inner category uses them.
//   BeginCat  the mirror image of ContCat, acting on h : r -> a by
//             postcomposition, which right-associates chains: forward mode.
//
// ContCat with scalar result object converts into DualCat via the
// isomorphism between values and scalar-valued linear maps (dot_morph and
// undot_morph); as_dual performs that conversion.

#include <functional>

#include "catgrad/category.hpp"

namespace catgrad {

// Payload type shared by ContCat and BeginCat: a pure function between
// inner hom-sets.
using MorphFn = std::function<Morph(const Morph&)>;

class ContCat final : public Category {
 public:
  // A fresh carrier over `inner` with result object r. Morphisms from
  // different carrier instances do not mix, even for equal inner/r.
  static CatPtr over(CatPtr inner, Shape r);

  const CatPtr& inner() const { return inner_; }
  const Shape& result() const { return r_; }

  std::string name() const override;
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

 private:
  ContCat(CatPtr inner, Shape r);
  // Wraps a raw action with the runtime checks every continuation argument
  // must pass (inner category, domain = cod, codomain = r).
  Morph guarded(Shape dom, Shape cod, MorphFn raw) const;

  CatPtr inner_;
  Shape r_;
};

class DualCat final : public Category {
 public:
  static CatPtr over(CatPtr inner);
  // Wraps an inner morphism as the reversal of a carrier morphism: the
  // result runs from rev's codomain to rev's domain.
  static Morph of(const CatPtr& dual, Morph rev);

  const CatPtr& inner() const { return inner_; }

  std::string name() const override;
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

 private:
  explicit DualCat(CatPtr inner);
  Morph from_rev(Morph rev) const;

  CatPtr inner_;
};

class BeginCat final : public Category {
 public:
  static CatPtr over(CatPtr inner, Shape r);

  const CatPtr& inner() const { return inner_; }
  const Shape& result() const { return r_; }

  std::string name() const override;
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

 private:
  BeginCat(CatPtr inner, Shape r);
  // Mirror of ContCat::guarded: arguments run r -> dom.
  Morph guarded(Shape dom, Shape cod, MorphFn raw) const;

  CatPtr inner_;
  Shape r_;
};

// Embed an inner morphism into a carrier. cont_wrap gives the action
// h |-> h . f, begin_wrap gives h |-> f . h; both are homomorphisms for
// every operation the carriers implement.
Morph cont_wrap(const CatPtr& cont, const Morph& f);
Morph begin_wrap(const CatPtr& begin, const Morph& f);

// Run a carrier morphism's stored action on one inner morphism. For
// cont_trans, h : cod(m) -> r; for begin_trans, h : r -> dom(m). Passing
// the inner identity recovers the represented morphism.
Morph cont_trans(const Morph& m, const Morph& h);
Morph begin_trans(const Morph& m, const Morph& h);

// The reversal stored inside a DualCat morphism.
const Morph& dual_rev(const Morph& m);

// One half of the isomorphism between values of shape a and inner
// morphisms a -> R: dot_morph(u) sends w to the dot product <u, w>,
// assembled structurally (scale at scalar leaves, join over pairs and
// vectors). undot_morph inverts it by probing m with basis vectors, which
// is exact because one-hot inputs multiply by 1 and add 0.
Morph dot_morph(const CatPtr& k, const Shape& a, const Value& u);
Morph dot_morph(const CatPtr& k, const Value& u);
Value undot_morph(const Morph& m);

// Convert a ContCat morphism with scalar result object into the DualCat
// carrier over the same inner category, conjugating its action with the
// dot isomorphism. The reversal is realized as a closure over additive
// functions and as a materialized matrix over the matrix category.
Morph as_dual(const CatPtr& dual, const Morph& m);

}  // namespace catgrad
