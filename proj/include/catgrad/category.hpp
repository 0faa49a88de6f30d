#pragma once

// The category interface. A Morph is a typed arrow (domain shape, codomain
// shape) owned by some Category, which interprets an opaque payload. Three
// concrete value-level categories live here and in linmap.hpp:
//
//   FnCat      plain functions on values; carries the numeric primitives
//   AddFunCat  additive (linear) functions; has biproduct structure
//   LinMapCat  structural matrices (see linmap.hpp)
//
// plus the derivative-carrying wrappers in rad.hpp. Operations a category
// does not support throw CatError; notably plain functions have no binary
// coproduct structure (there is no sensible inl for arbitrary functions),
// while additive functions support the full vocabulary.

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catgrad/shape.hpp"

namespace catgrad {

struct CatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Category;
using CatPtr = std::shared_ptr<const Category>;

class Morph {
 public:
  Morph() = default;
  Morph(Shape dom, Shape cod, CatPtr cat, std::shared_ptr<const void> payload)
      : dom_(std::move(dom)),
        cod_(std::move(cod)),
        cat_(std::move(cat)),
        payload_(std::move(payload)) {}

  bool valid() const { return cat_ != nullptr; }
  const Shape& dom() const { return dom_; }
  const Shape& cod() const { return cod_; }
  const CatPtr& cat() const { return cat_; }

  template <class T>
  const T& payload_as() const {
    return *static_cast<const T*>(payload_.get());
  }

 private:
  Shape dom_, cod_;
  CatPtr cat_;
  std::shared_ptr<const void> payload_;
};

class Category : public std::enable_shared_from_this<Category> {
 public:
  virtual ~Category() = default;
  virtual std::string name() const = 0;

  virtual Morph id(const Shape& a) const = 0;
  // g after f; throws unless f.cod() == g.dom().
  virtual Morph compose(const Morph& g, const Morph& f) const = 0;
  // Parallel pairing (a,b) -> (c,d).
  virtual Morph cross(const Morph& f, const Morph& g) const;

  virtual Morph exl(const Shape& a, const Shape& b) const;
  virtual Morph exr(const Shape& a, const Shape& b) const;
  virtual Morph dup(const Shape& a) const;

  virtual Morph inl(const Shape& a, const Shape& b) const;
  virtual Morph inr(const Shape& a, const Shape& b) const;
  virtual Morph jam(const Shape& a) const;

  virtual Morph it(const Shape& a) const;  // a -> 1
  virtual Morph ti(const Shape& a) const;  // 1 -> a

  // Additive hom-set structure.
  virtual Morph hom_zero(const Shape& a, const Shape& b) const;
  virtual Morph hom_add(const Morph& f, const Morph& g) const;

  virtual Morph scale(double c) const;  // R -> R

  // Indexed (n-ary) product and coproduct structure over [n x a].
  virtual Morph cross_i(const std::vector<Morph>& fs) const;
  virtual Morph ex_i(std::size_t n, const Shape& a, std::size_t i) const;
  virtual Morph repl_i(std::size_t n, const Shape& a) const;
  virtual Morph in_i(std::size_t n, const Shape& a, std::size_t i) const;
  virtual Morph jam_i(std::size_t n, const Shape& a) const;

  // Numeric primitives; only the plain-function category has these.
  virtual Morph neg_c() const;
  virtual Morph add_c() const;
  virtual Morph mul_c() const;
  virtual Morph sin_c() const;
  virtual Morph cos_c() const;
  virtual Morph exp_c() const;
  virtual Morph const_c(const Shape& dom, double c) const;

  // Run a morphism on a value, for categories whose arrows are functions.
  virtual Value apply(const Morph& f, const Value& a) const;

 protected:
  Morph make(Shape dom, Shape cod, std::shared_ptr<const void> payload) const {
    return Morph(std::move(dom), std::move(cod), shared_from_this(),
                 std::move(payload));
  }

  [[noreturn]] void unsupported(const char* op) const {
    throw CatError(name() + ": unsupported operation " + op);
  }

  // Morphisms may only be interpreted by the category that created them.
  void check_mine(const Morph& m, const char* op) const;
  void check_compose(const Morph& g, const Morph& f) const;
};

// Derived combinators, valid in any category with the needed structure.
Morph fork(const Morph& f, const Morph& g);  // (f x g) . dup
Morph join(const Morph& f, const Morph& g);  // jam . (f x g)
std::pair<Morph, Morph> unfork(const Morph& h);  // h : a -> (c, d)
std::pair<Morph, Morph> unjoin(const Morph& h);  // h : (a, b) -> c

Morph fork_i(const std::vector<Morph>& fs);  // cross_i(fs) . repl_i
Morph join_i(const std::vector<Morph>& fs);  // jam_i . cross_i(fs)
std::vector<Morph> unfork_i(const Morph& h);  // h : a -> [n x b]
std::vector<Morph> unjoin_i(const Morph& h);  // h : [n x a] -> b

inline Value apply_morph(const Morph& f, const Value& v) {
  return f.cat()->apply(f, v);
}

// Plain functions between values. Cartesian, terminal, and numeric, but with
// no coproduct structure and no additive hom-sets: inl/inr/jam, in_i and
// hom_zero/hom_add throw. Indexed projection, replication, and summation
// (ex_i, repl_i, cross_i, jam_i) are provided; vector bookkeeping and
// summation are ordinary arithmetic that direct evaluation needs, whereas
// injections would have to invent zeros the way inl does.
class FnCat final : public Category {
 public:
  static CatPtr instance();
  static Morph lift(Shape dom, Shape cod,
                    std::function<Value(const Value&)> fn);

  std::string name() const override { return "Fn"; }
  Morph id(const Shape& a) const override;
  Morph compose(const Morph& g, const Morph& f) const override;
  Morph cross(const Morph& f, const Morph& g) const override;
  Morph exl(const Shape& a, const Shape& b) const override;
  Morph exr(const Shape& a, const Shape& b) const override;
  Morph dup(const Shape& a) const override;
  Morph it(const Shape& a) const override;

  Morph cross_i(const std::vector<Morph>& fs) const override;
  Morph ex_i(std::size_t n, const Shape& a, std::size_t i) const override;
  Morph repl_i(std::size_t n, const Shape& a) const override;
  Morph jam_i(std::size_t n, const Shape& a) const override;

  Morph scale(double c) const override;
  Morph neg_c() const override;
  Morph add_c() const override;
  Morph mul_c() const override;
  Morph sin_c() const override;
  Morph cos_c() const override;
  Morph exp_c() const override;
  Morph const_c(const Shape& dom, double c) const override;

  Value apply(const Morph& f, const Value& a) const override;

 private:
  FnCat() = default;
};

// Additive functions: value functions that are (by construction) linear, so
// the full biproduct vocabulary applies. The zero map provides ti and
// hom_zero, pointwise addition provides jam and hom_add. Linearity is a
// contract on lift, not something the type system checks; the test suites
// probe it.
class AddFunCat final : public Category {
 public:
  static CatPtr instance();
  static Morph lift(Shape dom, Shape cod,
                    std::function<Value(const Value&)> fn);

  std::string name() const override { return "AddFun"; }
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
  AddFunCat() = default;
};

}  // namespace catgrad
