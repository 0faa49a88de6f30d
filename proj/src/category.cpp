#include "catgrad/category.hpp"

#include <cmath>

namespace catgrad {

void Category::check_mine(const Morph& m, const char* op) const {
  if (!m.valid())
    throw CatError(name() + ": " + op + " given an empty morphism");
  if (m.cat().get() != this)
    throw CatError(name() + ": " + op + " given a morphism from category " +
                   m.cat()->name());
}

void Category::check_compose(const Morph& g, const Morph& f) const {
  check_mine(g, "compose");
  check_mine(f, "compose");
  if (!(f.cod() == g.dom()))
    throw CatError(name() + ": compose type mismatch, inner shapes " +
                   show_shape(f.cod()) + " and " + show_shape(g.dom()));
}

Morph Category::cross(const Morph&, const Morph&) const { unsupported("cross"); }
Morph Category::exl(const Shape&, const Shape&) const { unsupported("exl"); }
Morph Category::exr(const Shape&, const Shape&) const { unsupported("exr"); }
Morph Category::dup(const Shape&) const { unsupported("dup"); }
Morph Category::inl(const Shape&, const Shape&) const { unsupported("inl"); }
Morph Category::inr(const Shape&, const Shape&) const { unsupported("inr"); }
Morph Category::jam(const Shape&) const { unsupported("jam"); }
Morph Category::it(const Shape&) const { unsupported("it"); }
Morph Category::ti(const Shape&) const { unsupported("ti"); }
Morph Category::hom_zero(const Shape&, const Shape&) const {
  unsupported("hom_zero");
}
Morph Category::hom_add(const Morph&, const Morph&) const {
  unsupported("hom_add");
}
Morph Category::scale(double) const { unsupported("scale"); }
Morph Category::cross_i(const std::vector<Morph>&) const {
  unsupported("cross_i");
}
Morph Category::ex_i(std::size_t, const Shape&, std::size_t) const {
  unsupported("ex_i");
}
Morph Category::repl_i(std::size_t, const Shape&) const {
  unsupported("repl_i");
}
Morph Category::in_i(std::size_t, const Shape&, std::size_t) const {
  unsupported("in_i");
}
Morph Category::jam_i(std::size_t, const Shape&) const {
  unsupported("jam_i");
}
Morph Category::neg_c() const { unsupported("neg_c"); }
Morph Category::add_c() const { unsupported("add_c"); }
Morph Category::mul_c() const { unsupported("mul_c"); }
Morph Category::sin_c() const { unsupported("sin_c"); }
Morph Category::cos_c() const { unsupported("cos_c"); }
Morph Category::exp_c() const { unsupported("exp_c"); }
Morph Category::const_c(const Shape&, double) const { unsupported("const_c"); }
Value Category::apply(const Morph&, const Value&) const {
  unsupported("apply");
}

Morph fork(const Morph& f, const Morph& g) {
  if (!(f.dom() == g.dom()))
    throw CatError("fork: domains disagree, " + show_shape(f.dom()) +
                   " and " + show_shape(g.dom()));
  const auto& k = f.cat();
  return k->compose(k->cross(f, g), k->dup(f.dom()));
}

Morph join(const Morph& f, const Morph& g) {
  if (!(f.cod() == g.cod()))
    throw CatError("join: codomains disagree, " + show_shape(f.cod()) +
                   " and " + show_shape(g.cod()));
  const auto& k = f.cat();
  return k->compose(k->jam(f.cod()), k->cross(f, g));
}

std::pair<Morph, Morph> unfork(const Morph& h) {
  if (!h.cod().is_pair())
    throw CatError("unfork: codomain is not a pair: " + show_shape(h.cod()));
  const auto& k = h.cat();
  const Shape& c = h.cod().fst();
  const Shape& d = h.cod().snd();
  return {k->compose(k->exl(c, d), h), k->compose(k->exr(c, d), h)};
}

std::pair<Morph, Morph> unjoin(const Morph& h) {
  if (!h.dom().is_pair())
    throw CatError("unjoin: domain is not a pair: " + show_shape(h.dom()));
  const auto& k = h.cat();
  const Shape& a = h.dom().fst();
  const Shape& b = h.dom().snd();
  return {k->compose(h, k->inl(a, b)), k->compose(h, k->inr(a, b))};
}

Morph fork_i(const std::vector<Morph>& fs) {
  if (fs.empty()) throw CatError("fork_i: no components");
  const auto& k = fs[0].cat();
  return k->compose(k->cross_i(fs), k->repl_i(fs.size(), fs[0].dom()));
}

Morph join_i(const std::vector<Morph>& fs) {
  if (fs.empty()) throw CatError("join_i: no components");
  const auto& k = fs[0].cat();
  return k->compose(k->jam_i(fs.size(), fs[0].cod()), k->cross_i(fs));
}

std::vector<Morph> unfork_i(const Morph& h) {
  if (!h.cod().is_vec())
    throw CatError("unfork_i: codomain is not a vector: " +
                   show_shape(h.cod()));
  const auto& k = h.cat();
  std::size_t n = h.cod().len();
  std::vector<Morph> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(k->compose(k->ex_i(n, h.cod().elem(), i), h));
  return out;
}

std::vector<Morph> unjoin_i(const Morph& h) {
  if (!h.dom().is_vec())
    throw CatError("unjoin_i: domain is not a vector: " + show_shape(h.dom()));
  const auto& k = h.cat();
  std::size_t n = h.dom().len();
  std::vector<Morph> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(k->compose(h, k->in_i(n, h.dom().elem(), i)));
  return out;
}

namespace {

using Fn = std::function<Value(const Value&)>;

Morph fn_morph(CatPtr cat, Shape dom, Shape cod, Fn fn) {
  return Morph(std::move(dom), std::move(cod), std::move(cat),
               std::make_shared<const Fn>(std::move(fn)));
}

const Fn& fn_of(const Morph& m) { return m.payload_as<Fn>(); }

Shape scalar2() { return Shape::pair(Shape::scalar(), Shape::scalar()); }

// The function-shaped categories share every implementation that does not
// touch zeros or addition.
Morph fn_id(CatPtr cat, const Shape& a) {
  return fn_morph(std::move(cat), a, a, [](const Value& v) { return v; });
}

Morph fn_compose(CatPtr cat, const Morph& g, const Morph& f) {
  return fn_morph(std::move(cat), f.dom(), g.cod(), [g, f](const Value& v) {
    return fn_of(g)(fn_of(f)(v));
  });
}

Morph fn_cross(CatPtr cat, const Morph& f, const Morph& g) {
  return fn_morph(std::move(cat), Shape::pair(f.dom(), g.dom()),
                  Shape::pair(f.cod(), g.cod()), [f, g](const Value& v) {
                    return Value::pair(fn_of(f)(v.fst()), fn_of(g)(v.snd()));
                  });
}

Morph fn_exl(CatPtr cat, const Shape& a, const Shape& b) {
  return fn_morph(std::move(cat), Shape::pair(a, b), a,
                  [](const Value& v) { return v.fst(); });
}

Morph fn_exr(CatPtr cat, const Shape& a, const Shape& b) {
  return fn_morph(std::move(cat), Shape::pair(a, b), b,
                  [](const Value& v) { return v.snd(); });
}

Morph fn_dup(CatPtr cat, const Shape& a) {
  return fn_morph(std::move(cat), a, Shape::pair(a, a),
                  [](const Value& v) { return Value::pair(v, v); });
}

Morph fn_it(CatPtr cat, const Shape& a) {
  return fn_morph(std::move(cat), a, Shape::unit(),
                  [](const Value&) { return Value::unit(); });
}

Morph fn_cross_i(CatPtr cat, const std::string& catname,
                 const std::vector<Morph>& fs) {
  if (fs.empty()) throw CatError(catname + ": cross_i with no components");
  const Shape& a = fs[0].dom();
  const Shape& b = fs[0].cod();
  for (const Morph& f : fs)
    if (!(f.dom() == a) || !(f.cod() == b))
      throw CatError(catname + ": cross_i components must share one shape");
  std::size_t n = fs.size();
  return fn_morph(std::move(cat), Shape::vec(n, a), Shape::vec(n, b),
                  [fs](const Value& v) {
                    std::vector<Value> out;
                    out.reserve(fs.size());
                    for (std::size_t i = 0; i < fs.size(); ++i)
                      out.push_back(fn_of(fs[i])(v.items()[i]));
                    return Value::vec(std::move(out));
                  });
}

Morph fn_ex_i(CatPtr cat, const std::string& catname, std::size_t n,
              const Shape& a, std::size_t i) {
  if (i >= n)
    throw CatError(catname + ": ex_i index " + std::to_string(i) +
                   " out of range for length " + std::to_string(n));
  return fn_morph(std::move(cat), Shape::vec(n, a), a,
                  [i](const Value& v) { return v.items()[i]; });
}

Morph fn_repl_i(CatPtr cat, std::size_t n, const Shape& a) {
  return fn_morph(std::move(cat), a, Shape::vec(n, a), [n](const Value& v) {
    return Value::vec(std::vector<Value>(n, v));
  });
}

Morph fn_jam_i(CatPtr cat, std::size_t n, const Shape& a) {
  return fn_morph(std::move(cat), Shape::vec(n, a), a, [a](const Value& v) {
    Value acc = zero_value(a);
    for (const Value& item : v.items()) acc = value_add(acc, item);
    return acc;
  });
}

Value fn_apply(const Category& cat, const Morph& f, const Value& a) {
  if (!conforms(a, f.dom()))
    throw CatError(cat.name() + ": argument does not conform to domain " +
                   show_shape(f.dom()));
  return fn_of(f)(a);
}

Morph fn_scalar_op(CatPtr cat, double (*op)(double)) {
  return fn_morph(std::move(cat), Shape::scalar(), Shape::scalar(),
                  [op](const Value& v) { return Value::scalar(op(v.num())); });
}

}  // namespace

CatPtr FnCat::instance() {
  static const CatPtr cat(new FnCat());
  return cat;
}

Morph FnCat::lift(Shape dom, Shape cod, std::function<Value(const Value&)> fn) {
  return fn_morph(instance(), std::move(dom), std::move(cod), std::move(fn));
}

Morph FnCat::id(const Shape& a) const { return fn_id(shared_from_this(), a); }

Morph FnCat::compose(const Morph& g, const Morph& f) const {
  check_compose(g, f);
  return fn_compose(shared_from_this(), g, f);
}

Morph FnCat::cross(const Morph& f, const Morph& g) const {
  check_mine(f, "cross");
  check_mine(g, "cross");
  return fn_cross(shared_from_this(), f, g);
}

Morph FnCat::exl(const Shape& a, const Shape& b) const {
  return fn_exl(shared_from_this(), a, b);
}

Morph FnCat::exr(const Shape& a, const Shape& b) const {
  return fn_exr(shared_from_this(), a, b);
}

Morph FnCat::dup(const Shape& a) const { return fn_dup(shared_from_this(), a); }

Morph FnCat::it(const Shape& a) const { return fn_it(shared_from_this(), a); }

Morph FnCat::cross_i(const std::vector<Morph>& fs) const {
  for (const Morph& f : fs) check_mine(f, "cross_i");
  return fn_cross_i(shared_from_this(), name(), fs);
}

Morph FnCat::ex_i(std::size_t n, const Shape& a, std::size_t i) const {
  return fn_ex_i(shared_from_this(), name(), n, a, i);
}

Morph FnCat::repl_i(std::size_t n, const Shape& a) const {
  return fn_repl_i(shared_from_this(), n, a);
}

Morph FnCat::jam_i(std::size_t n, const Shape& a) const {
  return fn_jam_i(shared_from_this(), n, a);
}

Morph FnCat::scale(double c) const {
  return fn_morph(shared_from_this(), Shape::scalar(), Shape::scalar(),
                  [c](const Value& v) { return Value::scalar(c * v.num()); });
}

Morph FnCat::neg_c() const {
  return fn_scalar_op(shared_from_this(), [](double x) { return -x; });
}

Morph FnCat::add_c() const {
  return fn_morph(shared_from_this(), scalar2(), Shape::scalar(),
                  [](const Value& v) {
                    return Value::scalar(v.fst().num() + v.snd().num());
                  });
}

Morph FnCat::mul_c() const {
  return fn_morph(shared_from_this(), scalar2(), Shape::scalar(),
                  [](const Value& v) {
                    return Value::scalar(v.fst().num() * v.snd().num());
                  });
}

Morph FnCat::sin_c() const {
  return fn_scalar_op(shared_from_this(), [](double x) { return std::sin(x); });
}

Morph FnCat::cos_c() const {
  return fn_scalar_op(shared_from_this(), [](double x) { return std::cos(x); });
}

Morph FnCat::exp_c() const {
  return fn_scalar_op(shared_from_this(), [](double x) { return std::exp(x); });
}

Morph FnCat::const_c(const Shape& dom, double c) const {
  return fn_morph(shared_from_this(), dom, Shape::scalar(),
                  [c](const Value&) { return Value::scalar(c); });
}

Value FnCat::apply(const Morph& f, const Value& a) const {
  check_mine(f, "apply");
  return fn_apply(*this, f, a);
}

CatPtr AddFunCat::instance() {
  static const CatPtr cat(new AddFunCat());
  return cat;
}

Morph AddFunCat::lift(Shape dom, Shape cod,
                      std::function<Value(const Value&)> fn) {
  return fn_morph(instance(), std::move(dom), std::move(cod), std::move(fn));
}

Morph AddFunCat::id(const Shape& a) const {
  return fn_id(shared_from_this(), a);
}

Morph AddFunCat::compose(const Morph& g, const Morph& f) const {
  check_compose(g, f);
  return fn_compose(shared_from_this(), g, f);
}

Morph AddFunCat::cross(const Morph& f, const Morph& g) const {
  check_mine(f, "cross");
  check_mine(g, "cross");
  return fn_cross(shared_from_this(), f, g);
}

Morph AddFunCat::exl(const Shape& a, const Shape& b) const {
  return fn_exl(shared_from_this(), a, b);
}

Morph AddFunCat::exr(const Shape& a, const Shape& b) const {
  return fn_exr(shared_from_this(), a, b);
}

Morph AddFunCat::dup(const Shape& a) const {
  return fn_dup(shared_from_this(), a);
}

Morph AddFunCat::inl(const Shape& a, const Shape& b) const {
  return fn_morph(shared_from_this(), a, Shape::pair(a, b),
                  [b](const Value& v) {
                    return Value::pair(v, zero_value(b));
                  });
}

Morph AddFunCat::inr(const Shape& a, const Shape& b) const {
  return fn_morph(shared_from_this(), b, Shape::pair(a, b),
                  [a](const Value& v) {
                    return Value::pair(zero_value(a), v);
                  });
}

Morph AddFunCat::jam(const Shape& a) const {
  return fn_morph(shared_from_this(), Shape::pair(a, a), a,
                  [](const Value& v) { return value_add(v.fst(), v.snd()); });
}

Morph AddFunCat::it(const Shape& a) const {
  return fn_it(shared_from_this(), a);
}

Morph AddFunCat::ti(const Shape& a) const {
  return fn_morph(shared_from_this(), Shape::unit(), a,
                  [a](const Value&) { return zero_value(a); });
}

Morph AddFunCat::hom_zero(const Shape& a, const Shape& b) const {
  return fn_morph(shared_from_this(), a, b,
                  [b](const Value&) { return zero_value(b); });
}

Morph AddFunCat::hom_add(const Morph& f, const Morph& g) const {
  check_mine(f, "hom_add");
  check_mine(g, "hom_add");
  if (!(f.dom() == g.dom()) || !(f.cod() == g.cod()))
    throw CatError("AddFun: hom_add needs morphisms of one type");
  return fn_morph(shared_from_this(), f.dom(), f.cod(), [f, g](const Value& v) {
    return value_add(fn_of(f)(v), fn_of(g)(v));
  });
}

Morph AddFunCat::scale(double c) const {
  return fn_morph(shared_from_this(), Shape::scalar(), Shape::scalar(),
                  [c](const Value& v) { return Value::scalar(c * v.num()); });
}

Morph AddFunCat::cross_i(const std::vector<Morph>& fs) const {
  for (const Morph& f : fs) check_mine(f, "cross_i");
  return fn_cross_i(shared_from_this(), name(), fs);
}

Morph AddFunCat::ex_i(std::size_t n, const Shape& a, std::size_t i) const {
  return fn_ex_i(shared_from_this(), name(), n, a, i);
}

Morph AddFunCat::repl_i(std::size_t n, const Shape& a) const {
  return fn_repl_i(shared_from_this(), n, a);
}

Morph AddFunCat::in_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n)
    throw CatError("AddFun: in_i index " + std::to_string(i) +
                   " out of range for length " + std::to_string(n));
  return fn_morph(shared_from_this(), a, Shape::vec(n, a),
                  [n, a, i](const Value& v) {
                    std::vector<Value> items(n, zero_value(a));
                    items[i] = v;
                    return Value::vec(std::move(items));
                  });
}

Morph AddFunCat::jam_i(std::size_t n, const Shape& a) const {
  return fn_jam_i(shared_from_this(), n, a);
}

Value AddFunCat::apply(const Morph& f, const Value& a) const {
  check_mine(f, "apply");
  return fn_apply(*this, f, a);
}

}  // namespace catgrad
