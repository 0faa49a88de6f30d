#include "catgrad/gad.hpp"

#include <cmath>

namespace catgrad {

namespace {

[[noreturn]] void d_fail(const std::string& msg) {
  throw CatError("DFun: " + msg);
}

Shape scalar2() { return Shape::pair(Shape::scalar(), Shape::scalar()); }

void check_same_k(const DFun& f, const DFun& g, const char* op) {
  if (f.k.get() != g.k.get())
    d_fail(std::string(op) + ": operands carry different derivative categories");
}

}  // namespace

std::pair<Value, Morph> eval_d(const DFun& f, const Value& a) {
  if (!conforms(a, f.dom))
    d_fail("argument does not conform to domain " + show_shape(f.dom));
  return f.run(a);
}

DFun d_linear(CatPtr k, Shape dom, Shape cod,
              std::function<Value(const Value&)> f, Morph fk) {
  if (!(fk.dom() == dom) || !(fk.cod() == cod))
    d_fail("linear: derivative morphism shape disagrees with the function");
  auto run = [f = std::move(f), fk](const Value& a) {
    return std::make_pair(f(a), fk);
  };
  return {std::move(dom), std::move(cod), std::move(k), std::move(run)};
}

DFun d_id(const CatPtr& k, const Shape& a) {
  return d_linear(k, a, a, [](const Value& v) { return v; }, k->id(a));
}

DFun d_compose(DFun g, DFun f) {
  check_same_k(f, g, "compose");
  if (!(f.cod == g.dom))
    d_fail("compose type mismatch, inner shapes " + show_shape(f.cod) +
           " and " + show_shape(g.dom));
  CatPtr k = f.k;
  Shape dom = f.dom, cod = g.cod;
  auto run = [g = std::move(g), f = std::move(f), k](const Value& a) {
    auto [b, fd] = f.run(a);  // the one and only evaluation of f at a
    auto [c, gd] = g.run(b);
    return std::make_pair(std::move(c), k->compose(gd, fd));
  };
  return {std::move(dom), std::move(cod), std::move(k), std::move(run)};
}

DFun d_cross(DFun f, DFun g) {
  check_same_k(f, g, "cross");
  CatPtr k = f.k;
  Shape dom = Shape::pair(f.dom, g.dom);
  Shape cod = Shape::pair(f.cod, g.cod);
  auto run = [f = std::move(f), g = std::move(g), k](const Value& v) {
    auto [c, fd] = f.run(v.fst());
    auto [d, gd] = g.run(v.snd());
    return std::make_pair(Value::pair(std::move(c), std::move(d)),
                          k->cross(fd, gd));
  };
  return {std::move(dom), std::move(cod), std::move(k), std::move(run)};
}

DFun d_fork(const DFun& f, const DFun& g) {
  if (!(f.dom == g.dom)) d_fail("fork: domains disagree");
  return d_compose(d_cross(f, g), d_dup(f.k, f.dom));
}

DFun d_join(const DFun& f, const DFun& g) {
  if (!(f.cod == g.cod)) d_fail("join: codomains disagree");
  return d_compose(d_jam(f.k, f.cod), d_cross(f, g));
}

DFun d_exl(const CatPtr& k, const Shape& a, const Shape& b) {
  return d_linear(k, Shape::pair(a, b), a,
                  [](const Value& v) { return v.fst(); }, k->exl(a, b));
}

DFun d_exr(const CatPtr& k, const Shape& a, const Shape& b) {
  return d_linear(k, Shape::pair(a, b), b,
                  [](const Value& v) { return v.snd(); }, k->exr(a, b));
}

DFun d_dup(const CatPtr& k, const Shape& a) {
  return d_linear(k, a, Shape::pair(a, a),
                  [](const Value& v) { return Value::pair(v, v); },
                  k->dup(a));
}

DFun d_inl(const CatPtr& k, const Shape& a, const Shape& b) {
  return d_linear(k, a, Shape::pair(a, b),
                  [b](const Value& v) { return Value::pair(v, zero_value(b)); },
                  k->inl(a, b));
}

DFun d_inr(const CatPtr& k, const Shape& a, const Shape& b) {
  return d_linear(k, b, Shape::pair(a, b),
                  [a](const Value& v) { return Value::pair(zero_value(a), v); },
                  k->inr(a, b));
}

DFun d_jam(const CatPtr& k, const Shape& a) {
  return d_linear(k, Shape::pair(a, a), a,
                  [](const Value& v) { return value_add(v.fst(), v.snd()); },
                  k->jam(a));
}

DFun d_it(const CatPtr& k, const Shape& a) {
  return d_linear(k, a, Shape::unit(),
                  [](const Value&) { return Value::unit(); }, k->it(a));
}

DFun d_neg(const CatPtr& k) {
  return d_linear(k, Shape::scalar(), Shape::scalar(),
                  [](const Value& v) { return Value::scalar(-v.num()); },
                  k->scale(-1.0));
}

DFun d_add(const CatPtr& k) {
  return d_linear(
      k, scalar2(), Shape::scalar(),
      [](const Value& v) { return Value::scalar(v.fst().num() + v.snd().num()); },
      k->jam(Shape::scalar()));
}

DFun d_mul(const CatPtr& k) {
  auto run = [k](const Value& v) {
    double a = v.fst().num(), b = v.snd().num();
    // Product rule as a horizontal block: d(ab) = b da + a db.
    return std::make_pair(Value::scalar(a * b),
                          join(k->scale(b), k->scale(a)));
  };
  return {scalar2(), Shape::scalar(), k, std::move(run)};
}

DFun d_sin(const CatPtr& k) {
  auto run = [k](const Value& v) {
    double a = v.num();
    return std::make_pair(Value::scalar(std::sin(a)),
                          k->scale(std::cos(a)));
  };
  return {Shape::scalar(), Shape::scalar(), k, std::move(run)};
}

DFun d_cos(const CatPtr& k) {
  auto run = [k](const Value& v) {
    double a = v.num();
    return std::make_pair(Value::scalar(std::cos(a)),
                          k->scale(-std::sin(a)));
  };
  return {Shape::scalar(), Shape::scalar(), k, std::move(run)};
}

DFun d_exp(const CatPtr& k) {
  auto run = [k](const Value& v) {
    double e = std::exp(v.num());  // shared by value and derivative
    return std::make_pair(Value::scalar(e), k->scale(e));
  };
  return {Shape::scalar(), Shape::scalar(), k, std::move(run)};
}

DFun d_const(const CatPtr& k, const Shape& dom, double c) {
  Morph zero = k->hom_zero(dom, Shape::scalar());
  auto run = [c, zero](const Value&) {
    return std::make_pair(Value::scalar(c), zero);
  };
  return {dom, Shape::scalar(), k, std::move(run)};
}

DFun d_cross_i(std::vector<DFun> fs) {
  if (fs.empty()) d_fail("cross_i: no components");
  for (const DFun& f : fs) {
    check_same_k(fs[0], f, "cross_i");
    if (!(f.dom == fs[0].dom) || !(f.cod == fs[0].cod))
      d_fail("cross_i: components must share one type");
  }
  CatPtr k = fs[0].k;
  std::size_t n = fs.size();
  Shape dom = Shape::vec(n, fs[0].dom);
  Shape cod = Shape::vec(n, fs[0].cod);
  auto run = [fs = std::move(fs), k](const Value& v) {
    std::vector<Value> outs;
    std::vector<Morph> derivs;
    outs.reserve(fs.size());
    derivs.reserve(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      auto [b, d] = fs[i].run(v.items()[i]);
      outs.push_back(std::move(b));
      derivs.push_back(std::move(d));
    }
    return std::make_pair(Value::vec(std::move(outs)), k->cross_i(derivs));
  };
  return {std::move(dom), std::move(cod), std::move(k), std::move(run)};
}

DFun d_ex_i(const CatPtr& k, std::size_t n, const Shape& a, std::size_t i) {
  if (i >= n) d_fail("ex_i: index out of range");
  return d_linear(k, Shape::vec(n, a), a,
                  [i](const Value& v) { return v.items()[i]; },
                  k->ex_i(n, a, i));
}

DFun d_repl_i(const CatPtr& k, std::size_t n, const Shape& a) {
  return d_linear(
      k, a, Shape::vec(n, a),
      [n](const Value& v) { return Value::vec(std::vector<Value>(n, v)); },
      k->repl_i(n, a));
}

DFun d_in_i(const CatPtr& k, std::size_t n, const Shape& a, std::size_t i) {
  if (i >= n) d_fail("in_i: index out of range");
  return d_linear(k, a, Shape::vec(n, a),
                  [n, a, i](const Value& v) {
                    std::vector<Value> items(n, zero_value(a));
                    items[i] = v;
                    return Value::vec(std::move(items));
                  },
                  k->in_i(n, a, i));
}

DFun d_jam_i(const CatPtr& k, std::size_t n, const Shape& a) {
  return d_linear(k, Shape::vec(n, a), a,
                  [a](const Value& v) {
                    Value acc = zero_value(a);
                    for (const Value& item : v.items())
                      acc = value_add(acc, item);
                    return acc;
                  },
                  k->jam_i(n, a));
}

DFun d_fork_i(const std::vector<DFun>& fs) {
  if (fs.empty()) d_fail("fork_i: no components");
  return d_compose(d_cross_i(fs), d_repl_i(fs[0].k, fs.size(), fs[0].dom));
}

DFun d_join_i(const std::vector<DFun>& fs) {
  if (fs.empty()) d_fail("join_i: no components");
  return d_compose(d_jam_i(fs[0].k, fs.size(), fs[0].cod), d_cross_i(fs));
}

}  // namespace catgrad
