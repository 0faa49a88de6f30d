#pragma once

// Differentiation with a pluggable derivative category. A DFun pairs a
// computation with the morphism that is its derivative at the evaluation
// point: run(a) = (f(a), f'(a)), where f'(a) lives in the carried category k
// (additive functions, structural matrices, or one of the transformer
// categories in rad.hpp). The chain rule composes DFuns while evaluating
// each stage exactly once, which is what makes the scheme efficient: the
// primal value of an inner stage is shared between its own result and the
// derivative of the stage after it.

#include <functional>
#include <utility>
#include <vector>

#include "catgrad/category.hpp"
#include "catgrad/shape.hpp"

namespace catgrad {

struct DFun {
  Shape dom, cod;
  CatPtr k;  // category the derivative morphisms live in
  std::function<std::pair<Value, Morph>(const Value&)> run;
};

// run with a conformance check on the argument.
std::pair<Value, Morph> eval_d(const DFun& f, const Value& a);

// A linear function is its own derivative everywhere: the k-morphism is
// constant and the value part is evaluated directly.
DFun d_linear(CatPtr k, Shape dom, Shape cod,
              std::function<Value(const Value&)> f, Morph fk);

DFun d_id(const CatPtr& k, const Shape& a);
DFun d_compose(DFun g, DFun f);  // g after f; f runs once
DFun d_cross(DFun f, DFun g);
DFun d_fork(const DFun& f, const DFun& g);
DFun d_join(const DFun& f, const DFun& g);

DFun d_exl(const CatPtr& k, const Shape& a, const Shape& b);
DFun d_exr(const CatPtr& k, const Shape& a, const Shape& b);
DFun d_dup(const CatPtr& k, const Shape& a);
DFun d_inl(const CatPtr& k, const Shape& a, const Shape& b);
DFun d_inr(const CatPtr& k, const Shape& a, const Shape& b);
DFun d_jam(const CatPtr& k, const Shape& a);
DFun d_it(const CatPtr& k, const Shape& a);

DFun d_neg(const CatPtr& k);
DFun d_add(const CatPtr& k);
DFun d_mul(const CatPtr& k);
DFun d_sin(const CatPtr& k);
DFun d_cos(const CatPtr& k);
DFun d_exp(const CatPtr& k);
DFun d_const(const CatPtr& k, const Shape& dom, double c);

DFun d_cross_i(std::vector<DFun> fs);
DFun d_ex_i(const CatPtr& k, std::size_t n, const Shape& a, std::size_t i);
DFun d_repl_i(const CatPtr& k, std::size_t n, const Shape& a);
DFun d_in_i(const CatPtr& k, std::size_t n, const Shape& a, std::size_t i);
DFun d_jam_i(const CatPtr& k, std::size_t n, const Shape& a);
DFun d_fork_i(const std::vector<DFun>& fs);
DFun d_join_i(const std::vector<DFun>& fs);

}  // namespace catgrad
