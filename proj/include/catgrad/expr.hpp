#pragma once

// The surface language and its translation to categorical combinators.
//
// A program is a single lambda `\pat -> body` over one argument pattern.
// Bodies are first-order arithmetic: scalars with + - * and sin/cos/exp/neg,
// pairs with (e, e)/fst/snd, fixed-length vectors with [e, ...]/e.i/sum, and
// let-bindings. Translation is environment-passing: the context is the
// argument pattern, variables compile to projection chains, pairing compiles
// to fork, and let extends the context with fork(id, bound). The result is a
// CatTerm, a combinator tree annotated with shapes at every node, which can
// then be interpreted in any Category (plain functions for evaluation) or as
// a DFun over a chosen derivative category.

#include <memory>
#include <string>
#include <vector>

#include "catgrad/category.hpp"
#include "catgrad/gad.hpp"
#include "catgrad/shape.hpp"

namespace catgrad {

// Parse, scope, and shape errors carry a 1-based source position; what() is
// "<line>:<col>: <message>" so diagnostics print directly.
struct LangError : CatError {
  LangError(const std::string& msg, int line, int col)
      : CatError(std::to_string(line) + ":" + std::to_string(col) + ": " +
                 msg),
        line(line),
        col(col) {}
  int line, col;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind {
    Var,
    Lit,
    Pair,
    Fst,
    Snd,
    Neg,
    Add,
    Sub,
    Mul,
    Sin,
    Cos,
    Exp,
    Let,
    Vec,
    Idx,
    Sum
  };
  Kind kind;
  int line = 0, col = 0;
  std::string name;           // Var; the binder for Let
  double lit = 0.0;           // Lit
  std::size_t index = 0;      // Idx
  std::vector<ExprPtr> kids;  // operands; Let stores {bound, body}
};

ExprPtr mk_var(std::string name);
ExprPtr mk_lit(double v);
ExprPtr mk_pair(ExprPtr a, ExprPtr b);
ExprPtr mk_fst(ExprPtr e);
ExprPtr mk_snd(ExprPtr e);
ExprPtr mk_neg(ExprPtr e);
ExprPtr mk_add(ExprPtr a, ExprPtr b);
ExprPtr mk_sub(ExprPtr a, ExprPtr b);
ExprPtr mk_mul(ExprPtr a, ExprPtr b);
ExprPtr mk_sin(ExprPtr e);
ExprPtr mk_cos(ExprPtr e);
ExprPtr mk_exp(ExprPtr e);
ExprPtr mk_let(std::string name, ExprPtr bound, ExprPtr body);
ExprPtr mk_vec(std::vector<ExprPtr> items);
ExprPtr mk_idx(ExprPtr e, std::size_t i);
ExprPtr mk_sum(ExprPtr e);

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct Pattern {
  enum class Kind { Var, Pair, Vec, Unit };
  Kind kind;
  int line = 0, col = 0;
  std::string name;              // Var
  std::vector<PatternPtr> kids;  // Pair: 2, Vec: n
};

PatternPtr mk_pvar(std::string name);
PatternPtr mk_ppair(PatternPtr a, PatternPtr b);
PatternPtr mk_pvec(std::vector<PatternPtr> items);
PatternPtr mk_punit();

struct Lambda {
  PatternPtr param;
  ExprPtr body;
};

// Grammar:
//   program  := '\' pattern '->' expr
//   pattern  := name | '(' ')' | '(' pattern ',' pattern ')'
//             | '[' pattern (',' pattern)* ']'
//   expr     := sum of products of prefix applications; 'let x = e in e' and
//               tuple/vector literals parse as primaries, projection 'e.i'
//               as a postfix. sin cos exp neg fst snd sum apply by prefix.
// Subtraction desugars to Add(a, Neg(b)) during parsing. The result is scope
// checked (unbound variables and nonlinear patterns are errors) and
// alpha-normalized: a let that would shadow an existing binding is renamed
// apart, so downstream passes never see two binders with the same name.
Lambda parse_lambda(const std::string& text);

// Result shape of the body when the parameter has shape arg. Throws
// LangError at the offending subterm: the pattern must match arg
// structurally, numeric operators take scalars, fst/snd take pairs, e.i and
// sum take vectors.
Shape infer_shape(const Lambda& fn, const Shape& arg);

struct CatTerm;
using TermPtr = std::shared_ptr<const CatTerm>;

// A combinator tree. Every node carries its domain and codomain, so terms
// are well-composed by construction; the t_* builders below check.
struct CatTerm {
  enum class Kind {
    Id,
    Compose,  // kids {g, f}, g after f
    Cross,    // kids {f, g}
    Fork,     // kids {f, g}
    Exl,
    Exr,
    Dup,
    AddC,
    MulC,
    NegC,
    SinC,
    CosC,
    ExpC,
    Const,   // constant function, value cval
    CrossI,  // kids, one per slot
    ForkI,
    ExI,    // slot index
    ReplI,  // cod is [n x dom]
    JamI,
    It
  };
  Kind kind;
  Shape dom, cod;
  std::vector<TermPtr> kids;
  Value cval;  // Const only
  std::size_t index = 0;
};

TermPtr t_id(const Shape& a);
TermPtr t_compose(TermPtr g, TermPtr f);
TermPtr t_cross(TermPtr f, TermPtr g);
TermPtr t_fork(TermPtr f, TermPtr g);
TermPtr t_exl(const Shape& a, const Shape& b);
TermPtr t_exr(const Shape& a, const Shape& b);
TermPtr t_dup(const Shape& a);
TermPtr t_add();
TermPtr t_mul();
TermPtr t_neg();
TermPtr t_sin();
TermPtr t_cos();
TermPtr t_exp();
TermPtr t_const(const Shape& dom, Value v);
TermPtr t_cross_i(std::vector<TermPtr> fs);
TermPtr t_fork_i(std::vector<TermPtr> fs);
TermPtr t_ex_i(std::size_t n, const Shape& a, std::size_t i);
TermPtr t_repl_i(std::size_t n, const Shape& a);
TermPtr t_jam_i(std::size_t n, const Shape& a);
TermPtr t_it(const Shape& a);

bool term_equal(const TermPtr& a, const TermPtr& b);

// Structural translation with no simplification; precondition is a clean
// infer_shape run on the same argument shape.
TermPtr translate(const Lambda& fn, const Shape& arg);

// Rewrites, to fixpoint, with composition kept right-nested:
//   id . f = f . id -> f
//   exl . (f fork g) -> f          exr . (f fork g) -> g
//   (exl fork exr) -> id
//   (f cross g) . (h fork k) -> (f . h) fork (g . k)
//   (f . h) fork (g . h) -> (f fork g) . h    (shared tail factored out)
// Semantics-preserving: interpretations before and after agree pointwise.
TermPtr normalize(const TermPtr& t);

// translate then normalize.
TermPtr to_cat(const Lambda& fn, const Shape& arg);

// Deterministic rendering. Composition prints infix with U+2218, fork with
// U+25B3, cross with U+00D7; fork and cross bind looser than composition and
// parenthesize their operands when nested.
std::string show_cat(const TermPtr& t);

// Fold the term into a morphism of k. Operations the category lacks surface
// as CatError from the category itself, naming the instance.
Morph interpret(const TermPtr& t, const CatPtr& k);

// Fold the term into a differentiable function whose derivatives live in k.
DFun interpret_d(const TermPtr& t, const CatPtr& k);

}  // namespace catgrad
