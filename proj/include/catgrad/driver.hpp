#pragma once

// High-level pipelines tying the surface language to the derivative
// carriers: compile source text once, then evaluate, extract Jacobians in
// any mode, take gradients, verify against finite differences, or run
// gradient descent. This is the layer the command-line tool calls into.

#include <cstdint>
#include <string>
#include <vector>

#include "catgrad/expr.hpp"
#include "catgrad/linmap.hpp"

namespace catgrad {

struct Compiled {
  Shape dom, cod;
  TermPtr term;  // normalized
};

// parse + shape-check + translate + normalize. Throws LangError on bad
// source or a shape mismatch.
Compiled compile(const std::string& source, const Shape& arg);

// Interpretation in plain functions.
Value eval_plain(const Compiled& c, const Value& x);

// How to turn the derivative at a point into a dense matrix.
//
//   Forward      derivative in the right-associating carrier over additive
//                functions; columns read off by feeding domain basis vectors.
//   ReverseCont  derivative in the continuation carrier with scalar result;
//                row i is the functional "take coordinate i of the output"
//                pulled back through the chain, recovered via the dot
//                isomorphism.
//   ReverseDual  derivative carried directly as its reversal; row i is the
//                reversal applied to the i-th codomain basis vector.
//   Matrix       derivative built in the structural linear-map category and
//                converted to a dense grid.
enum class JacMode { Forward, ReverseCont, ReverseDual, Matrix };

const char* jac_mode_name(JacMode m);

DenseMatrix jacobian(const Compiled& c, const Value& x, JacMode mode);

// Reverse-mode gradient for scalar-codomain programs: the reversal applied
// to 1. Throws CatError when the codomain is not scalar.
Value gradient(const Compiled& c, const Value& x);

// Central differences, (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
DenseMatrix fd_jacobian(const Compiled& c, const Value& x, double h);

struct CheckReport {
  std::size_t trials = 0;
  double worst = 0.0;                // max relative error seen
  std::string worst_mode;            // mode it occurred in
  std::vector<double> worst_point;   // flattened point it occurred at
  bool pass(double tol) const { return worst <= tol; }
};

// At `trials` seeded random points in [-2,2]^dim, compares every mode's
// Jacobian entrywise to central differences under |ad - fd| / max(1, |fd|).
CheckReport check(const Compiled& c, std::size_t trials, double h,
                  std::uint64_t seed);

struct DescendReport {
  std::vector<double> objectives;  // objective after each accepted step
  Value x;                         // final point
  double grad_norm = 0.0;          // at the final point
  std::size_t steps = 0;
  bool converged = false;  // gradient norm reached tol
  bool diverged = false;   // objective left the finite range
};

// x <- x - eta * gradient(x) until the gradient 2-norm drops to tol or the
// iteration cap is hit. Scalar codomain required.
DescendReport descend(const Compiled& c, const Value& start, double eta,
                      std::size_t iters, double tol);

}  // namespace catgrad
