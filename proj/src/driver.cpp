#include "catgrad/driver.hpp"

#include <cmath>

#include "catgrad/gad.hpp"
#include "catgrad/rad.hpp"

namespace catgrad {

namespace {

// Shared by the modes that read the derivative back through AddFunCat.
Morph derivative_at(const Compiled& c, const Value& x, const CatPtr& k) {
  DFun f = interpret_d(c.term, k);
  return eval_d(f, x).second;
}

void fill_column(DenseMatrix& j, std::size_t col, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) j.at(i, col) = v[i];
}

void fill_row(DenseMatrix& j, std::size_t row, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) j.at(row, i) = v[i];
}

}  // namespace

Compiled compile(const std::string& source, const Shape& arg) {
  Lambda fn = parse_lambda(source);
  Compiled c;
  c.dom = arg;
  c.cod = infer_shape(fn, arg);
  c.term = to_cat(fn, arg);
  return c;
}

Value eval_plain(const Compiled& c, const Value& x) {
  return apply_morph(interpret(c.term, FnCat::instance()), x);
}

const char* jac_mode_name(JacMode m) {
  switch (m) {
    case JacMode::Forward:
      return "forward";
    case JacMode::ReverseCont:
      return "reverse-cont";
    case JacMode::ReverseDual:
      return "reverse-dual";
    case JacMode::Matrix:
      return "matrix";
  }
  return "?";
}

DenseMatrix jacobian(const Compiled& c, const Value& x, JacMode mode) {
  std::size_t rows = c.cod.dim(), cols = c.dom.dim();
  DenseMatrix j(rows, cols);
  auto add = AddFunCat::instance();
  switch (mode) {
    case JacMode::Forward: {
      CatPtr k = BeginCat::over(add, c.dom);
      Morph rep = begin_trans(derivative_at(c, x, k), add->id(c.dom));
      for (std::size_t col = 0; col < cols; ++col)
        fill_column(j, col,
                    flatten(apply_morph(rep, basis_value(c.dom, col))));
      return j;
    }
    case JacMode::ReverseCont: {
      CatPtr k = ContCat::over(add, Shape::scalar());
      Morph m = derivative_at(c, x, k);
      for (std::size_t row = 0; row < rows; ++row) {
        Morph take = dot_morph(add, basis_value(c.cod, row));
        fill_row(j, row, flatten(undot_morph(cont_trans(m, take))));
      }
      return j;
    }
    case JacMode::ReverseDual: {
      CatPtr k = DualCat::over(add);
      Morph rev = dual_rev(derivative_at(c, x, k));
      for (std::size_t row = 0; row < rows; ++row)
        fill_row(j, row,
                 flatten(apply_morph(rev, basis_value(c.cod, row))));
      return j;
    }
    case JacMode::Matrix: {
      Morph m = derivative_at(c, x, LinMapCat::instance());
      return lm_to_dense(LinMapCat::linmap_of(m));
    }
  }
  throw CatError("jacobian: unknown mode");
}

Value gradient(const Compiled& c, const Value& x) {
  if (!(c.cod == Shape::scalar()))
    throw CatError("gradient: codomain is " + show_shape(c.cod) +
                   ", expected R");
  CatPtr k = DualCat::over(AddFunCat::instance());
  Morph rev = dual_rev(derivative_at(c, x, k));
  return apply_morph(rev, Value::scalar(1.0));
}

DenseMatrix fd_jacobian(const Compiled& c, const Value& x, double h) {
  Morph m = interpret(c.term, FnCat::instance());
  std::vector<double> base = flatten(x);
  DenseMatrix j(c.cod.dim(), c.dom.dim());
  for (std::size_t col = 0; col < j.cols; ++col) {
    std::vector<double> lo = base, hi = base;
    hi[col] += h;
    lo[col] -= h;
    std::vector<double> fhi = flatten(apply_morph(m, unflatten(c.dom, hi)));
    std::vector<double> flo = flatten(apply_morph(m, unflatten(c.dom, lo)));
    for (std::size_t row = 0; row < j.rows; ++row)
      j.at(row, col) = (fhi[row] - flo[row]) / (2.0 * h);
  }
  return j;
}

CheckReport check(const Compiled& c, std::size_t trials, double h,
                  std::uint64_t seed) {
  SplitMix64 rng(seed);
  CheckReport r;
  r.trials = trials;
  const JacMode modes[] = {JacMode::Forward, JacMode::ReverseCont,
                           JacMode::ReverseDual, JacMode::Matrix};
  for (std::size_t t = 0; t < trials; ++t) {
    Value x = random_value(c.dom, rng, -2.0, 2.0);
    DenseMatrix fd = fd_jacobian(c, x, h);
    for (JacMode mode : modes) {
      DenseMatrix ad = jacobian(c, x, mode);
      for (std::size_t i = 0; i < fd.a.size(); ++i) {
        double rel =
            std::abs(ad.a[i] - fd.a[i]) / std::max(1.0, std::abs(fd.a[i]));
        if (rel > r.worst) {
          r.worst = rel;
          r.worst_mode = jac_mode_name(mode);
          r.worst_point = flatten(x);
        }
      }
    }
  }
  return r;
}

DescendReport descend(const Compiled& c, const Value& start, double eta,
                      std::size_t iters, double tol) {
  DescendReport r;
  r.x = start;
  for (std::size_t k = 0; k < iters; ++k) {
    Value g = gradient(c, r.x);
    double norm = 0.0;
    for (double coord : flatten(g)) norm += coord * coord;
    norm = std::sqrt(norm);
    r.grad_norm = norm;
    if (norm <= tol) {
      r.converged = true;
      return r;
    }
    r.x = value_add(r.x, value_scale(-eta, g));
    ++r.steps;
    double obj = eval_plain(c, r.x).num();
    r.objectives.push_back(obj);
    if (!std::isfinite(obj)) {
      r.diverged = true;
      return r;
    }
  }
  Value g = gradient(c, r.x);
  double norm = 0.0;
  for (double coord : flatten(g)) norm += coord * coord;
  r.grad_norm = std::sqrt(norm);
  r.converged = r.grad_norm <= tol;
  return r;
}

}  // namespace catgrad
