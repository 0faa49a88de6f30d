#include "catgrad/linmap.hpp"

#include <cstdio>
#include <stdexcept>

namespace catgrad {

namespace {

[[noreturn]] void lm_fail(const std::string& msg) {
  throw CatError("LinMap: " + msg);
}

}  // namespace

LinMap LinMap::zero(Shape dom, Shape cod) {
  auto n = std::make_shared<Node>();
  n->tag = LmTag::Zero;
  n->dom = std::move(dom);
  n->cod = std::move(cod);
  return LinMap(std::move(n));
}

LinMap LinMap::identity(Shape s) {
  auto n = std::make_shared<Node>();
  n->tag = LmTag::Id;
  n->dom = s;
  n->cod = std::move(s);
  return LinMap(std::move(n));
}

LinMap LinMap::scale(double c) {
  auto n = std::make_shared<Node>();
  n->tag = LmTag::Scale;
  n->dom = Shape::scalar();
  n->cod = Shape::scalar();
  n->c = c;
  return LinMap(std::move(n));
}

LinMap LinMap::fork(LinMap f, LinMap g) {
  if (!(f.dom() == g.dom())) lm_fail("fork components must share a domain");
  auto n = std::make_shared<Node>();
  n->tag = LmTag::Fork;
  n->dom = f.dom();
  n->cod = Shape::pair(f.cod(), g.cod());
  n->kids = {std::move(f), std::move(g)};
  return LinMap(std::move(n));
}

LinMap LinMap::join(LinMap f, LinMap g) {
  if (!(f.cod() == g.cod())) lm_fail("join components must share a codomain");
  auto n = std::make_shared<Node>();
  n->tag = LmTag::Join;
  n->dom = Shape::pair(f.dom(), g.dom());
  n->cod = f.cod();
  n->kids = {std::move(f), std::move(g)};
  return LinMap(std::move(n));
}

LinMap LinMap::fork_i(std::vector<LinMap> fs) {
  if (fs.empty()) lm_fail("fork_i needs at least one component");
  for (const LinMap& f : fs)
    if (!(f.dom() == fs[0].dom()) || !(f.cod() == fs[0].cod()))
      lm_fail("fork_i components must share one type");
  auto n = std::make_shared<Node>();
  n->tag = LmTag::ForkI;
  n->dom = fs[0].dom();
  n->cod = Shape::vec(fs.size(), fs[0].cod());
  n->kids = std::move(fs);
  return LinMap(std::move(n));
}

LinMap LinMap::join_i(std::vector<LinMap> fs) {
  if (fs.empty()) lm_fail("join_i needs at least one component");
  for (const LinMap& f : fs)
    if (!(f.dom() == fs[0].dom()) || !(f.cod() == fs[0].cod()))
      lm_fail("join_i components must share one type");
  auto n = std::make_shared<Node>();
  n->tag = LmTag::JoinI;
  n->dom = Shape::vec(fs.size(), fs[0].dom());
  n->cod = fs[0].cod();
  n->kids = std::move(fs);
  return LinMap(std::move(n));
}

double LinMap::factor() const {
  if (tag() != LmTag::Scale) throw std::logic_error("LinMap::factor on non-scale");
  return node_->c;
}

const LinMap& LinMap::first() const {
  if (tag() != LmTag::Fork && tag() != LmTag::Join)
    throw std::logic_error("LinMap::first on non-binary node");
  return node_->kids[0];
}

const LinMap& LinMap::second() const {
  if (tag() != LmTag::Fork && tag() != LmTag::Join)
    throw std::logic_error("LinMap::second on non-binary node");
  return node_->kids[1];
}

const std::vector<LinMap>& LinMap::parts() const {
  if (tag() != LmTag::ForkI && tag() != LmTag::JoinI)
    throw std::logic_error("LinMap::parts on non-indexed node");
  return node_->kids;
}

Value lm_apply(const LinMap& m, const Value& v) {
  if (!conforms(v, m.dom()))
    lm_fail("apply: value does not conform to domain " + show_shape(m.dom()));
  switch (m.tag()) {
    case LmTag::Zero:
      return zero_value(m.cod());
    case LmTag::Id:
      return v;
    case LmTag::Scale:
      return Value::scalar(m.factor() * v.num());
    case LmTag::Fork:
      return Value::pair(lm_apply(m.first(), v), lm_apply(m.second(), v));
    case LmTag::Join:
      return value_add(lm_apply(m.first(), v.fst()),
                       lm_apply(m.second(), v.snd()));
    case LmTag::ForkI: {
      std::vector<Value> out;
      out.reserve(m.parts().size());
      for (const LinMap& f : m.parts()) out.push_back(lm_apply(f, v));
      return Value::vec(std::move(out));
    }
    case LmTag::JoinI: {
      Value acc = zero_value(m.cod());
      for (std::size_t i = 0; i < m.parts().size(); ++i)
        acc = value_add(acc, lm_apply(m.parts()[i], v.items()[i]));
      return acc;
    }
  }
  throw std::logic_error("lm_apply: unreachable");
}

LinMap lm_compose(const LinMap& g, const LinMap& f) {
  if (!(f.cod() == g.dom()))
    lm_fail("compose type mismatch, inner shapes " + show_shape(f.cod()) +
            " and " + show_shape(g.dom()));
  if (g.tag() == LmTag::Zero || f.tag() == LmTag::Zero)
    return LinMap::zero(f.dom(), g.cod());
  if (g.tag() == LmTag::Id) return f;
  if (f.tag() == LmTag::Id) return g;
  if (g.tag() == LmTag::Scale && f.tag() == LmTag::Scale)
    return LinMap::scale(g.factor() * f.factor());
  if (g.tag() == LmTag::Fork)
    return LinMap::fork(lm_compose(g.first(), f), lm_compose(g.second(), f));
  if (g.tag() == LmTag::ForkI) {
    std::vector<LinMap> out;
    out.reserve(g.parts().size());
    for (const LinMap& gi : g.parts()) out.push_back(lm_compose(gi, f));
    return LinMap::fork_i(std::move(out));
  }
  if (g.tag() == LmTag::Join && f.tag() == LmTag::Fork)
    return lm_add(lm_compose(g.first(), f.first()),
                  lm_compose(g.second(), f.second()));
  if (g.tag() == LmTag::JoinI && f.tag() == LmTag::ForkI) {
    const auto& gs = g.parts();
    const auto& fs = f.parts();
    LinMap acc = lm_compose(gs[0], fs[0]);
    for (std::size_t i = 1; i < gs.size(); ++i)
      acc = lm_add(acc, lm_compose(gs[i], fs[i]));
    return acc;
  }
  if (f.tag() == LmTag::Join)
    return LinMap::join(lm_compose(g, f.first()), lm_compose(g, f.second()));
  if (f.tag() == LmTag::JoinI) {
    std::vector<LinMap> out;
    out.reserve(f.parts().size());
    for (const LinMap& fi : f.parts()) out.push_back(lm_compose(g, fi));
    return LinMap::join_i(std::move(out));
  }
  // Every remaining combination is ruled out by the shape check above.
  throw std::logic_error("lm_compose: no rewrite rule applies");
}

LinMap lm_add(const LinMap& f, const LinMap& g) {
  if (!(f.dom() == g.dom()) || !(f.cod() == g.cod()))
    lm_fail("add needs maps of one type");
  if (f.tag() == LmTag::Zero) return g;
  if (g.tag() == LmTag::Zero) return f;
  if (f.tag() == g.tag()) {
    switch (f.tag()) {
      case LmTag::Scale:
        return LinMap::scale(f.factor() + g.factor());
      case LmTag::Fork:
        return LinMap::fork(lm_add(f.first(), g.first()),
                            lm_add(f.second(), g.second()));
      case LmTag::Join:
        return LinMap::join(lm_add(f.first(), g.first()),
                            lm_add(f.second(), g.second()));
      case LmTag::ForkI:
      case LmTag::JoinI: {
        std::vector<LinMap> out;
        out.reserve(f.parts().size());
        for (std::size_t i = 0; i < f.parts().size(); ++i)
          out.push_back(lm_add(f.parts()[i], g.parts()[i]));
        return f.tag() == LmTag::ForkI ? LinMap::fork_i(std::move(out))
                                       : LinMap::join_i(std::move(out));
      }
      default:
        break;  // Id + Id falls through to the dense path
    }
  }
  DenseMatrix df = lm_to_dense(f);
  DenseMatrix dg = lm_to_dense(g);
  for (std::size_t i = 0; i < df.a.size(); ++i) df.a[i] += dg.a[i];
  return lm_from_dense(f.dom(), f.cod(), df);
}

LinMap lm_transpose(const LinMap& m) {
  switch (m.tag()) {
    case LmTag::Zero:
      return LinMap::zero(m.cod(), m.dom());
    case LmTag::Id:
    case LmTag::Scale:
      return m;
    case LmTag::Fork:
      return LinMap::join(lm_transpose(m.first()), lm_transpose(m.second()));
    case LmTag::Join:
      return LinMap::fork(lm_transpose(m.first()), lm_transpose(m.second()));
    case LmTag::ForkI:
    case LmTag::JoinI: {
      std::vector<LinMap> out;
      out.reserve(m.parts().size());
      for (const LinMap& f : m.parts()) out.push_back(lm_transpose(f));
      return m.tag() == LmTag::ForkI ? LinMap::join_i(std::move(out))
                                     : LinMap::fork_i(std::move(out));
    }
  }
  throw std::logic_error("lm_transpose: unreachable");
}

DenseMatrix lm_to_dense(const LinMap& m) {
  DenseMatrix d(m.cod().dim(), m.dom().dim());
  for (std::size_t j = 0; j < d.cols; ++j) {
    Value col = lm_apply(m, basis_value(m.dom(), j));
    std::vector<double> coords = flatten(col);
    for (std::size_t i = 0; i < d.rows; ++i) d.at(i, j) = coords[i];
  }
  return d;
}

namespace {

DenseMatrix dense_block(const DenseMatrix& m, std::size_t row0,
                        std::size_t rows, std::size_t col0,
                        std::size_t cols) {
  DenseMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out.at(i, j) = m.at(row0 + i, col0 + j);
  return out;
}

}  // namespace

LinMap lm_from_dense(const Shape& dom, const Shape& cod,
                     const DenseMatrix& m) {
  if (m.rows != cod.dim() || m.cols != dom.dim())
    lm_fail("from_dense: matrix is " + std::to_string(m.rows) + "x" +
            std::to_string(m.cols) + " but shapes need " +
            std::to_string(cod.dim()) + "x" + std::to_string(dom.dim()));
  if (dom.dim() == 0 || cod.dim() == 0) return LinMap::zero(dom, cod);
  switch (dom.tag()) {
    case ShapeTag::Pair: {
      std::size_t split = dom.fst().dim();
      return LinMap::join(
          lm_from_dense(dom.fst(), cod, dense_block(m, 0, m.rows, 0, split)),
          lm_from_dense(dom.snd(), cod,
                        dense_block(m, 0, m.rows, split, m.cols - split)));
    }
    case ShapeTag::Vec: {
      std::size_t step = dom.elem().dim();
      std::vector<LinMap> out;
      out.reserve(dom.len());
      for (std::size_t i = 0; i < dom.len(); ++i)
        out.push_back(lm_from_dense(dom.elem(), cod,
                                    dense_block(m, 0, m.rows, i * step, step)));
      return LinMap::join_i(std::move(out));
    }
    case ShapeTag::Scalar:
      break;
    case ShapeTag::Unit:
      throw std::logic_error("lm_from_dense: unit handled above");
  }
  switch (cod.tag()) {
    case ShapeTag::Scalar:
      return LinMap::scale(m.at(0, 0));
    case ShapeTag::Pair: {
      std::size_t split = cod.fst().dim();
      return LinMap::fork(
          lm_from_dense(dom, cod.fst(), dense_block(m, 0, split, 0, 1)),
          lm_from_dense(dom, cod.snd(),
                        dense_block(m, split, m.rows - split, 0, 1)));
    }
    case ShapeTag::Vec: {
      std::size_t step = cod.elem().dim();
      std::vector<LinMap> out;
      out.reserve(cod.len());
      for (std::size_t i = 0; i < cod.len(); ++i)
        out.push_back(
            lm_from_dense(dom, cod.elem(), dense_block(m, i * step, step, 0, 1)));
      return LinMap::fork_i(std::move(out));
    }
    default:
      throw std::logic_error("lm_from_dense: unreachable codomain");
  }
}

std::string DenseMatrix::to_text() const {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (j) out += ' ';
      std::snprintf(buf, sizeof(buf), "%.17g", at(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

ChainPlan chain_order(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2)
    throw std::invalid_argument(
        "chain_order: need at least one matrix (two dimensions)");
  for (std::size_t d : dims)
    if (d == 0)
      throw std::invalid_argument("chain_order: dimensions must be positive");
  std::size_t n = dims.size() - 1;
  // cost[i][j]: cheapest way to multiply matrices i..j inclusive (0-based).
  std::vector<std::vector<unsigned long long>> cost(
      n, std::vector<unsigned long long>(n, 0));
  std::vector<std::vector<std::size_t>> split(n,
                                              std::vector<std::size_t>(n, 0));
  for (std::size_t span = 1; span < n; ++span) {
    for (std::size_t i = 0; i + span < n; ++i) {
      std::size_t j = i + span;
      unsigned long long best = ~0ULL;
      std::size_t best_k = i;
      for (std::size_t k = i; k < j; ++k) {
        unsigned long long c =
            cost[i][k] + cost[k + 1][j] +
            static_cast<unsigned long long>(dims[i]) * dims[k + 1] *
                dims[j + 1];
        if (c < best) {  // strict: ties keep the smallest split index
          best = c;
          best_k = k;
        }
      }
      cost[i][j] = best;
      split[i][j] = best_k;
    }
  }
  std::function<std::string(std::size_t, std::size_t)> render =
      [&](std::size_t i, std::size_t j) -> std::string {
    if (i == j) return "A" + std::to_string(i + 1);
    std::size_t k = split[i][j];
    return "(" + render(i, k) + " " + render(k + 1, j) + ")";
  };
  return {cost[0][n - 1], render(0, n - 1)};
}

namespace {

Morph lm_morph(CatPtr cat, LinMap m) {
  Shape dom = m.dom(), cod = m.cod();
  return Morph(std::move(dom), std::move(cod), std::move(cat),
               std::make_shared<const LinMap>(std::move(m)));
}

std::vector<LinMap> one_hot_row(std::size_t n, const Shape& a, std::size_t i,
                                const Shape& zero_dom, const Shape& zero_cod) {
  std::vector<LinMap> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    out.push_back(j == i ? LinMap::identity(a)
                         : LinMap::zero(zero_dom, zero_cod));
  return out;
}

}  // namespace

CatPtr LinMapCat::instance() {
  static const CatPtr cat(new LinMapCat());
  return cat;
}

Morph LinMapCat::lift(LinMap m) { return lm_morph(instance(), std::move(m)); }

const LinMap& LinMapCat::linmap_of(const Morph& m) {
  if (m.cat().get() != instance().get())
    throw CatError("LinMap: foreign morphism has no matrix payload");
  return m.payload_as<LinMap>();
}

Morph LinMapCat::id(const Shape& a) const {
  return lm_morph(shared_from_this(), LinMap::identity(a));
}

Morph LinMapCat::compose(const Morph& g, const Morph& f) const {
  check_compose(g, f);
  return lm_morph(shared_from_this(),
                  lm_compose(g.payload_as<LinMap>(), f.payload_as<LinMap>()));
}

Morph LinMapCat::cross(const Morph& f, const Morph& g) const {
  check_mine(f, "cross");
  check_mine(g, "cross");
  const LinMap& lf = f.payload_as<LinMap>();
  const LinMap& lg = g.payload_as<LinMap>();
  // Block diagonal [[f, 0], [0, g]].
  return lm_morph(
      shared_from_this(),
      LinMap::fork(LinMap::join(lf, LinMap::zero(lg.dom(), lf.cod())),
                   LinMap::join(LinMap::zero(lf.dom(), lg.cod()), lg)));
}

Morph LinMapCat::exl(const Shape& a, const Shape& b) const {
  return lm_morph(shared_from_this(),
                  LinMap::join(LinMap::identity(a), LinMap::zero(b, a)));
}

Morph LinMapCat::exr(const Shape& a, const Shape& b) const {
  return lm_morph(shared_from_this(),
                  LinMap::join(LinMap::zero(a, b), LinMap::identity(b)));
}

Morph LinMapCat::dup(const Shape& a) const {
  return lm_morph(shared_from_this(),
                  LinMap::fork(LinMap::identity(a), LinMap::identity(a)));
}

Morph LinMapCat::inl(const Shape& a, const Shape& b) const {
  return lm_morph(shared_from_this(),
                  LinMap::fork(LinMap::identity(a), LinMap::zero(a, b)));
}

Morph LinMapCat::inr(const Shape& a, const Shape& b) const {
  return lm_morph(shared_from_this(),
                  LinMap::fork(LinMap::zero(b, a), LinMap::identity(b)));
}

Morph LinMapCat::jam(const Shape& a) const {
  return lm_morph(shared_from_this(),
                  LinMap::join(LinMap::identity(a), LinMap::identity(a)));
}

Morph LinMapCat::it(const Shape& a) const {
  return lm_morph(shared_from_this(), LinMap::zero(a, Shape::unit()));
}

Morph LinMapCat::ti(const Shape& a) const {
  return lm_morph(shared_from_this(), LinMap::zero(Shape::unit(), a));
}

Morph LinMapCat::hom_zero(const Shape& a, const Shape& b) const {
  return lm_morph(shared_from_this(), LinMap::zero(a, b));
}

Morph LinMapCat::hom_add(const Morph& f, const Morph& g) const {
  check_mine(f, "hom_add");
  check_mine(g, "hom_add");
  return lm_morph(shared_from_this(),
                  lm_add(f.payload_as<LinMap>(), g.payload_as<LinMap>()));
}

Morph LinMapCat::scale(double c) const {
  return lm_morph(shared_from_this(), LinMap::scale(c));
}

Morph LinMapCat::cross_i(const std::vector<Morph>& fs) const {
  if (fs.empty()) throw CatError("LinMap: cross_i with no components");
  std::size_t n = fs.size();
  const Shape& a = fs[0].dom();
  const Shape& b = fs[0].cod();
  std::vector<LinMap> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    check_mine(fs[i], "cross_i");
    if (!(fs[i].dom() == a) || !(fs[i].cod() == b))
      throw CatError("LinMap: cross_i components must share one shape");
    // Row i applies f_i to slot i and ignores the rest.
    std::vector<LinMap> row = one_hot_row(n, a, i, a, b);
    row[i] = fs[i].payload_as<LinMap>();
    rows.push_back(LinMap::join_i(std::move(row)));
  }
  return lm_morph(shared_from_this(), LinMap::fork_i(std::move(rows)));
}

Morph LinMapCat::ex_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n) throw CatError("LinMap: ex_i index out of range");
  return lm_morph(shared_from_this(),
                  LinMap::join_i(one_hot_row(n, a, i, a, a)));
}

Morph LinMapCat::repl_i(std::size_t n, const Shape& a) const {
  if (n == 0) throw CatError("LinMap: repl_i needs n > 0");
  return lm_morph(shared_from_this(),
                  LinMap::fork_i(std::vector<LinMap>(n, LinMap::identity(a))));
}

Morph LinMapCat::in_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n) throw CatError("LinMap: in_i index out of range");
  return lm_morph(shared_from_this(),
                  LinMap::fork_i(one_hot_row(n, a, i, a, a)));
}

Morph LinMapCat::jam_i(std::size_t n, const Shape& a) const {
  if (n == 0) throw CatError("LinMap: jam_i needs n > 0");
  return lm_morph(shared_from_this(),
                  LinMap::join_i(std::vector<LinMap>(n, LinMap::identity(a))));
}

Value LinMapCat::apply(const Morph& f, const Value& a) const {
  check_mine(f, "apply");
  return lm_apply(f.payload_as<LinMap>(), a);
}

}  // namespace catgrad
