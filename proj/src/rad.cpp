#include "catgrad/rad.hpp"

#include "catgrad/linmap.hpp"

namespace catgrad {

namespace {

const MorphFn& trans_of(const Morph& m) { return m.payload_as<MorphFn>(); }

Morph trans_morph(CatPtr cat, Shape dom, Shape cod, MorphFn t) {
  return Morph(std::move(dom), std::move(cod), std::move(cat),
               std::make_shared<const MorphFn>(std::move(t)));
}

void check_action_arg(const CatPtr& inner, const Shape& dom, const Shape& cod,
                      const Morph& h, const char* who) {
  if (!h.valid())
    throw CatError(std::string(who) + ": action given an empty morphism");
  if (h.cat() != inner)
    throw CatError(std::string(who) + ": action argument belongs to " +
                   h.cat()->name() + ", expected " + inner->name());
  if (!(h.dom() == dom) || !(h.cod() == cod))
    throw CatError(std::string(who) + ": action argument has type " +
                   show_shape(h.dom()) + " -> " + show_shape(h.cod()) +
                   ", expected " + show_shape(dom) + " -> " + show_shape(cod));
}

void check_parallel(const Category* self, const std::vector<Morph>& fs,
                    const char* op) {
  if (fs.empty())
    throw CatError(self->name() + ": " + op + " needs at least one component");
  for (const auto& f : fs) {
    if (!f.valid() || f.cat().get() != self)
      throw CatError(self->name() + ": " + op +
                     " given a foreign or empty morphism");
    if (!(f.dom() == fs[0].dom()) || !(f.cod() == fs[0].cod()))
      throw CatError(self->name() + ": " + op +
                     " components must share domain and codomain");
  }
}

void check_same_hom(const Category* self, const Morph& f, const Morph& g) {
  if (!(f.dom() == g.dom()) || !(f.cod() == g.cod()))
    throw CatError(self->name() + ": hom_add operands have different types");
}

}  // namespace

// ---------------------------------------------------------------------------
// ContCat

CatPtr ContCat::over(CatPtr inner, Shape r) {
  if (!inner) throw CatError("ContCat::over: missing inner category");
  return CatPtr(new ContCat(std::move(inner), std::move(r)));
}

ContCat::ContCat(CatPtr inner, Shape r)
    : inner_(std::move(inner)), r_(std::move(r)) {}

std::string ContCat::name() const {
  return "Cont(" + inner_->name() + ", " + show_shape(r_) + ")";
}

Morph ContCat::guarded(Shape dom, Shape cod, MorphFn raw) const {
  CatPtr inner = inner_;
  Shape r = r_;
  Shape hd = cod;  // continuations consume this morphism's codomain
  MorphFn t = [inner, r, hd, raw = std::move(raw)](const Morph& h) {
    check_action_arg(inner, hd, r, h, "Cont");
    return raw(h);
  };
  return trans_morph(shared_from_this(), std::move(dom), std::move(cod),
                     std::move(t));
}

Morph ContCat::id(const Shape& a) const {
  return guarded(a, a, [](const Morph& h) { return h; });
}

Morph ContCat::compose(const Morph& g, const Morph& f) const {
  check_compose(g, f);
  // Reversed: the continuation flows through g's action first.
  return guarded(f.dom(), g.cod(), [g, f](const Morph& h) {
    return trans_of(f)(trans_of(g)(h));
  });
}

Morph ContCat::cross(const Morph& f, const Morph& g) const {
  check_mine(f, "cross");
  check_mine(g, "cross");
  return guarded(Shape::pair(f.dom(), g.dom()), Shape::pair(f.cod(), g.cod()),
                 [f, g](const Morph& h) {
                   auto [hc, hd] = unjoin(h);
                   return join(trans_of(f)(hc), trans_of(g)(hd));
                 });
}

Morph ContCat::exl(const Shape& a, const Shape& b) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::pair(a, b), a, [inner, r, b](const Morph& h) {
    return join(h, inner->hom_zero(b, r));
  });
}

Morph ContCat::exr(const Shape& a, const Shape& b) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::pair(a, b), b, [inner, r, a](const Morph& h) {
    return join(inner->hom_zero(a, r), h);
  });
}

Morph ContCat::dup(const Shape& a) const {
  CatPtr inner = inner_;
  return guarded(a, Shape::pair(a, a), [inner](const Morph& h) {
    auto [h1, h2] = unjoin(h);
    return inner->hom_add(h1, h2);
  });
}

Morph ContCat::inl(const Shape& a, const Shape& b) const {
  return guarded(a, Shape::pair(a, b),
                 [](const Morph& h) { return unjoin(h).first; });
}

Morph ContCat::inr(const Shape& a, const Shape& b) const {
  return guarded(b, Shape::pair(a, b),
                 [](const Morph& h) { return unjoin(h).second; });
}

Morph ContCat::jam(const Shape& a) const {
  return guarded(Shape::pair(a, a), a,
                 [](const Morph& h) { return join(h, h); });
}

Morph ContCat::it(const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, Shape::unit(), [inner, r, a](const Morph&) {
    return inner->hom_zero(a, r);
  });
}

Morph ContCat::ti(const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::unit(), a, [inner, r](const Morph&) {
    return inner->hom_zero(Shape::unit(), r);
  });
}

Morph ContCat::hom_zero(const Shape& a, const Shape& b) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, b, [inner, r, a](const Morph&) {
    return inner->hom_zero(a, r);
  });
}

Morph ContCat::hom_add(const Morph& f, const Morph& g) const {
  check_mine(f, "hom_add");
  check_mine(g, "hom_add");
  check_same_hom(this, f, g);
  CatPtr inner = inner_;
  return guarded(f.dom(), f.cod(), [inner, f, g](const Morph& h) {
    return inner->hom_add(trans_of(f)(h), trans_of(g)(h));
  });
}

Morph ContCat::scale(double c) const {
  CatPtr inner = inner_;
  return guarded(Shape::scalar(), Shape::scalar(), [inner, c](const Morph& h) {
    return inner->compose(h, inner->scale(c));
  });
}

Morph ContCat::cross_i(const std::vector<Morph>& fs) const {
  check_parallel(this, fs, "cross_i");
  std::size_t n = fs.size();
  return guarded(Shape::vec(n, fs[0].dom()), Shape::vec(n, fs[0].cod()),
                 [fs](const Morph& h) {
                   std::vector<Morph> hs = unjoin_i(h);
                   std::vector<Morph> out;
                   out.reserve(fs.size());
                   for (std::size_t i = 0; i < fs.size(); ++i)
                     out.push_back(trans_of(fs[i])(hs[i]));
                   return join_i(out);
                 });
}

Morph ContCat::ex_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n)
    throw CatError(name() + ": ex_i index " + std::to_string(i) +
                   " out of range for length " + std::to_string(n));
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::vec(n, a), a, [inner, r, a, n, i](const Morph& h) {
    std::vector<Morph> parts(n, inner->hom_zero(a, r));
    parts[i] = h;
    return join_i(parts);
  });
}

Morph ContCat::repl_i(std::size_t n, const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, Shape::vec(n, a), [inner, r, a](const Morph& h) {
    Morph acc = inner->hom_zero(a, r);
    for (const Morph& part : unjoin_i(h)) acc = inner->hom_add(acc, part);
    return acc;
  });
}

Morph ContCat::in_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n)
    throw CatError(name() + ": in_i index " + std::to_string(i) +
                   " out of range for length " + std::to_string(n));
  return guarded(a, Shape::vec(n, a),
                 [i](const Morph& h) { return unjoin_i(h)[i]; });
}

Morph ContCat::jam_i(std::size_t n, const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::vec(n, a), a, [inner, r, a, n](const Morph& h) {
    if (n == 0) return inner->hom_zero(Shape::vec(0, a), r);
    return join_i(std::vector<Morph>(n, h));
  });
}

// ---------------------------------------------------------------------------
// DualCat

CatPtr DualCat::over(CatPtr inner) {
  if (!inner) throw CatError("DualCat::over: missing inner category");
  return CatPtr(new DualCat(std::move(inner)));
}

DualCat::DualCat(CatPtr inner) : inner_(std::move(inner)) {}

std::string DualCat::name() const { return "Dual(" + inner_->name() + ")"; }

Morph DualCat::from_rev(Morph rev) const {
  if (!rev.valid() || rev.cat() != inner_)
    throw CatError(name() + ": reversal must live in " + inner_->name());
  Shape dom = rev.cod(), cod = rev.dom();
  return Morph(std::move(dom), std::move(cod), shared_from_this(),
               std::make_shared<const Morph>(std::move(rev)));
}

Morph DualCat::of(const CatPtr& dual, Morph rev) {
  auto dc = std::dynamic_pointer_cast<const DualCat>(dual);
  if (!dc) throw CatError("DualCat::of: not a dual carrier category");
  return dc->from_rev(std::move(rev));
}

Morph DualCat::id(const Shape& a) const { return from_rev(inner_->id(a)); }

Morph DualCat::compose(const Morph& g, const Morph& f) const {
  check_compose(g, f);
  return from_rev(inner_->compose(dual_rev(f), dual_rev(g)));
}

Morph DualCat::cross(const Morph& f, const Morph& g) const {
  check_mine(f, "cross");
  check_mine(g, "cross");
  return from_rev(inner_->cross(dual_rev(f), dual_rev(g)));
}

Morph DualCat::exl(const Shape& a, const Shape& b) const {
  return from_rev(inner_->inl(a, b));
}

Morph DualCat::exr(const Shape& a, const Shape& b) const {
  return from_rev(inner_->inr(a, b));
}

Morph DualCat::dup(const Shape& a) const { return from_rev(inner_->jam(a)); }

Morph DualCat::inl(const Shape& a, const Shape& b) const {
  return from_rev(inner_->exl(a, b));
}

Morph DualCat::inr(const Shape& a, const Shape& b) const {
  return from_rev(inner_->exr(a, b));
}

Morph DualCat::jam(const Shape& a) const { return from_rev(inner_->dup(a)); }

Morph DualCat::it(const Shape& a) const { return from_rev(inner_->ti(a)); }

Morph DualCat::ti(const Shape& a) const { return from_rev(inner_->it(a)); }

Morph DualCat::hom_zero(const Shape& a, const Shape& b) const {
  return from_rev(inner_->hom_zero(b, a));
}

Morph DualCat::hom_add(const Morph& f, const Morph& g) const {
  check_mine(f, "hom_add");
  check_mine(g, "hom_add");
  check_same_hom(this, f, g);
  return from_rev(inner_->hom_add(dual_rev(f), dual_rev(g)));
}

Morph DualCat::scale(double c) const { return from_rev(inner_->scale(c)); }

Morph DualCat::cross_i(const std::vector<Morph>& fs) const {
  check_parallel(this, fs, "cross_i");
  std::vector<Morph> revs;
  revs.reserve(fs.size());
  for (const auto& f : fs) revs.push_back(dual_rev(f));
  return from_rev(inner_->cross_i(revs));
}

Morph DualCat::ex_i(std::size_t n, const Shape& a, std::size_t i) const {
  return from_rev(inner_->in_i(n, a, i));
}

Morph DualCat::repl_i(std::size_t n, const Shape& a) const {
  return from_rev(inner_->jam_i(n, a));
}

Morph DualCat::in_i(std::size_t n, const Shape& a, std::size_t i) const {
  return from_rev(inner_->ex_i(n, a, i));
}

Morph DualCat::jam_i(std::size_t n, const Shape& a) const {
  return from_rev(inner_->repl_i(n, a));
}

// ---------------------------------------------------------------------------
// BeginCat

CatPtr BeginCat::over(CatPtr inner, Shape r) {
  if (!inner) throw CatError("BeginCat::over: missing inner category");
  return CatPtr(new BeginCat(std::move(inner), std::move(r)));
}

BeginCat::BeginCat(CatPtr inner, Shape r)
    : inner_(std::move(inner)), r_(std::move(r)) {}

std::string BeginCat::name() const {
  return "Begin(" + inner_->name() + ", " + show_shape(r_) + ")";
}

Morph BeginCat::guarded(Shape dom, Shape cod, MorphFn raw) const {
  CatPtr inner = inner_;
  Shape r = r_;
  Shape hc = dom;  // arguments feed this morphism's domain
  MorphFn t = [inner, r, hc, raw = std::move(raw)](const Morph& h) {
    check_action_arg(inner, r, hc, h, "Begin");
    return raw(h);
  };
  return trans_morph(shared_from_this(), std::move(dom), std::move(cod),
                     std::move(t));
}

Morph BeginCat::id(const Shape& a) const {
  return guarded(a, a, [](const Morph& h) { return h; });
}

Morph BeginCat::compose(const Morph& g, const Morph& f) const {
  check_compose(g, f);
  // Not reversed: feeds flow through f's action first.
  return guarded(f.dom(), g.cod(), [g, f](const Morph& h) {
    return trans_of(g)(trans_of(f)(h));
  });
}

Morph BeginCat::cross(const Morph& f, const Morph& g) const {
  check_mine(f, "cross");
  check_mine(g, "cross");
  return guarded(Shape::pair(f.dom(), g.dom()), Shape::pair(f.cod(), g.cod()),
                 [f, g](const Morph& h) {
                   auto [ha, hb] = unfork(h);
                   return fork(trans_of(f)(ha), trans_of(g)(hb));
                 });
}

Morph BeginCat::exl(const Shape& a, const Shape& b) const {
  return guarded(Shape::pair(a, b), a,
                 [](const Morph& h) { return unfork(h).first; });
}

Morph BeginCat::exr(const Shape& a, const Shape& b) const {
  return guarded(Shape::pair(a, b), b,
                 [](const Morph& h) { return unfork(h).second; });
}

Morph BeginCat::dup(const Shape& a) const {
  return guarded(a, Shape::pair(a, a),
                 [](const Morph& h) { return fork(h, h); });
}

Morph BeginCat::inl(const Shape& a, const Shape& b) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, Shape::pair(a, b), [inner, r, b](const Morph& h) {
    return fork(h, inner->hom_zero(r, b));
  });
}

Morph BeginCat::inr(const Shape& a, const Shape& b) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(b, Shape::pair(a, b), [inner, r, a](const Morph& h) {
    return fork(inner->hom_zero(r, a), h);
  });
}

Morph BeginCat::jam(const Shape& a) const {
  CatPtr inner = inner_;
  return guarded(Shape::pair(a, a), a, [inner](const Morph& h) {
    auto [h1, h2] = unfork(h);
    return inner->hom_add(h1, h2);
  });
}

Morph BeginCat::it(const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, Shape::unit(), [inner, r](const Morph&) {
    return inner->hom_zero(r, Shape::unit());
  });
}

Morph BeginCat::ti(const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::unit(), a, [inner, r, a](const Morph&) {
    return inner->hom_zero(r, a);
  });
}

Morph BeginCat::hom_zero(const Shape& a, const Shape& b) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, b, [inner, r, b](const Morph&) {
    return inner->hom_zero(r, b);
  });
}

Morph BeginCat::hom_add(const Morph& f, const Morph& g) const {
  check_mine(f, "hom_add");
  check_mine(g, "hom_add");
  check_same_hom(this, f, g);
  CatPtr inner = inner_;
  return guarded(f.dom(), f.cod(), [inner, f, g](const Morph& h) {
    return inner->hom_add(trans_of(f)(h), trans_of(g)(h));
  });
}

Morph BeginCat::scale(double c) const {
  CatPtr inner = inner_;
  return guarded(Shape::scalar(), Shape::scalar(), [inner, c](const Morph& h) {
    return inner->compose(inner->scale(c), h);
  });
}

Morph BeginCat::cross_i(const std::vector<Morph>& fs) const {
  check_parallel(this, fs, "cross_i");
  std::size_t n = fs.size();
  return guarded(Shape::vec(n, fs[0].dom()), Shape::vec(n, fs[0].cod()),
                 [fs](const Morph& h) {
                   std::vector<Morph> hs = unfork_i(h);
                   std::vector<Morph> out;
                   out.reserve(fs.size());
                   for (std::size_t i = 0; i < fs.size(); ++i)
                     out.push_back(trans_of(fs[i])(hs[i]));
                   return fork_i(out);
                 });
}

Morph BeginCat::ex_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n)
    throw CatError(name() + ": ex_i index " + std::to_string(i) +
                   " out of range for length " + std::to_string(n));
  return guarded(Shape::vec(n, a), a,
                 [i](const Morph& h) { return unfork_i(h)[i]; });
}

Morph BeginCat::repl_i(std::size_t n, const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, Shape::vec(n, a), [inner, r, a, n](const Morph& h) {
    if (n == 0) return inner->hom_zero(r, Shape::vec(0, a));
    return fork_i(std::vector<Morph>(n, h));
  });
}

Morph BeginCat::in_i(std::size_t n, const Shape& a, std::size_t i) const {
  if (i >= n)
    throw CatError(name() + ": in_i index " + std::to_string(i) +
                   " out of range for length " + std::to_string(n));
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(a, Shape::vec(n, a), [inner, r, a, n, i](const Morph& h) {
    std::vector<Morph> parts(n, inner->hom_zero(r, a));
    parts[i] = h;
    return fork_i(parts);
  });
}

Morph BeginCat::jam_i(std::size_t n, const Shape& a) const {
  CatPtr inner = inner_;
  Shape r = r_;
  return guarded(Shape::vec(n, a), a, [inner, r, a](const Morph& h) {
    Morph acc = inner->hom_zero(r, a);
    for (const Morph& part : unfork_i(h)) acc = inner->hom_add(acc, part);
    return acc;
  });
}

// ---------------------------------------------------------------------------
// Embedding and unwrapping

Morph cont_wrap(const CatPtr& cont, const Morph& f) {
  auto cc = std::dynamic_pointer_cast<const ContCat>(cont);
  if (!cc) throw CatError("cont_wrap: not a continuation carrier category");
  if (!f.valid() || f.cat() != cc->inner())
    throw CatError("cont_wrap: morphism must live in " + cc->inner()->name());
  CatPtr inner = cc->inner();
  Shape r = cc->result();
  Shape hd = f.cod();
  MorphFn t = [inner, r, hd, f](const Morph& h) {
    check_action_arg(inner, hd, r, h, "Cont");
    return inner->compose(h, f);
  };
  return Morph(f.dom(), f.cod(), cont,
               std::make_shared<const MorphFn>(std::move(t)));
}

Morph begin_wrap(const CatPtr& begin, const Morph& f) {
  auto bc = std::dynamic_pointer_cast<const BeginCat>(begin);
  if (!bc) throw CatError("begin_wrap: not a forward carrier category");
  if (!f.valid() || f.cat() != bc->inner())
    throw CatError("begin_wrap: morphism must live in " + bc->inner()->name());
  CatPtr inner = bc->inner();
  Shape r = bc->result();
  Shape hc = f.dom();
  MorphFn t = [inner, r, hc, f](const Morph& h) {
    check_action_arg(inner, r, hc, h, "Begin");
    return inner->compose(f, h);
  };
  return Morph(f.dom(), f.cod(), begin,
               std::make_shared<const MorphFn>(std::move(t)));
}

Morph cont_trans(const Morph& m, const Morph& h) {
  if (!m.valid() || !std::dynamic_pointer_cast<const ContCat>(m.cat()))
    throw CatError("cont_trans: not a continuation carrier morphism");
  return trans_of(m)(h);
}

Morph begin_trans(const Morph& m, const Morph& h) {
  if (!m.valid() || !std::dynamic_pointer_cast<const BeginCat>(m.cat()))
    throw CatError("begin_trans: not a forward carrier morphism");
  return trans_of(m)(h);
}

const Morph& dual_rev(const Morph& m) {
  if (!m.valid() || !std::dynamic_pointer_cast<const DualCat>(m.cat()))
    throw CatError("dual_rev: not a dual carrier morphism");
  return m.payload_as<Morph>();
}

// ---------------------------------------------------------------------------
// The dot isomorphism

Morph dot_morph(const CatPtr& k, const Shape& a, const Value& u) {
  if (!conforms(u, a))
    throw CatError("dot_morph: value does not conform to " + show_shape(a));
  switch (a.tag()) {
    case ShapeTag::Scalar:
      return k->scale(u.num());
    case ShapeTag::Unit:
      return k->hom_zero(Shape::unit(), Shape::scalar());
    case ShapeTag::Pair:
      return join(dot_morph(k, a.fst(), u.fst()),
                  dot_morph(k, a.snd(), u.snd()));
    case ShapeTag::Vec: {
      if (a.len() == 0) return k->hom_zero(a, Shape::scalar());
      std::vector<Morph> parts;
      parts.reserve(a.len());
      for (std::size_t i = 0; i < a.len(); ++i)
        parts.push_back(dot_morph(k, a.elem(), u.items()[i]));
      return join_i(parts);
    }
  }
  throw CatError("dot_morph: unreachable");
}

Morph dot_morph(const CatPtr& k, const Value& u) {
  return dot_morph(k, shape_of(u), u);
}

Value undot_morph(const Morph& m) {
  if (!m.valid()) throw CatError("undot_morph: empty morphism");
  if (!(m.cod() == Shape::scalar()))
    throw CatError("undot_morph: codomain must be scalar, got " +
                   show_shape(m.cod()));
  const Shape& a = m.dom();
  std::vector<double> coords(a.dim());
  for (std::size_t i = 0; i < coords.size(); ++i)
    coords[i] = apply_morph(m, basis_value(a, i)).num();
  return unflatten(a, coords);
}

// ---------------------------------------------------------------------------
// as_dual

Morph as_dual(const CatPtr& dual, const Morph& m) {
  auto cc = std::dynamic_pointer_cast<const ContCat>(m.cat());
  if (!m.valid() || !cc)
    throw CatError("as_dual: expected a continuation carrier morphism");
  if (!(cc->result() == Shape::scalar()))
    throw CatError("as_dual: result object must be R, got " +
                   show_shape(cc->result()));
  auto dc = std::dynamic_pointer_cast<const DualCat>(dual);
  if (!dc) throw CatError("as_dual: target is not a dual carrier category");
  if (dc->inner() != cc->inner())
    throw CatError("as_dual: carriers wrap different inner categories");

  CatPtr k = cc->inner();
  Shape a = m.dom(), b = m.cod();
  Morph rev;
  if (std::dynamic_pointer_cast<const AddFunCat>(k)) {
    // Keep the conversion lazy: the reversal is itself an additive function
    // that routes w through dot, the stored action, and undot.
    Morph mm = m;
    rev = AddFunCat::lift(b, a, [mm, k, b](const Value& w) {
      return undot_morph(cont_trans(mm, dot_morph(k, b, w)));
    });
  } else if (std::dynamic_pointer_cast<const LinMapCat>(k)) {
    // Matrices have no lazy form, so materialize the reversal columnwise.
    DenseMatrix d(a.dim(), b.dim());
    for (std::size_t j = 0; j < b.dim(); ++j) {
      Value col = undot_morph(cont_trans(m, dot_morph(k, b, basis_value(b, j))));
      std::vector<double> flat = flatten(col);
      for (std::size_t i = 0; i < flat.size(); ++i) d.at(i, j) = flat[i];
    }
    rev = LinMapCat::lift(lm_from_dense(b, a, d));
  } else {
    throw CatError("as_dual: no dual realization over " + k->name());
  }
  return DualCat::of(dual, std::move(rev));
}

}  // namespace catgrad
