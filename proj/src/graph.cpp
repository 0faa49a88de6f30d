#include "catgrad/graph.hpp"

#include <functional>
#include <sstream>
#include <utility>

namespace catgrad {

namespace {

using Wires = std::vector<std::size_t>;
using K = CatTerm::Kind;

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

Wires slice(const Wires& w, std::size_t from, std::size_t n) {
  return Wires(w.begin() + from, w.begin() + from + n);
}

Wires concat(Wires a, const Wires& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

struct Builder {
  PortGraph g;

  Wires emit(std::string label, Wires ins, std::size_t nouts, bool boxed) {
    GraphNode n;
    n.label = std::move(label);
    n.ins = std::move(ins);
    n.boxed = boxed;
    for (std::size_t i = 0; i < nouts; ++i) n.outs.push_back(g.fresh());
    g.nodes.push_back(std::move(n));
    return g.nodes.back().outs;
  }

  std::size_t zero() { return emit("zero", {}, 1, true)[0]; }

  // Explicit fan-out: one dup node per scalar leaf, n copies each. Arm i
  // receives copy i of every leaf.
  std::vector<Wires> fan_out(const Wires& in, std::size_t n, bool boxed) {
    std::vector<Wires> arms(n);
    if (n == 1) {
      arms[0] = in;
      return arms;
    }
    for (auto w : in) {
      Wires outs = emit("dup", {w}, n, boxed);
      for (std::size_t i = 0; i < n; ++i) arms[i].push_back(outs[i]);
    }
    return arms;
  }

  // Pointwise n-ary addition of n slot groups of width d (slot-major input).
  Wires fan_in(const Wires& in, std::size_t n, std::size_t d, bool boxed) {
    Wires out;
    for (std::size_t j = 0; j < d; ++j) {
      Wires ins;
      for (std::size_t i = 0; i < n; ++i) ins.push_back(in[i * d + j]);
      out.push_back(emit("add", std::move(ins), 1, boxed)[0]);
    }
    return out;
  }

  // Splits a primal wire so the derivative box can read it as a scale
  // coefficient while the primal graph keeps flowing: {use, coefficient}.
  std::pair<std::size_t, std::size_t> tap(std::size_t w) {
    Wires outs = emit("dup", {w}, 2, false);
    return {outs[0], outs[1]};
  }
};

void expect_scalar_const(const TermPtr& t) {
  if (t->cval.tag() != ValueTag::Scalar)
    throw CatError("to_graph: constants are scalar");
}

// ---------------------------------------------------------------------------
// Plain dataflow.

Wires build_plain(Builder& b, const TermPtr& t, const Wires& in) {
  switch (t->kind) {
    case K::Id:
      return in;
    case K::Compose:
      return build_plain(b, t->kids[0], build_plain(b, t->kids[1], in));
    case K::Cross: {
      std::size_t nf = t->kids[0]->dom.dim();
      Wires f = build_plain(b, t->kids[0], slice(in, 0, nf));
      Wires g = build_plain(b, t->kids[1], slice(in, nf, in.size() - nf));
      return concat(f, g);
    }
    case K::CrossI: {
      Wires out;
      std::size_t at = 0;
      for (const auto& kid : t->kids) {
        std::size_t nk = kid->dom.dim();
        out = concat(out, build_plain(b, kid, slice(in, at, nk)));
        at += nk;
      }
      return out;
    }
    case K::Fork: {
      auto arms = b.fan_out(in, 2, false);
      Wires f = build_plain(b, t->kids[0], arms[0]);
      Wires g = build_plain(b, t->kids[1], arms[1]);
      return concat(f, g);
    }
    case K::ForkI: {
      auto arms = b.fan_out(in, t->kids.size(), false);
      Wires out;
      for (std::size_t i = 0; i < t->kids.size(); ++i)
        out = concat(out, build_plain(b, t->kids[i], arms[i]));
      return out;
    }
    case K::Exl:
      return slice(in, 0, t->dom.fst().dim());
    case K::Exr:
      return slice(in, t->dom.fst().dim(), t->dom.snd().dim());
    case K::ExI: {
      std::size_t d = t->cod.dim();
      return slice(in, t->index * d, d);
    }
    case K::Dup: {
      auto arms = b.fan_out(in, 2, false);
      return concat(arms[0], arms[1]);
    }
    case K::ReplI: {
      auto arms = b.fan_out(in, t->cod.len(), false);
      Wires out;
      for (auto& a : arms) out = concat(out, a);
      return out;
    }
    case K::JamI:
      return b.fan_in(in, t->dom.len(), t->cod.dim(), false);
    case K::It:
      return {};
    case K::AddC:
      return b.emit("add", in, 1, false);
    case K::MulC:
      return b.emit("mul", in, 1, false);
    case K::NegC:
      return b.emit("neg", in, 1, false);
    case K::SinC:
      return b.emit("sin", in, 1, false);
    case K::CosC:
      return b.emit("cos", in, 1, false);
    case K::ExpC:
      return b.emit("exp", in, 1, false);
    case K::Const:
      expect_scalar_const(t);
      return b.emit("const " + show_value(t->cval), {}, 1, false);
  }
  throw CatError("to_graph: unhandled term");
}

// ---------------------------------------------------------------------------
// Forward mode: the box carries input tangents to output tangents alongside
// the primal flow.

struct PW {
  Wires p, d;
};

PW build_fwd(Builder& b, const TermPtr& t, const Wires& pin, const Wires& din) {
  switch (t->kind) {
    case K::Id:
      return {pin, din};
    case K::Compose: {
      PW f = build_fwd(b, t->kids[1], pin, din);
      return build_fwd(b, t->kids[0], f.p, f.d);
    }
    case K::Cross: {
      std::size_t nf = t->kids[0]->dom.dim();
      PW f = build_fwd(b, t->kids[0], slice(pin, 0, nf), slice(din, 0, nf));
      PW g = build_fwd(b, t->kids[1], slice(pin, nf, pin.size() - nf),
                       slice(din, nf, din.size() - nf));
      return {concat(f.p, g.p), concat(f.d, g.d)};
    }
    case K::CrossI: {
      PW out;
      std::size_t at = 0;
      for (const auto& kid : t->kids) {
        std::size_t nk = kid->dom.dim();
        PW k = build_fwd(b, kid, slice(pin, at, nk), slice(din, at, nk));
        out.p = concat(out.p, k.p);
        out.d = concat(out.d, k.d);
        at += nk;
      }
      return out;
    }
    case K::Fork: {
      auto pa = b.fan_out(pin, 2, false);
      auto da = b.fan_out(din, 2, true);
      PW f = build_fwd(b, t->kids[0], pa[0], da[0]);
      PW g = build_fwd(b, t->kids[1], pa[1], da[1]);
      return {concat(f.p, g.p), concat(f.d, g.d)};
    }
    case K::ForkI: {
      auto pa = b.fan_out(pin, t->kids.size(), false);
      auto da = b.fan_out(din, t->kids.size(), true);
      PW out;
      for (std::size_t i = 0; i < t->kids.size(); ++i) {
        PW k = build_fwd(b, t->kids[i], pa[i], da[i]);
        out.p = concat(out.p, k.p);
        out.d = concat(out.d, k.d);
      }
      return out;
    }
    case K::Exl: {
      std::size_t nf = t->dom.fst().dim();
      return {slice(pin, 0, nf), slice(din, 0, nf)};
    }
    case K::Exr: {
      std::size_t nf = t->dom.fst().dim(), ns = t->dom.snd().dim();
      return {slice(pin, nf, ns), slice(din, nf, ns)};
    }
    case K::ExI: {
      std::size_t d = t->cod.dim();
      return {slice(pin, t->index * d, d), slice(din, t->index * d, d)};
    }
    case K::Dup: {
      auto pa = b.fan_out(pin, 2, false);
      auto da = b.fan_out(din, 2, true);
      return {concat(pa[0], pa[1]), concat(da[0], da[1])};
    }
    case K::ReplI: {
      auto pa = b.fan_out(pin, t->cod.len(), false);
      auto da = b.fan_out(din, t->cod.len(), true);
      PW out;
      for (std::size_t i = 0; i < pa.size(); ++i) {
        out.p = concat(out.p, pa[i]);
        out.d = concat(out.d, da[i]);
      }
      return out;
    }
    case K::JamI: {
      std::size_t n = t->dom.len(), d = t->cod.dim();
      return {b.fan_in(pin, n, d, false), b.fan_in(din, n, d, true)};
    }
    case K::It:
      return {{}, {}};
    case K::AddC:
      return {b.emit("add", pin, 1, false), b.emit("add", din, 1, true)};
    case K::NegC:
      return {b.emit("neg", pin, 1, false), b.emit("neg", din, 1, true)};
    case K::MulC: {
      auto a = b.tap(pin[0]);
      auto c = b.tap(pin[1]);
      Wires y = b.emit("mul", {a.first, c.first}, 1, false);
      Wires s1 = b.emit("scale", {c.second, din[0]}, 1, true);
      Wires s2 = b.emit("scale", {a.second, din[1]}, 1, true);
      Wires dy = b.emit("add", {s1[0], s2[0]}, 1, true);
      return {y, dy};
    }
    case K::SinC: {
      auto a = b.tap(pin[0]);
      Wires y = b.emit("sin", {a.first}, 1, false);
      Wires c = b.emit("cos", {a.second}, 1, true);
      return {y, b.emit("scale", {c[0], din[0]}, 1, true)};
    }
    case K::CosC: {
      auto a = b.tap(pin[0]);
      Wires y = b.emit("cos", {a.first}, 1, false);
      Wires s = b.emit("sin", {a.second}, 1, true);
      Wires ns = b.emit("neg", {s[0]}, 1, true);
      return {y, b.emit("scale", {ns[0], din[0]}, 1, true)};
    }
    case K::ExpC: {
      Wires y0 = b.emit("exp", {pin[0]}, 1, false);
      auto y = b.tap(y0[0]);
      return {{y.first}, b.emit("scale", {y.second, din[0]}, 1, true)};
    }
    case K::Const: {
      expect_scalar_const(t);
      Wires y = b.emit("const " + show_value(t->cval), {}, 1, false);
      return {y, {b.zero()}};
    }
  }
  throw CatError("to_graph_d: unhandled term");
}

// ---------------------------------------------------------------------------
// Reverse mode: the primal graph is built left to right while each step
// returns a thunk that later lays down the adjoint flow right to left,
// mapping output cotangents to input cotangents. Fan-out and addition trade
// places between the two phases.

using Thunk = std::function<Wires(const Wires&)>;

struct PR {
  Wires p;
  Thunk r;
};

PR build_rev(Builder& b, const TermPtr& t, const Wires& pin) {
  switch (t->kind) {
    case K::Id:
      return {pin, [](const Wires& u) { return u; }};
    case K::Compose: {
      PR f = build_rev(b, t->kids[1], pin);
      PR g = build_rev(b, t->kids[0], f.p);
      return {g.p, [rf = f.r, rg = g.r](const Wires& u) { return rf(rg(u)); }};
    }
    case K::Cross: {
      std::size_t nf = t->kids[0]->dom.dim();
      PR f = build_rev(b, t->kids[0], slice(pin, 0, nf));
      PR g = build_rev(b, t->kids[1], slice(pin, nf, pin.size() - nf));
      std::size_t cf = t->kids[0]->cod.dim();
      return {concat(f.p, g.p), [rf = f.r, rg = g.r, cf](const Wires& u) {
                Wires xf = rf(slice(u, 0, cf));
                return concat(xf, rg(slice(u, cf, u.size() - cf)));
              }};
    }
    case K::CrossI: {
      Wires pout;
      std::vector<Thunk> rs;
      std::vector<std::size_t> cods;
      std::size_t at = 0;
      for (const auto& kid : t->kids) {
        PR k = build_rev(b, kid, slice(pin, at, kid->dom.dim()));
        at += kid->dom.dim();
        pout = concat(pout, k.p);
        rs.push_back(k.r);
        cods.push_back(kid->cod.dim());
      }
      return {pout, [rs, cods](const Wires& u) {
                Wires out;
                std::size_t from = 0;
                for (std::size_t i = 0; i < rs.size(); ++i) {
                  out = concat(out, rs[i](slice(u, from, cods[i])));
                  from += cods[i];
                }
                return out;
              }};
    }
    case K::Fork: {
      auto pa = b.fan_out(pin, 2, false);
      PR f = build_rev(b, t->kids[0], pa[0]);
      PR g = build_rev(b, t->kids[1], pa[1]);
      std::size_t cf = t->kids[0]->cod.dim();
      return {concat(f.p, g.p),
              [&b, rf = f.r, rg = g.r, cf](const Wires& u) {
                Wires xf = rf(slice(u, 0, cf));
                Wires xg = rg(slice(u, cf, u.size() - cf));
                Wires out;
                for (std::size_t j = 0; j < xf.size(); ++j)
                  out.push_back(b.emit("add", {xf[j], xg[j]}, 1, true)[0]);
                return out;
              }};
    }
    case K::ForkI: {
      auto pa = b.fan_out(pin, t->kids.size(), false);
      Wires pout;
      std::vector<Thunk> rs;
      std::vector<std::size_t> cods;
      for (std::size_t i = 0; i < t->kids.size(); ++i) {
        PR k = build_rev(b, t->kids[i], pa[i]);
        pout = concat(pout, k.p);
        rs.push_back(k.r);
        cods.push_back(t->kids[i]->cod.dim());
      }
      return {pout, [&b, rs, cods](const Wires& u) {
                std::vector<Wires> xs;
                std::size_t from = 0;
                for (std::size_t i = 0; i < rs.size(); ++i) {
                  xs.push_back(rs[i](slice(u, from, cods[i])));
                  from += cods[i];
                }
                Wires out;
                for (std::size_t j = 0; j < xs[0].size(); ++j) {
                  Wires ins;
                  for (const auto& x : xs) ins.push_back(x[j]);
                  out.push_back(b.emit("add", std::move(ins), 1, true)[0]);
                }
                return out;
              }};
    }
    case K::Exl: {
      std::size_t nf = t->dom.fst().dim(), ns = t->dom.snd().dim();
      return {slice(pin, 0, nf), [&b, ns](const Wires& u) {
                Wires out = u;
                for (std::size_t j = 0; j < ns; ++j) out.push_back(b.zero());
                return out;
              }};
    }
    case K::Exr: {
      std::size_t nf = t->dom.fst().dim(), ns = t->dom.snd().dim();
      return {slice(pin, nf, ns), [&b, nf](const Wires& u) {
                Wires out;
                for (std::size_t j = 0; j < nf; ++j) out.push_back(b.zero());
                return concat(out, u);
              }};
    }
    case K::ExI: {
      std::size_t d = t->cod.dim(), n = t->dom.len(), i = t->index;
      return {slice(pin, i * d, d), [&b, d, n, i](const Wires& u) {
                Wires out;
                for (std::size_t s = 0; s < n; ++s)
                  for (std::size_t j = 0; j < d; ++j)
                    out.push_back(s == i ? u[j] : b.zero());
                return out;
              }};
    }
    case K::Dup: {
      auto pa = b.fan_out(pin, 2, false);
      std::size_t d = t->dom.dim();
      return {concat(pa[0], pa[1]), [&b, d](const Wires& u) {
                Wires out;
                for (std::size_t j = 0; j < d; ++j)
                  out.push_back(b.emit("add", {u[j], u[d + j]}, 1, true)[0]);
                return out;
              }};
    }
    case K::ReplI: {
      std::size_t n = t->cod.len(), d = t->dom.dim();
      auto pa = b.fan_out(pin, n, false);
      Wires pout;
      for (auto& a : pa) pout = concat(pout, a);
      return {pout,
              [&b, n, d](const Wires& u) { return b.fan_in(u, n, d, true); }};
    }
    case K::JamI: {
      std::size_t n = t->dom.len(), d = t->cod.dim();
      return {b.fan_in(pin, n, d, false), [&b, n, d](const Wires& u) {
                auto arms = b.fan_out(u, n, true);
                Wires out;
                for (auto& a : arms) out = concat(out, a);
                return out;
              }};
    }
    case K::It: {
      std::size_t d = t->dom.dim();
      return {{}, [&b, d](const Wires&) {
                Wires out;
                for (std::size_t j = 0; j < d; ++j) out.push_back(b.zero());
                return out;
              }};
    }
    case K::AddC:
      return {b.emit("add", pin, 1, false), [&b](const Wires& u) {
                return b.emit("dup", {u[0]}, 2, true);
              }};
    case K::NegC:
      return {b.emit("neg", pin, 1, false), [&b](const Wires& u) {
                return b.emit("neg", {u[0]}, 1, true);
              }};
    case K::MulC: {
      auto a = b.tap(pin[0]);
      auto c = b.tap(pin[1]);
      Wires y = b.emit("mul", {a.first, c.first}, 1, false);
      return {y, [&b, as = a.second, cs = c.second](const Wires& u) {
                Wires uu = b.emit("dup", {u[0]}, 2, true);
                Wires ca = b.emit("scale", {cs, uu[0]}, 1, true);
                Wires cb = b.emit("scale", {as, uu[1]}, 1, true);
                return Wires{ca[0], cb[0]};
              }};
    }
    case K::SinC: {
      auto a = b.tap(pin[0]);
      Wires y = b.emit("sin", {a.first}, 1, false);
      return {y, [&b, as = a.second](const Wires& u) {
                Wires c = b.emit("cos", {as}, 1, true);
                return b.emit("scale", {c[0], u[0]}, 1, true);
              }};
    }
    case K::CosC: {
      auto a = b.tap(pin[0]);
      Wires y = b.emit("cos", {a.first}, 1, false);
      return {y, [&b, as = a.second](const Wires& u) {
                Wires s = b.emit("sin", {as}, 1, true);
                Wires ns = b.emit("neg", {s[0]}, 1, true);
                return b.emit("scale", {ns[0], u[0]}, 1, true);
              }};
    }
    case K::ExpC: {
      Wires y0 = b.emit("exp", {pin[0]}, 1, false);
      auto y = b.tap(y0[0]);
      return {{y.first}, [&b, ys = y.second](const Wires& u) {
                return b.emit("scale", {ys, u[0]}, 1, true);
              }};
    }
    case K::Const: {
      expect_scalar_const(t);
      Wires y = b.emit("const " + show_value(t->cval), {}, 1, false);
      std::size_t d = t->dom.dim();
      return {y, [&b, d](const Wires&) {
                Wires out;
                for (std::size_t j = 0; j < d; ++j) out.push_back(b.zero());
                return out;
              }};
    }
  }
  throw CatError("to_graph_d: unhandled term");
}

// ---------------------------------------------------------------------------
// Pruning. All passes are deterministic scans; the driver below runs them to
// a fixpoint.

std::vector<std::size_t> producer_map(const PortGraph& g) {
  std::vector<std::size_t> prod(g.wire_count, kNone);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (auto o : g.nodes[i].outs) prod[o] = i;
  return prod;
}

bool is_zero_fed(const PortGraph& g, const std::vector<std::size_t>& prod,
                 std::size_t w) {
  return prod[w] != kNone && g.nodes[prod[w]].label == "zero";
}

// Redirects the single consumer of wire `from` to read wire `to` instead.
void rewire(PortGraph& g, std::size_t from, std::size_t to) {
  for (auto& n : g.nodes)
    for (auto& w : n.ins)
      if (w == from) {
        w = to;
        return;
      }
  for (auto& w : g.outputs)
    if (w == from) {
      w = to;
      return;
    }
  for (auto& w : g.d_outputs)
    if (w == from) {
      w = to;
      return;
    }
}

// Drops nodes none of whose results reach an output.
bool pass_liveness(PortGraph& g) {
  std::vector<char> needed(g.wire_count, 0);
  std::vector<char> live(g.nodes.size(), 0);
  for (auto w : g.outputs) needed[w] = 1;
  for (auto w : g.d_outputs) needed[w] = 1;
  for (bool ch = true; ch;) {
    ch = false;
    for (std::size_t i = g.nodes.size(); i-- > 0;) {
      if (live[i]) continue;
      bool l = false;
      for (auto o : g.nodes[i].outs) l = l || needed[o];
      if (!l) continue;
      live[i] = 1;
      ch = true;
      for (auto w : g.nodes[i].ins) needed[w] = 1;
    }
  }
  std::vector<GraphNode> kept;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (live[i]) kept.push_back(std::move(g.nodes[i]));
  bool changed = kept.size() != g.nodes.size();
  g.nodes = std::move(kept);
  return changed;
}

// A fan-out with a single remaining consumer is just a wire.
bool pass_dup_collapse(PortGraph& g) {
  std::vector<char> consumed(g.wire_count, 0);
  for (const auto& n : g.nodes)
    for (auto w : n.ins) consumed[w] = 1;
  for (auto w : g.outputs) consumed[w] = 1;
  for (auto w : g.d_outputs) consumed[w] = 1;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].label != "dup") continue;
    Wires liveouts;
    for (auto o : g.nodes[i].outs)
      if (consumed[o]) liveouts.push_back(o);
    if (liveouts.size() != 1) continue;
    std::size_t in = g.nodes[i].ins[0];
    std::size_t out = liveouts[0];
    g.nodes.erase(g.nodes.begin() + static_cast<std::ptrdiff_t>(i));
    rewire(g, out, in);
    return true;
  }
  return false;
}

// Additions forget inputs that are structurally zero; a one-input addition
// is a wire; a zero-input addition is itself zero.
bool pass_add_absorb(PortGraph& g) {
  auto prod = producer_map(g);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    auto& n = g.nodes[i];
    if (n.label != "add") continue;
    Wires kept;
    for (auto w : n.ins)
      if (!is_zero_fed(g, prod, w)) kept.push_back(w);
    if (kept.size() == n.ins.size() && kept.size() > 1) continue;
    if (kept.size() == 1) {
      std::size_t out = n.outs[0];
      std::size_t in = kept[0];
      g.nodes.erase(g.nodes.begin() + static_cast<std::ptrdiff_t>(i));
      rewire(g, out, in);
    } else if (kept.empty()) {
      n.label = "zero";
      n.ins.clear();
    } else {
      n.ins = std::move(kept);
    }
    return true;
  }
  return false;
}

// Zero propagates forward through the linear derivative ops.
bool pass_zero_prop(PortGraph& g) {
  auto prod = producer_map(g);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    auto& n = g.nodes[i];
    bool fires = (n.label == "neg" && is_zero_fed(g, prod, n.ins[0])) ||
                 (n.label == "scale" && is_zero_fed(g, prod, n.ins[1]));
    if (fires) {
      n.label = "zero";
      n.ins.clear();
      return true;
    }
    if (n.label == "dup" && is_zero_fed(g, prod, n.ins[0])) {
      bool boxed = n.boxed;
      Wires outs = n.outs;
      g.nodes.erase(g.nodes.begin() + static_cast<std::ptrdiff_t>(i));
      for (auto o : outs) {
        GraphNode z;
        z.label = "zero";
        z.boxed = boxed;
        z.outs.push_back(g.fresh());
        g.nodes.push_back(z);
        rewire(g, o, z.outs[0]);
      }
      return true;
    }
  }
  return false;
}

void prune(PortGraph& g) {
  for (bool ch = true; ch;) {
    ch = false;
    ch = pass_liveness(g) || ch;
    ch = pass_dup_collapse(g) || ch;
    ch = pass_add_absorb(g) || ch;
    ch = pass_zero_prop(g) || ch;
  }
}

Wires fresh_wires(Builder& b, std::size_t n) {
  Wires w;
  for (std::size_t i = 0; i < n; ++i) w.push_back(b.g.fresh());
  return w;
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::size_t count_nodes(const PortGraph& g, const std::string& label) {
  std::size_t n = 0;
  for (const auto& node : g.nodes) n += node.label == label;
  return n;
}

std::size_t count_box_nodes(const PortGraph& g, const std::string& label) {
  std::size_t n = 0;
  for (const auto& node : g.nodes) n += node.boxed && node.label == label;
  return n;
}

std::size_t total_box_nodes(const PortGraph& g) {
  std::size_t n = 0;
  for (const auto& node : g.nodes) n += node.boxed;
  return n;
}

PortGraph to_graph(const TermPtr& t) {
  Builder b;
  b.g.inputs = fresh_wires(b, t->dom.dim());
  b.g.outputs = build_plain(b, t, b.g.inputs);
  prune(b.g);
  return std::move(b.g);
}

PortGraph to_graph_d(const TermPtr& t, DerivMode mode) {
  Builder b;
  b.g.inputs = fresh_wires(b, t->dom.dim());
  if (mode == DerivMode::Forward) {
    b.g.d_inputs = fresh_wires(b, t->dom.dim());
    PW out = build_fwd(b, t, b.g.inputs, b.g.d_inputs);
    b.g.outputs = out.p;
    b.g.d_outputs = out.d;
    b.g.box_label = "derivative (forward)";
    b.g.d_in_name = "dx";
    b.g.d_out_name = "dy";
  } else {
    PR out = build_rev(b, t, b.g.inputs);
    b.g.outputs = out.p;
    b.g.d_inputs = fresh_wires(b, t->cod.dim());
    b.g.d_outputs = out.r(b.g.d_inputs);
    b.g.box_label =
        mode == DerivMode::Dual ? "derivative (dual)" : "derivative (cont)";
    b.g.d_in_name = "dy";
    b.g.d_out_name = "dx";
  }
  prune(b.g);
  return std::move(b.g);
}

std::string emit_dot(const PortGraph& g) {
  // endpoint name of each wire's producer
  std::vector<std::string> ep(g.wire_count);
  for (std::size_t i = 0; i < g.inputs.size(); ++i)
    ep[g.inputs[i]] = "i" + std::to_string(i);
  for (std::size_t i = 0; i < g.d_inputs.size(); ++i)
    ep[g.d_inputs[i]] = "di" + std::to_string(i);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (auto o : g.nodes[i].outs) ep[o] = "n" + std::to_string(i);

  bool boxed_any = !g.d_inputs.empty() || !g.d_outputs.empty();
  for (const auto& n : g.nodes) boxed_any = boxed_any || n.boxed;

  std::ostringstream o;
  o << "digraph G {\n  rankdir=LR;\n  node [shape=box];\n";
  for (std::size_t i = 0; i < g.inputs.size(); ++i)
    o << "  i" << i << " [label=\"x" << i << "\", shape=plaintext];\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (!g.nodes[i].boxed)
      o << "  n" << i << " [label=\"" << dot_escape(g.nodes[i].label)
        << "\"];\n";
  for (std::size_t i = 0; i < g.outputs.size(); ++i)
    o << "  o" << i << " [label=\"y" << i << "\", shape=plaintext];\n";
  if (boxed_any) {
    o << "  subgraph cluster_d {\n    label=\"" << dot_escape(g.box_label)
      << "\";\n    style=rounded;\n";
    for (std::size_t i = 0; i < g.d_inputs.size(); ++i)
      o << "    di" << i << " [label=\"" << g.d_in_name << i
        << "\", shape=plaintext];\n";
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      if (g.nodes[i].boxed)
        o << "    n" << i << " [label=\"" << dot_escape(g.nodes[i].label)
          << "\"];\n";
    for (std::size_t i = 0; i < g.d_outputs.size(); ++i)
      o << "    do" << i << " [label=\"" << g.d_out_name << i
        << "\", shape=plaintext];\n";
    o << "  }\n";
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (auto w : g.nodes[i].ins)
      o << "  " << ep[w] << " -> n" << i << " [label=\"R\"];\n";
  for (std::size_t i = 0; i < g.outputs.size(); ++i)
    o << "  " << ep[g.outputs[i]] << " -> o" << i << " [label=\"R\"];\n";
  for (std::size_t i = 0; i < g.d_outputs.size(); ++i)
    o << "  " << ep[g.d_outputs[i]] << " -> do" << i << " [label=\"R\"];\n";
  o << "}\n";
  return o.str();
}

}  // namespace catgrad
