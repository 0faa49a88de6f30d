#include "catgrad/expr.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <utility>

namespace catgrad {

namespace {

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

ExprPtr with_pos(const ExprPtr& e, int line, int col) {
  Expr copy = *e;
  copy.line = line;
  copy.col = col;
  return node(std::move(copy));
}

}  // namespace

ExprPtr mk_var(std::string name) {
  return node({Expr::Kind::Var, 0, 0, std::move(name), 0.0, 0, {}});
}
ExprPtr mk_lit(double v) {
  return node({Expr::Kind::Lit, 0, 0, "", v, 0, {}});
}
ExprPtr mk_pair(ExprPtr a, ExprPtr b) {
  return node(
      {Expr::Kind::Pair, 0, 0, "", 0.0, 0, {std::move(a), std::move(b)}});
}
ExprPtr mk_fst(ExprPtr e) {
  return node({Expr::Kind::Fst, 0, 0, "", 0.0, 0, {std::move(e)}});
}
ExprPtr mk_snd(ExprPtr e) {
  return node({Expr::Kind::Snd, 0, 0, "", 0.0, 0, {std::move(e)}});
}
ExprPtr mk_neg(ExprPtr e) {
  return node({Expr::Kind::Neg, 0, 0, "", 0.0, 0, {std::move(e)}});
}
ExprPtr mk_add(ExprPtr a, ExprPtr b) {
  return node(
      {Expr::Kind::Add, 0, 0, "", 0.0, 0, {std::move(a), std::move(b)}});
}
ExprPtr mk_sub(ExprPtr a, ExprPtr b) {
  return node(
      {Expr::Kind::Sub, 0, 0, "", 0.0, 0, {std::move(a), std::move(b)}});
}
ExprPtr mk_mul(ExprPtr a, ExprPtr b) {
  return node(
      {Expr::Kind::Mul, 0, 0, "", 0.0, 0, {std::move(a), std::move(b)}});
}
ExprPtr mk_sin(ExprPtr e) {
  return node({Expr::Kind::Sin, 0, 0, "", 0.0, 0, {std::move(e)}});
}
ExprPtr mk_cos(ExprPtr e) {
  return node({Expr::Kind::Cos, 0, 0, "", 0.0, 0, {std::move(e)}});
}
ExprPtr mk_exp(ExprPtr e) {
  return node({Expr::Kind::Exp, 0, 0, "", 0.0, 0, {std::move(e)}});
}
ExprPtr mk_let(std::string name, ExprPtr bound, ExprPtr body) {
  return node({Expr::Kind::Let,
               0,
               0,
               std::move(name),
               0.0,
               0,
               {std::move(bound), std::move(body)}});
}
ExprPtr mk_vec(std::vector<ExprPtr> items) {
  return node({Expr::Kind::Vec, 0, 0, "", 0.0, 0, std::move(items)});
}
ExprPtr mk_idx(ExprPtr e, std::size_t i) {
  return node({Expr::Kind::Idx, 0, 0, "", 0.0, i, {std::move(e)}});
}
ExprPtr mk_sum(ExprPtr e) {
  return node({Expr::Kind::Sum, 0, 0, "", 0.0, 0, {std::move(e)}});
}

PatternPtr mk_pvar(std::string name) {
  return std::make_shared<const Pattern>(
      Pattern{Pattern::Kind::Var, 0, 0, std::move(name), {}});
}
PatternPtr mk_ppair(PatternPtr a, PatternPtr b) {
  return std::make_shared<const Pattern>(
      Pattern{Pattern::Kind::Pair, 0, 0, "", {std::move(a), std::move(b)}});
}
PatternPtr mk_pvec(std::vector<PatternPtr> items) {
  return std::make_shared<const Pattern>(
      Pattern{Pattern::Kind::Vec, 0, 0, "", std::move(items)});
}
PatternPtr mk_punit() {
  return std::make_shared<const Pattern>(
      Pattern{Pattern::Kind::Unit, 0, 0, "", {}});
}

// ---------------------------------------------------------------------------
// Lexer.

namespace {

enum class Tk {
  Backslash,
  Arrow,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Plus,
  Minus,
  Star,
  Equal,
  Ident,
  Number,
  Nat,  // bare digit run right after '.', a projection index
  End
};

struct Token {
  Tk kind;
  std::string text;
  double num = 0.0;
  std::size_t nat = 0;
  int line = 1, col = 1;
};

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto simple = [&](Tk k) {
    out.push_back({k, "", 0.0, 0, line, col});
    ++i;
    ++col;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (ident_start(c)) {
      int tc = col;
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tk::Ident, text.substr(i, j - i), 0.0, 0, line, tc});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (digit(c)) {
      int tc = col;
      // Right after '.', digits are a projection index, so "v.0.1" indexes
      // twice instead of reading a float 0.1.
      if (!out.empty() && out.back().kind == Tk::Dot) {
        std::size_t j = i;
        std::size_t n = 0;
        while (j < text.size() && digit(text[j])) {
          n = n * 10 + static_cast<std::size_t>(text[j] - '0');
          ++j;
        }
        out.push_back({Tk::Nat, text.substr(i, j - i), 0.0, n, line, tc});
        col += static_cast<int>(j - i);
        i = j;
        continue;
      }
      double v = 0.0;
      auto res = std::from_chars(text.data() + i, text.data() + text.size(), v,
                                 std::chars_format::general);
      std::size_t len = static_cast<std::size_t>(res.ptr - (text.data() + i));
      out.push_back({Tk::Number, text.substr(i, len), v, 0, line, tc});
      col += static_cast<int>(len);
      i += len;
      continue;
    }
    switch (c) {
      case '\\':
        simple(Tk::Backslash);
        continue;
      case '(':
        simple(Tk::LParen);
        continue;
      case ')':
        simple(Tk::RParen);
        continue;
      case '[':
        simple(Tk::LBracket);
        continue;
      case ']':
        simple(Tk::RBracket);
        continue;
      case ',':
        simple(Tk::Comma);
        continue;
      case '.':
        simple(Tk::Dot);
        continue;
      case '+':
        simple(Tk::Plus);
        continue;
      case '*':
        simple(Tk::Star);
        continue;
      case '=':
        simple(Tk::Equal);
        continue;
      case '-':
        if (i + 1 < text.size() && text[i + 1] == '>') {
          out.push_back({Tk::Arrow, "->", 0.0, 0, line, col});
          i += 2;
          col += 2;
        } else {
          simple(Tk::Minus);
        }
        continue;
      default:
        throw LangError(std::string("unexpected character '") + c + "'", line,
                        col);
    }
  }
  out.push_back({Tk::End, "", 0.0, 0, line, col});
  return out;
}

// ---------------------------------------------------------------------------
// Parser.

const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"let", "in",  "sin", "cos", "exp",
                                           "neg", "fst", "snd", "sum"};
  return kw;
}

struct Parser {
  const std::vector<Token>& ts;
  std::size_t pos = 0;

  const Token& peek() const { return ts[pos]; }
  const Token& eat() { return ts[pos == ts.size() - 1 ? pos : pos++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw LangError(msg, t.line, t.col);
  }
  const Token& expect(Tk k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what);
    return eat();
  }

  std::string expect_name(const char* what) {
    if (peek().kind != Tk::Ident || keywords().count(peek().text))
      fail(std::string("expected ") + what);
    return eat().text;
  }

  PatternPtr parse_pattern() {
    const Token& t = peek();
    if (t.kind == Tk::Ident && !keywords().count(t.text)) {
      eat();
      Pattern p{Pattern::Kind::Var, t.line, t.col, t.text, {}};
      return std::make_shared<const Pattern>(std::move(p));
    }
    if (t.kind == Tk::LParen) {
      eat();
      if (peek().kind == Tk::RParen) {
        eat();
        Pattern p{Pattern::Kind::Unit, t.line, t.col, "", {}};
        return std::make_shared<const Pattern>(std::move(p));
      }
      PatternPtr a = parse_pattern();
      expect(Tk::Comma, "',' in pair pattern");
      PatternPtr b = parse_pattern();
      expect(Tk::RParen, "')'");
      Pattern p{Pattern::Kind::Pair, t.line, t.col, "",
                {std::move(a), std::move(b)}};
      return std::make_shared<const Pattern>(std::move(p));
    }
    if (t.kind == Tk::LBracket) {
      eat();
      std::vector<PatternPtr> kids;
      kids.push_back(parse_pattern());
      while (peek().kind == Tk::Comma) {
        eat();
        kids.push_back(parse_pattern());
      }
      expect(Tk::RBracket, "']'");
      Pattern p{Pattern::Kind::Vec, t.line, t.col, "", std::move(kids)};
      return std::make_shared<const Pattern>(std::move(p));
    }
    fail("expected pattern");
  }

  ExprPtr parse_expr() { return parse_additive(); }

  ExprPtr parse_additive() {
    ExprPtr e = parse_multiplicative();
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tk::Plus) {
        eat();
        e = with_pos(mk_add(e, parse_multiplicative()), t.line, t.col);
      } else if (t.kind == Tk::Minus) {
        eat();
        // a - b reads as a + neg b from here on
        ExprPtr rhs = parse_multiplicative();
        e = with_pos(mk_add(e, with_pos(mk_neg(rhs), t.line, t.col)), t.line,
                     t.col);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_multiplicative() {
    ExprPtr e = parse_application();
    while (peek().kind == Tk::Star) {
      const Token t = eat();
      e = with_pos(mk_mul(e, parse_application()), t.line, t.col);
    }
    return e;
  }

  ExprPtr parse_application() {
    const Token& t = peek();
    if (t.kind == Tk::Ident && keywords().count(t.text) && t.text != "let" &&
        t.text != "in") {
      eat();
      ExprPtr arg = parse_application();
      ExprPtr e;
      if (t.text == "sin")
        e = mk_sin(std::move(arg));
      else if (t.text == "cos")
        e = mk_cos(std::move(arg));
      else if (t.text == "exp")
        e = mk_exp(std::move(arg));
      else if (t.text == "neg")
        e = mk_neg(std::move(arg));
      else if (t.text == "fst")
        e = mk_fst(std::move(arg));
      else if (t.text == "snd")
        e = mk_snd(std::move(arg));
      else
        e = mk_sum(std::move(arg));
      return with_pos(e, t.line, t.col);
    }
    return parse_postfix();
  }

  ExprPtr parse_postfix() {
    ExprPtr e = parse_primary();
    while (peek().kind == Tk::Dot) {
      const Token t = eat();
      if (peek().kind != Tk::Nat) fail("expected index after '.'");
      std::size_t i = eat().nat;
      e = with_pos(mk_idx(e, i), t.line, t.col);
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    if (t.kind == Tk::Number) {
      eat();
      return with_pos(mk_lit(t.num), t.line, t.col);
    }
    if (t.kind == Tk::Ident && t.text == "let") {
      eat();
      std::string name = expect_name("name after 'let'");
      expect(Tk::Equal, "'='");
      ExprPtr bound = parse_expr();
      if (peek().kind != Tk::Ident || peek().text != "in") fail("expected 'in'");
      eat();
      ExprPtr body = parse_expr();
      return with_pos(mk_let(std::move(name), std::move(bound), std::move(body)),
                      t.line, t.col);
    }
    if (t.kind == Tk::Ident && !keywords().count(t.text)) {
      eat();
      return with_pos(mk_var(t.text), t.line, t.col);
    }
    if (t.kind == Tk::LParen) {
      eat();
      ExprPtr a = parse_expr();
      if (peek().kind == Tk::Comma) {
        eat();
        ExprPtr b = parse_expr();
        expect(Tk::RParen, "')'");
        return with_pos(mk_pair(std::move(a), std::move(b)), t.line, t.col);
      }
      expect(Tk::RParen, "')'");
      return a;
    }
    if (t.kind == Tk::LBracket) {
      eat();
      std::vector<ExprPtr> items;
      items.push_back(parse_expr());
      while (peek().kind == Tk::Comma) {
        eat();
        items.push_back(parse_expr());
      }
      expect(Tk::RBracket, "']'");
      return with_pos(mk_vec(std::move(items)), t.line, t.col);
    }
    fail("expected expression");
  }
};

// ---------------------------------------------------------------------------
// Scope check and alpha-normalization.

void collect_pattern_names(const PatternPtr& p,
                           std::map<std::string, std::string>& env,
                           std::set<std::string>& used) {
  switch (p->kind) {
    case Pattern::Kind::Var:
      if (!used.insert(p->name).second)
        throw LangError("duplicate name '" + p->name + "' in pattern", p->line,
                        p->col);
      env.emplace(p->name, p->name);
      break;
    case Pattern::Kind::Pair:
    case Pattern::Kind::Vec:
      for (const auto& k : p->kids) collect_pattern_names(k, env, used);
      break;
    case Pattern::Kind::Unit:
      break;
  }
}

// Rebuild with every variable bound and binders renamed apart. '#' cannot
// appear in a source identifier, so fresh names never collide with input.
ExprPtr resolve(const ExprPtr& e, std::map<std::string, std::string>& env,
                std::set<std::string>& used) {
  switch (e->kind) {
    case Expr::Kind::Var: {
      auto it = env.find(e->name);
      if (it == env.end())
        throw LangError("unbound variable '" + e->name + "'", e->line, e->col);
      if (it->second == e->name) return e;
      Expr copy = *e;
      copy.name = it->second;
      return node(std::move(copy));
    }
    case Expr::Kind::Let: {
      ExprPtr bound = resolve(e->kids[0], env, used);
      std::string unique = e->name;
      for (int k = 2; used.count(unique); ++k)
        unique = e->name + "#" + std::to_string(k);
      used.insert(unique);
      auto saved = env.find(e->name) != env.end()
                       ? std::optional<std::string>(env[e->name])
                       : std::nullopt;
      env[e->name] = unique;
      ExprPtr body = resolve(e->kids[1], env, used);
      if (saved)
        env[e->name] = *saved;
      else
        env.erase(e->name);
      Expr copy = *e;
      copy.name = unique;
      copy.kids = {std::move(bound), std::move(body)};
      return node(std::move(copy));
    }
    default: {
      if (e->kids.empty()) return e;
      Expr copy = *e;
      for (auto& k : copy.kids) k = resolve(k, env, used);
      return node(std::move(copy));
    }
  }
}

}  // namespace

Lambda parse_lambda(const std::string& text) {
  std::vector<Token> ts = lex(text);
  Parser p{ts};
  p.expect(Tk::Backslash, "'\\' to open the lambda");
  PatternPtr param = p.parse_pattern();
  p.expect(Tk::Arrow, "'->'");
  ExprPtr body = p.parse_expr();
  if (p.peek().kind != Tk::End) p.fail("unexpected trailing input");

  std::map<std::string, std::string> env;
  std::set<std::string> used;
  collect_pattern_names(param, env, used);
  return {std::move(param), resolve(body, env, used)};
}

// ---------------------------------------------------------------------------
// Shape inference.

namespace {

using ShapeEnv = std::map<std::string, Shape>;

void bind_shapes(const PatternPtr& p, const Shape& s, ShapeEnv& env) {
  switch (p->kind) {
    case Pattern::Kind::Var:
      env.insert_or_assign(p->name, s);
      break;
    case Pattern::Kind::Pair:
      if (!s.is_pair())
        throw LangError("pattern expects a pair, argument is " + show_shape(s),
                        p->line, p->col);
      bind_shapes(p->kids[0], s.fst(), env);
      bind_shapes(p->kids[1], s.snd(), env);
      break;
    case Pattern::Kind::Vec:
      if (!s.is_vec() || s.len() != p->kids.size())
        throw LangError("pattern expects a vector of length " +
                            std::to_string(p->kids.size()) + ", argument is " +
                            show_shape(s),
                        p->line, p->col);
      for (const auto& k : p->kids) bind_shapes(k, s.elem(), env);
      break;
    case Pattern::Kind::Unit:
      if (!s.is_unit())
        throw LangError("pattern expects the unit, argument is " +
                            show_shape(s),
                        p->line, p->col);
      break;
  }
}

const char* op_label(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::Neg:
      return "neg";
    case Expr::Kind::Add:
      return "'+'";
    case Expr::Kind::Sub:
      return "'-'";
    case Expr::Kind::Mul:
      return "'*'";
    case Expr::Kind::Sin:
      return "sin";
    case Expr::Kind::Cos:
      return "cos";
    case Expr::Kind::Exp:
      return "exp";
    default:
      return "?";
  }
}

Shape infer(const ExprPtr& e, ShapeEnv& env) {
  using K = Expr::Kind;
  auto scalar_arg = [&](const ExprPtr& arg) {
    Shape s = infer(arg, env);
    if (!s.is_scalar())
      throw LangError(std::string(op_label(e->kind)) + " expects a scalar, " +
                          "got " + show_shape(s),
                      arg->line, arg->col);
  };
  switch (e->kind) {
    case K::Var:
      return env.at(e->name);  // resolve() guarantees the binding exists
    case K::Lit:
      return Shape::scalar();
    case K::Pair:
      return Shape::pair(infer(e->kids[0], env), infer(e->kids[1], env));
    case K::Fst: {
      Shape s = infer(e->kids[0], env);
      if (!s.is_pair())
        throw LangError("fst expects a pair, got " + show_shape(s), e->line,
                        e->col);
      return s.fst();
    }
    case K::Snd: {
      Shape s = infer(e->kids[0], env);
      if (!s.is_pair())
        throw LangError("snd expects a pair, got " + show_shape(s), e->line,
                        e->col);
      return s.snd();
    }
    case K::Neg:
    case K::Sin:
    case K::Cos:
    case K::Exp:
      scalar_arg(e->kids[0]);
      return Shape::scalar();
    case K::Add:
    case K::Sub:
    case K::Mul:
      scalar_arg(e->kids[0]);
      scalar_arg(e->kids[1]);
      return Shape::scalar();
    case K::Let: {
      Shape s = infer(e->kids[0], env);
      env.insert_or_assign(e->name, s);
      Shape out = infer(e->kids[1], env);
      env.erase(e->name);  // names are unique after alpha-normalization
      return out;
    }
    case K::Vec: {
      Shape first = infer(e->kids[0], env);
      for (std::size_t i = 1; i < e->kids.size(); ++i) {
        Shape s = infer(e->kids[i], env);
        if (s != first)
          throw LangError("vector elements must share a shape: " +
                              show_shape(first) + " vs " + show_shape(s),
                          e->kids[i]->line, e->kids[i]->col);
      }
      return Shape::vec(e->kids.size(), first);
    }
    case K::Idx: {
      Shape s = infer(e->kids[0], env);
      if (!s.is_vec())
        throw LangError("'.i' expects a vector, got " + show_shape(s), e->line,
                        e->col);
      if (e->index >= s.len())
        throw LangError("index " + std::to_string(e->index) +
                            " out of range for " + show_shape(s),
                        e->line, e->col);
      return s.elem();
    }
    case K::Sum: {
      Shape s = infer(e->kids[0], env);
      if (!s.is_vec())
        throw LangError("sum expects a vector, got " + show_shape(s), e->line,
                        e->col);
      return s.elem();
    }
  }
  throw CatError("infer: bad expression node");
}

}  // namespace

Shape infer_shape(const Lambda& fn, const Shape& arg) {
  ShapeEnv env;
  bind_shapes(fn.param, arg, env);
  return infer(fn.body, env);
}

// ---------------------------------------------------------------------------
// Term builders.

namespace {

TermPtr tnode(CatTerm t) { return std::make_shared<const CatTerm>(std::move(t)); }

using TK = CatTerm::Kind;

}  // namespace

TermPtr t_id(const Shape& a) { return tnode({TK::Id, a, a, {}, {}, 0}); }

TermPtr t_compose(TermPtr g, TermPtr f) {
  if (f->cod != g->dom)
    throw CatError("t_compose: middle shapes disagree: " + show_shape(f->cod) +
                   " vs " + show_shape(g->dom));
  Shape dom = f->dom, cod = g->cod;
  return tnode(
      {TK::Compose, dom, cod, {std::move(g), std::move(f)}, {}, 0});
}

TermPtr t_cross(TermPtr f, TermPtr g) {
  Shape dom = Shape::pair(f->dom, g->dom), cod = Shape::pair(f->cod, g->cod);
  return tnode({TK::Cross, dom, cod, {std::move(f), std::move(g)}, {}, 0});
}

TermPtr t_fork(TermPtr f, TermPtr g) {
  if (f->dom != g->dom)
    throw CatError("t_fork: domains disagree: " + show_shape(f->dom) + " vs " +
                   show_shape(g->dom));
  Shape dom = f->dom, cod = Shape::pair(f->cod, g->cod);
  return tnode({TK::Fork, dom, cod, {std::move(f), std::move(g)}, {}, 0});
}

TermPtr t_exl(const Shape& a, const Shape& b) {
  return tnode({TK::Exl, Shape::pair(a, b), a, {}, {}, 0});
}
TermPtr t_exr(const Shape& a, const Shape& b) {
  return tnode({TK::Exr, Shape::pair(a, b), b, {}, {}, 0});
}
TermPtr t_dup(const Shape& a) {
  return tnode({TK::Dup, a, Shape::pair(a, a), {}, {}, 0});
}

namespace {
TermPtr scalar_op(TK k) {
  return tnode({k, Shape::scalar(), Shape::scalar(), {}, {}, 0});
}
TermPtr scalar_op2(TK k) {
  Shape rr = Shape::pair(Shape::scalar(), Shape::scalar());
  return tnode({k, rr, Shape::scalar(), {}, {}, 0});
}
}  // namespace

TermPtr t_add() { return scalar_op2(TK::AddC); }
TermPtr t_mul() { return scalar_op2(TK::MulC); }
TermPtr t_neg() { return scalar_op(TK::NegC); }
TermPtr t_sin() { return scalar_op(TK::SinC); }
TermPtr t_cos() { return scalar_op(TK::CosC); }
TermPtr t_exp() { return scalar_op(TK::ExpC); }

TermPtr t_const(const Shape& dom, Value v) {
  Shape cod = shape_of(v);
  return tnode({TK::Const, dom, cod, {}, std::move(v), 0});
}

TermPtr t_cross_i(std::vector<TermPtr> fs) {
  if (fs.empty()) throw CatError("t_cross_i: need at least one slot");
  for (const auto& f : fs)
    if (f->dom != fs[0]->dom || f->cod != fs[0]->cod)
      throw CatError("t_cross_i: slots must share a type");
  Shape dom = Shape::vec(fs.size(), fs[0]->dom);
  Shape cod = Shape::vec(fs.size(), fs[0]->cod);
  return tnode({TK::CrossI, dom, cod, std::move(fs), {}, 0});
}

TermPtr t_fork_i(std::vector<TermPtr> fs) {
  if (fs.empty()) throw CatError("t_fork_i: need at least one slot");
  for (const auto& f : fs)
    if (f->dom != fs[0]->dom || f->cod != fs[0]->cod)
      throw CatError("t_fork_i: slots must share a type");
  Shape dom = fs[0]->dom;
  Shape cod = Shape::vec(fs.size(), fs[0]->cod);
  return tnode({TK::ForkI, dom, cod, std::move(fs), {}, 0});
}

TermPtr t_ex_i(std::size_t n, const Shape& a, std::size_t i) {
  if (i >= n) throw CatError("t_ex_i: index out of range");
  return tnode({TK::ExI, Shape::vec(n, a), a, {}, {}, i});
}
TermPtr t_repl_i(std::size_t n, const Shape& a) {
  return tnode({TK::ReplI, a, Shape::vec(n, a), {}, {}, 0});
}
TermPtr t_jam_i(std::size_t n, const Shape& a) {
  return tnode({TK::JamI, Shape::vec(n, a), a, {}, {}, 0});
}
TermPtr t_it(const Shape& a) {
  return tnode({TK::It, a, Shape::unit(), {}, {}, 0});
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->dom != b->dom || a->cod != b->cod ||
      a->index != b->index || a->kids.size() != b->kids.size())
    return false;
  if (a->kind == TK::Const && flatten(a->cval) != flatten(b->cval))
    return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!term_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Translation.

namespace {

// Projection chain reaching `name` inside the context pattern. Extended
// contexts put the newest binding on the right, so the right branch is
// searched first; alpha-normalization keeps names unique regardless.
TermPtr lookup_var(const PatternPtr& p, const Shape& sh,
                   const std::string& name) {
  auto through = [](TermPtr inner, TermPtr proj) {
    return inner->kind == TK::Id ? proj
                                 : t_compose(std::move(inner), std::move(proj));
  };
  switch (p->kind) {
    case Pattern::Kind::Var:
      return p->name == name ? t_id(sh) : nullptr;
    case Pattern::Kind::Pair: {
      if (TermPtr r = lookup_var(p->kids[1], sh.snd(), name))
        return through(std::move(r), t_exr(sh.fst(), sh.snd()));
      if (TermPtr l = lookup_var(p->kids[0], sh.fst(), name))
        return through(std::move(l), t_exl(sh.fst(), sh.snd()));
      return nullptr;
    }
    case Pattern::Kind::Vec: {
      for (std::size_t i = p->kids.size(); i-- > 0;)
        if (TermPtr k = lookup_var(p->kids[i], sh.elem(), name))
          return through(std::move(k), t_ex_i(sh.len(), sh.elem(), i));
      return nullptr;
    }
    case Pattern::Kind::Unit:
      return nullptr;
  }
  return nullptr;
}

TermPtr tr(const PatternPtr& p, const Shape& ps, const ExprPtr& e) {
  using K = Expr::Kind;
  switch (e->kind) {
    case K::Var: {
      TermPtr t = lookup_var(p, ps, e->name);
      if (!t) throw LangError("unbound variable '" + e->name + "'", e->line,
                              e->col);
      return t;
    }
    case K::Lit:
      return t_const(ps, Value::scalar(e->lit));
    case K::Pair:
      return t_fork(tr(p, ps, e->kids[0]), tr(p, ps, e->kids[1]));
    case K::Vec: {
      std::vector<TermPtr> fs;
      for (const auto& k : e->kids) fs.push_back(tr(p, ps, k));
      return t_fork_i(std::move(fs));
    }
    case K::Fst: {
      TermPtr c = tr(p, ps, e->kids[0]);
      Shape pr = c->cod;
      return t_compose(t_exl(pr.fst(), pr.snd()), std::move(c));
    }
    case K::Snd: {
      TermPtr c = tr(p, ps, e->kids[0]);
      Shape pr = c->cod;
      return t_compose(t_exr(pr.fst(), pr.snd()), std::move(c));
    }
    case K::Idx: {
      TermPtr c = tr(p, ps, e->kids[0]);
      Shape v = c->cod;
      return t_compose(t_ex_i(v.len(), v.elem(), e->index), std::move(c));
    }
    case K::Sum: {
      TermPtr c = tr(p, ps, e->kids[0]);
      Shape v = c->cod;
      return t_compose(t_jam_i(v.len(), v.elem()), std::move(c));
    }
    case K::Neg:
      return t_compose(t_neg(), tr(p, ps, e->kids[0]));
    case K::Sin:
      return t_compose(t_sin(), tr(p, ps, e->kids[0]));
    case K::Cos:
      return t_compose(t_cos(), tr(p, ps, e->kids[0]));
    case K::Exp:
      return t_compose(t_exp(), tr(p, ps, e->kids[0]));
    case K::Add:
      return t_compose(t_add(),
                       t_fork(tr(p, ps, e->kids[0]), tr(p, ps, e->kids[1])));
    case K::Sub:
      return t_compose(
          t_add(), t_fork(tr(p, ps, e->kids[0]),
                          t_compose(t_neg(), tr(p, ps, e->kids[1]))));
    case K::Mul:
      return t_compose(t_mul(),
                       t_fork(tr(p, ps, e->kids[0]), tr(p, ps, e->kids[1])));
    case K::Let: {
      TermPtr bound = tr(p, ps, e->kids[0]);
      PatternPtr p2 = mk_ppair(p, mk_pvar(e->name));
      Shape ps2 = Shape::pair(ps, bound->cod);
      TermPtr body = tr(p2, ps2, e->kids[1]);
      return t_compose(std::move(body), t_fork(t_id(ps), std::move(bound)));
    }
  }
  throw CatError("translate: bad expression node");
}

}  // namespace

TermPtr translate(const Lambda& fn, const Shape& arg) {
  ShapeEnv env;
  bind_shapes(fn.param, arg, env);  // re-validate the pattern against arg
  return tr(fn.param, arg, fn.body);
}

// ---------------------------------------------------------------------------
// Normalization.

namespace {

using Chain = std::vector<TermPtr>;

// Composition factors left to right (outermost first); identities dropped.
void factors_of(const TermPtr& t, Chain& out) {
  if (t->kind == TK::Compose) {
    factors_of(t->kids[0], out);
    factors_of(t->kids[1], out);
  } else if (t->kind != TK::Id) {
    out.push_back(t);
  }
}

TermPtr rebuild(const Chain& c, const Shape& dom) {
  if (c.empty()) return t_id(dom);
  TermPtr acc = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = t_compose(c[i], acc);
  return acc;
}

TermPtr norm(const TermPtr& t);

// Splice a normalized replacement for c[i..i+len) into the chain.
void splice(Chain& c, std::size_t i, std::size_t len, const TermPtr& repl) {
  Chain mid;
  factors_of(repl, mid);
  c.erase(c.begin() + i, c.begin() + i + len);
  c.insert(c.begin() + i, mid.begin(), mid.end());
}

void reduce_chain(Chain& c) {
  bool again = true;
  while (again) {
    again = false;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      const TermPtr& a = c[i];
      const TermPtr& b = c[i + 1];
      if (a->kind == TK::Exl && b->kind == TK::Fork) {
        splice(c, i, 2, b->kids[0]);
        again = true;
        break;
      }
      if (a->kind == TK::Exr && b->kind == TK::Fork) {
        splice(c, i, 2, b->kids[1]);
        again = true;
        break;
      }
      if (a->kind == TK::Cross && b->kind == TK::Fork) {
        TermPtr fk = norm(t_fork(t_compose(a->kids[0], b->kids[0]),
                                 t_compose(a->kids[1], b->kids[1])));
        splice(c, i, 2, fk);
        again = true;
        break;
      }
    }
  }
}

TermPtr norm(const TermPtr& t) {
  switch (t->kind) {
    case TK::Compose: {
      Chain c;
      factors_of(norm(t->kids[0]), c);
      factors_of(norm(t->kids[1]), c);
      reduce_chain(c);
      return rebuild(c, t->dom);
    }
    case TK::Fork: {
      TermPtr f = norm(t->kids[0]);
      TermPtr g = norm(t->kids[1]);
      if (f->kind == TK::Exl && g->kind == TK::Exr && f->dom == t->dom &&
          g->dom == t->dom)
        return t_id(t->dom);
      // Shared tail: (f . h) fork (g . h) becomes (f fork g) . h. Keep at
      // least one factor per arm so id fork id and friends stay put.
      Chain fc, gc;
      factors_of(f, fc);
      factors_of(g, gc);
      if (!fc.empty() && !gc.empty()) {
        std::size_t common = 0;
        while (common < fc.size() && common < gc.size() &&
               term_equal(fc[fc.size() - 1 - common],
                          gc[gc.size() - 1 - common]))
          ++common;
        std::size_t strip =
            std::min({common, fc.size() - 1, gc.size() - 1});
        if (strip >= 1) {
          Chain tail(fc.end() - strip, fc.end());
          Chain fh(fc.begin(), fc.end() - strip);
          Chain gh(gc.begin(), gc.end() - strip);
          TermPtr tl = rebuild(tail, t->dom);
          TermPtr nf = rebuild(fh, tl->cod);
          TermPtr ng = rebuild(gh, tl->cod);
          return norm(t_compose(t_fork(std::move(nf), std::move(ng)),
                                std::move(tl)));
        }
      }
      return t_fork(std::move(f), std::move(g));
    }
    case TK::Cross:
      return t_cross(norm(t->kids[0]), norm(t->kids[1]));
    case TK::CrossI: {
      std::vector<TermPtr> fs;
      for (const auto& k : t->kids) fs.push_back(norm(k));
      return t_cross_i(std::move(fs));
    }
    case TK::ForkI: {
      std::vector<TermPtr> fs;
      for (const auto& k : t->kids) fs.push_back(norm(k));
      return t_fork_i(std::move(fs));
    }
    default:
      return t;
  }
}

}  // namespace

TermPtr normalize(const TermPtr& t) { return norm(t); }

TermPtr to_cat(const Lambda& fn, const Shape& arg) {
  return normalize(translate(fn, arg));
}

// ---------------------------------------------------------------------------
// Printing.

namespace {

constexpr const char* kCompose = "∘";  // ring operator
constexpr const char* kFork = "△";     // white up-pointing triangle
constexpr const char* kCross = "×";    // multiplication sign

// fork and cross bind looser (1) than composition (2); atoms are tightest.
int prec_of(const TermPtr& t) {
  switch (t->kind) {
    case TK::Fork:
    case TK::Cross:
      return 1;
    case TK::Compose:
      return 2;
    default:
      return 3;
  }
}

std::string show(const TermPtr& t, int min_prec);

std::string show_list(const char* head, const std::vector<TermPtr>& fs) {
  std::string out = head;
  out += "(";
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += ", ";
    out += show(fs[i], 0);
  }
  return out + ")";
}

std::string show(const TermPtr& t, int min_prec) {
  std::string out;
  switch (t->kind) {
    case TK::Id:
      return "id";
    case TK::Exl:
      return "exl";
    case TK::Exr:
      return "exr";
    case TK::Dup:
      return "dup";
    case TK::AddC:
      return "addC";
    case TK::MulC:
      return "mulC";
    case TK::NegC:
      return "negC";
    case TK::SinC:
      return "sinC";
    case TK::CosC:
      return "cosC";
    case TK::ExpC:
      return "expC";
    case TK::It:
      return "it";
    case TK::JamI:
      return "jamI";
    case TK::ReplI:
      return "replI " + std::to_string(t->cod.len());
    case TK::ExI:
      return "exI " + std::to_string(t->index);
    case TK::Const:
      return "const " + show_value(t->cval);
    case TK::CrossI:
      return show_list("crossI", t->kids);
    case TK::ForkI:
      return show_list("forkI", t->kids);
    case TK::Compose:
      out = show(t->kids[0], 2);
      out += " ";
      out += kCompose;
      out += " ";
      out += show(t->kids[1], 2);
      break;
    case TK::Fork:
      out = show(t->kids[0], 2);
      out += " ";
      out += kFork;
      out += " ";
      out += show(t->kids[1], 2);
      break;
    case TK::Cross:
      out = show(t->kids[0], 2);
      out += " ";
      out += kCross;
      out += " ";
      out += show(t->kids[1], 2);
      break;
  }
  if (prec_of(t) < min_prec) return "(" + out + ")";
  return out;
}

}  // namespace

std::string show_cat(const TermPtr& t) { return show(t, 0); }

// ---------------------------------------------------------------------------
// Interpretation.

Morph interpret(const TermPtr& t, const CatPtr& k) {
  switch (t->kind) {
    case TK::Id:
      return k->id(t->dom);
    case TK::Compose:
      return k->compose(interpret(t->kids[0], k), interpret(t->kids[1], k));
    case TK::Cross:
      return k->cross(interpret(t->kids[0], k), interpret(t->kids[1], k));
    case TK::Fork:
      return fork(interpret(t->kids[0], k), interpret(t->kids[1], k));
    case TK::Exl:
      return k->exl(t->dom.fst(), t->dom.snd());
    case TK::Exr:
      return k->exr(t->dom.fst(), t->dom.snd());
    case TK::Dup:
      return k->dup(t->dom);
    case TK::AddC:
      return k->add_c();
    case TK::MulC:
      return k->mul_c();
    case TK::NegC:
      return k->neg_c();
    case TK::SinC:
      return k->sin_c();
    case TK::CosC:
      return k->cos_c();
    case TK::ExpC:
      return k->exp_c();
    case TK::Const:
      if (t->cval.tag() != ValueTag::Scalar)
        throw CatError("interpret: constants are scalar");
      return k->const_c(t->dom, t->cval.num());
    case TK::CrossI: {
      std::vector<Morph> fs;
      for (const auto& kid : t->kids) fs.push_back(interpret(kid, k));
      return k->cross_i(fs);
    }
    case TK::ForkI: {
      std::vector<Morph> fs;
      for (const auto& kid : t->kids) fs.push_back(interpret(kid, k));
      return fork_i(fs);
    }
    case TK::ExI:
      return k->ex_i(t->dom.len(), t->dom.elem(), t->index);
    case TK::ReplI:
      return k->repl_i(t->cod.len(), t->dom);
    case TK::JamI:
      return k->jam_i(t->dom.len(), t->dom.elem());
    case TK::It:
      return k->it(t->dom);
  }
  throw CatError("interpret: bad term node");
}

DFun interpret_d(const TermPtr& t, const CatPtr& k) {
  switch (t->kind) {
    case TK::Id:
      return d_id(k, t->dom);
    case TK::Compose:
      return d_compose(interpret_d(t->kids[0], k), interpret_d(t->kids[1], k));
    case TK::Cross:
      return d_cross(interpret_d(t->kids[0], k), interpret_d(t->kids[1], k));
    case TK::Fork:
      return d_fork(interpret_d(t->kids[0], k), interpret_d(t->kids[1], k));
    case TK::Exl:
      return d_exl(k, t->dom.fst(), t->dom.snd());
    case TK::Exr:
      return d_exr(k, t->dom.fst(), t->dom.snd());
    case TK::Dup:
      return d_dup(k, t->dom);
    case TK::AddC:
      return d_add(k);
    case TK::MulC:
      return d_mul(k);
    case TK::NegC:
      return d_neg(k);
    case TK::SinC:
      return d_sin(k);
    case TK::CosC:
      return d_cos(k);
    case TK::ExpC:
      return d_exp(k);
    case TK::Const:
      if (t->cval.tag() != ValueTag::Scalar)
        throw CatError("interpret_d: constants are scalar");
      return d_const(k, t->dom, t->cval.num());
    case TK::CrossI: {
      std::vector<DFun> fs;
      for (const auto& kid : t->kids) fs.push_back(interpret_d(kid, k));
      return d_cross_i(std::move(fs));
    }
    case TK::ForkI: {
      std::vector<DFun> fs;
      for (const auto& kid : t->kids) fs.push_back(interpret_d(kid, k));
      return d_fork_i(fs);
    }
    case TK::ExI:
      return d_ex_i(k, t->dom.len(), t->dom.elem(), t->index);
    case TK::ReplI:
      return d_repl_i(k, t->cod.len(), t->dom);
    case TK::JamI:
      return d_jam_i(k, t->dom.len(), t->dom.elem());
    case TK::It:
      return d_it(k, t->dom);
  }
  throw CatError("interpret_d: bad term node");
}

}  // namespace catgrad
