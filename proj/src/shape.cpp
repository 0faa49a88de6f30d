#include "catgrad/shape.hpp"

#include <cctype>
#include <charconv>
#include <utility>

namespace catgrad {

Shape Shape::scalar() {
  static const std::shared_ptr<const Node> node = [] {
    auto n = std::make_shared<Node>();
    n->tag = ShapeTag::Scalar;
    n->dim = 1;
    return n;
  }();
  return Shape(node);
}

Shape Shape::unit() {
  static const std::shared_ptr<const Node> node = [] {
    auto n = std::make_shared<Node>();
    n->tag = ShapeTag::Unit;
    n->dim = 0;
    return n;
  }();
  return Shape(node);
}

Shape Shape::pair(Shape first, Shape second) {
  auto n = std::make_shared<Node>();
  n->tag = ShapeTag::Pair;
  n->dim = first.dim() + second.dim();
  n->kids.push_back(std::move(first));
  n->kids.push_back(std::move(second));
  return Shape(std::move(n));
}

Shape Shape::vec(std::size_t len, Shape elem) {
  auto n = std::make_shared<Node>();
  n->tag = ShapeTag::Vec;
  n->len = len;
  n->dim = len * elem.dim();
  n->kids.push_back(std::move(elem));
  return Shape(std::move(n));
}

const Shape& Shape::fst() const {
  if (!is_pair()) throw std::logic_error("Shape::fst on non-pair shape");
  return node_->kids[0];
}

const Shape& Shape::snd() const {
  if (!is_pair()) throw std::logic_error("Shape::snd on non-pair shape");
  return node_->kids[1];
}

std::size_t Shape::len() const {
  if (!is_vec()) throw std::logic_error("Shape::len on non-vector shape");
  return node_->len;
}

const Shape& Shape::elem() const {
  if (!is_vec()) throw std::logic_error("Shape::elem on non-vector shape");
  return node_->kids[0];
}

bool Shape::operator==(const Shape& other) const {
  if (node_ == other.node_) return true;
  if (node_->tag != other.node_->tag) return false;
  switch (node_->tag) {
    case ShapeTag::Scalar:
    case ShapeTag::Unit:
      return true;
    case ShapeTag::Pair:
      return node_->kids[0] == other.node_->kids[0] &&
             node_->kids[1] == other.node_->kids[1];
    case ShapeTag::Vec:
      return node_->len == other.node_->len &&
             node_->kids[0] == other.node_->kids[0];
  }
  return false;
}

Value Value::scalar(double x) {
  auto n = std::make_shared<Node>();
  n->tag = ValueTag::Scalar;
  n->num = x;
  return Value(std::move(n));
}

Value Value::unit() {
  static const std::shared_ptr<const Node> node = [] {
    auto n = std::make_shared<Node>();
    n->tag = ValueTag::Unit;
    return n;
  }();
  return Value(node);
}

Value Value::pair(Value first, Value second) {
  auto n = std::make_shared<Node>();
  n->tag = ValueTag::Pair;
  n->items.push_back(std::move(first));
  n->items.push_back(std::move(second));
  return Value(std::move(n));
}

Value Value::vec(std::vector<Value> items) {
  auto n = std::make_shared<Node>();
  n->tag = ValueTag::Vec;
  n->items = std::move(items);
  return Value(std::move(n));
}

double Value::num() const {
  if (tag() != ValueTag::Scalar)
    throw std::logic_error("Value::num on non-scalar value");
  return node_->num;
}

const Value& Value::fst() const {
  if (tag() != ValueTag::Pair)
    throw std::logic_error("Value::fst on non-pair value");
  return node_->items[0];
}

const Value& Value::snd() const {
  if (tag() != ValueTag::Pair)
    throw std::logic_error("Value::snd on non-pair value");
  return node_->items[1];
}

const std::vector<Value>& Value::items() const {
  if (tag() != ValueTag::Vec)
    throw std::logic_error("Value::items on non-vector value");
  return node_->items;
}

Shape shape_of(const Value& v) {
  switch (v.tag()) {
    case ValueTag::Scalar:
      return Shape::scalar();
    case ValueTag::Unit:
      return Shape::unit();
    case ValueTag::Pair:
      return Shape::pair(shape_of(v.fst()), shape_of(v.snd()));
    case ValueTag::Vec: {
      const auto& items = v.items();
      if (items.empty())
        throw std::logic_error("shape_of: empty vector value has no shape");
      Shape elem = shape_of(items[0]);
      return Shape::vec(items.size(), elem);
    }
  }
  throw std::logic_error("shape_of: unreachable");
}

bool conforms(const Value& v, const Shape& s) {
  switch (s.tag()) {
    case ShapeTag::Scalar:
      return v.tag() == ValueTag::Scalar;
    case ShapeTag::Unit:
      return v.tag() == ValueTag::Unit;
    case ShapeTag::Pair:
      return v.tag() == ValueTag::Pair && conforms(v.fst(), s.fst()) &&
             conforms(v.snd(), s.snd());
    case ShapeTag::Vec: {
      if (v.tag() != ValueTag::Vec || v.items().size() != s.len())
        return false;
      for (const Value& item : v.items())
        if (!conforms(item, s.elem())) return false;
      return true;
    }
  }
  return false;
}

static void flatten_into(const Value& v, std::vector<double>& out) {
  switch (v.tag()) {
    case ValueTag::Scalar:
      out.push_back(v.num());
      return;
    case ValueTag::Unit:
      return;
    case ValueTag::Pair:
      flatten_into(v.fst(), out);
      flatten_into(v.snd(), out);
      return;
    case ValueTag::Vec:
      for (const Value& item : v.items()) flatten_into(item, out);
      return;
  }
}

std::vector<double> flatten(const Value& v) {
  std::vector<double> out;
  flatten_into(v, out);
  return out;
}

static Value unflatten_at(const Shape& s, const std::vector<double>& coords,
                          std::size_t& pos) {
  switch (s.tag()) {
    case ShapeTag::Scalar:
      return Value::scalar(coords[pos++]);
    case ShapeTag::Unit:
      return Value::unit();
    case ShapeTag::Pair: {
      Value a = unflatten_at(s.fst(), coords, pos);
      Value b = unflatten_at(s.snd(), coords, pos);
      return Value::pair(std::move(a), std::move(b));
    }
    case ShapeTag::Vec: {
      std::vector<Value> items;
      items.reserve(s.len());
      for (std::size_t i = 0; i < s.len(); ++i)
        items.push_back(unflatten_at(s.elem(), coords, pos));
      return Value::vec(std::move(items));
    }
  }
  throw std::logic_error("unflatten: unreachable");
}

Value unflatten(const Shape& s, const std::vector<double>& coords) {
  if (coords.size() != s.dim())
    throw std::invalid_argument("unflatten: got " +
                                std::to_string(coords.size()) +
                                " coordinates for shape " + show_shape(s) +
                                " of dimension " + std::to_string(s.dim()));
  std::size_t pos = 0;
  return unflatten_at(s, coords, pos);
}

Value zero_value(const Shape& s) {
  switch (s.tag()) {
    case ShapeTag::Scalar:
      return Value::scalar(0.0);
    case ShapeTag::Unit:
      return Value::unit();
    case ShapeTag::Pair:
      return Value::pair(zero_value(s.fst()), zero_value(s.snd()));
    case ShapeTag::Vec: {
      std::vector<Value> items(s.len(), zero_value(s.elem()));
      return Value::vec(std::move(items));
    }
  }
  throw std::logic_error("zero_value: unreachable");
}

Value basis_value(const Shape& s, std::size_t i) {
  if (i >= s.dim())
    throw std::invalid_argument("basis_value: index " + std::to_string(i) +
                                " out of range for dimension " +
                                std::to_string(s.dim()));
  std::vector<double> coords(s.dim(), 0.0);
  coords[i] = 1.0;
  return unflatten(s, coords);
}

Value value_add(const Value& a, const Value& b) {
  if (a.tag() != b.tag())
    throw std::invalid_argument("value_add: mismatched value structure");
  switch (a.tag()) {
    case ValueTag::Scalar:
      return Value::scalar(a.num() + b.num());
    case ValueTag::Unit:
      return Value::unit();
    case ValueTag::Pair:
      return Value::pair(value_add(a.fst(), b.fst()),
                         value_add(a.snd(), b.snd()));
    case ValueTag::Vec: {
      const auto& xs = a.items();
      const auto& ys = b.items();
      if (xs.size() != ys.size())
        throw std::invalid_argument("value_add: mismatched vector lengths");
      std::vector<Value> items;
      items.reserve(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i)
        items.push_back(value_add(xs[i], ys[i]));
      return Value::vec(std::move(items));
    }
  }
  throw std::logic_error("value_add: unreachable");
}

Value value_scale(double s, const Value& v) {
  switch (v.tag()) {
    case ValueTag::Scalar:
      return Value::scalar(s * v.num());
    case ValueTag::Unit:
      return Value::unit();
    case ValueTag::Pair:
      return Value::pair(value_scale(s, v.fst()), value_scale(s, v.snd()));
    case ValueTag::Vec: {
      std::vector<Value> items;
      items.reserve(v.items().size());
      for (const Value& item : v.items())
        items.push_back(value_scale(s, item));
      return Value::vec(std::move(items));
    }
  }
  throw std::logic_error("value_scale: unreachable");
}

Value random_value(const Shape& s, SplitMix64& rng, double lo, double hi) {
  switch (s.tag()) {
    case ShapeTag::Scalar:
      return Value::scalar(rng.uniform(lo, hi));
    case ShapeTag::Unit:
      return Value::unit();
    case ShapeTag::Pair: {
      // Evaluate in declaration order; C++ argument order is unspecified and
      // would make seeded streams compiler dependent.
      Value a = random_value(s.fst(), rng, lo, hi);
      Value b = random_value(s.snd(), rng, lo, hi);
      return Value::pair(std::move(a), std::move(b));
    }
    case ShapeTag::Vec: {
      std::vector<Value> items;
      items.reserve(s.len());
      for (std::size_t i = 0; i < s.len(); ++i)
        items.push_back(random_value(s.elem(), rng, lo, hi));
      return Value::vec(std::move(items));
    }
  }
  throw std::logic_error("random_value: unreachable");
}

namespace {

class ShapeParser {
 public:
  explicit ShapeParser(const std::string& text) : text_(text) {}

  Shape parse() {
    Shape s = parse_shape();
    skip_ws();
    if (pos_ != text_.size())
      fail("unexpected trailing input after shape");
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ShapeParseError(msg + " at offset " + std::to_string(pos_), pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of shape");
    return text_[pos_];
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what);
    ++pos_;
  }

  Shape parse_shape() {
    switch (peek()) {
      case 'R':
        ++pos_;
        return Shape::scalar();
      case '1':
        ++pos_;
        return Shape::unit();
      case '(': {
        ++pos_;
        Shape a = parse_shape();
        expect(',', "',' between pair components");
        Shape b = parse_shape();
        expect(')', "')' closing pair");
        return Shape::pair(std::move(a), std::move(b));
      }
      case '[': {
        ++pos_;
        std::size_t n = parse_len();
        expect('x', "'x' after vector length");
        Shape elem = parse_shape();
        expect(']', "']' closing vector");
        return Shape::vec(n, std::move(elem));
      }
      default:
        fail("expected 'R', '1', '(' or '['");
    }
  }

  std::size_t parse_len() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start) fail("expected vector length");
    std::size_t n = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (res.ec != std::errc{}) fail("vector length out of range");
    if (n == 0) fail("vector length must be positive");
    return n;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

Shape parse_shape(const std::string& text) { return ShapeParser(text).parse(); }

std::string show_shape(const Shape& s) {
  switch (s.tag()) {
    case ShapeTag::Scalar:
      return "R";
    case ShapeTag::Unit:
      return "1";
    case ShapeTag::Pair:
      return "(" + show_shape(s.fst()) + ", " + show_shape(s.snd()) + ")";
    case ShapeTag::Vec:
      return "[" + std::to_string(s.len()) + " x " + show_shape(s.elem()) +
             "]";
  }
  return "?";
}

std::string show_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string show_value(const Value& v) {
  switch (v.tag()) {
    case ValueTag::Scalar:
      return show_number(v.num());
    case ValueTag::Unit:
      return "()";
    case ValueTag::Pair:
      return "(" + show_value(v.fst()) + ", " + show_value(v.snd()) + ")";
    case ValueTag::Vec: {
      std::string out = "[";
      bool first = true;
      for (const Value& item : v.items()) {
        if (!first) out += ", ";
        first = false;
        out += show_value(item);
      }
      return out + "]";
    }
  }
  return "?";
}

}  // namespace catgrad
