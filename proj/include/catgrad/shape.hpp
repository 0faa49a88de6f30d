#pragma once

// Shapes classify the values that flow through the toolkit: a shape is a
// finite tree built from scalars, the unit, binary pairs, and fixed-length
// vectors. Values mirror shapes node for node. Everything downstream
// (morphisms, derivatives, matrices) is indexed by a domain and codomain
// shape, so this module also provides the flatten/unflatten bridge between
// structured values and flat coordinate vectors.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "catgrad/rng.hpp"

namespace catgrad {

enum class ShapeTag { Scalar, Unit, Pair, Vec };

class Shape {
 public:
  Shape() : Shape(scalar()) {}

  static Shape scalar();
  static Shape unit();
  static Shape pair(Shape first, Shape second);
  static Shape vec(std::size_t len, Shape elem);

  ShapeTag tag() const { return node_->tag; }
  bool is_scalar() const { return node_->tag == ShapeTag::Scalar; }
  bool is_unit() const { return node_->tag == ShapeTag::Unit; }
  bool is_pair() const { return node_->tag == ShapeTag::Pair; }
  bool is_vec() const { return node_->tag == ShapeTag::Vec; }

  const Shape& fst() const;   // pair only
  const Shape& snd() const;   // pair only
  std::size_t len() const;    // vec only
  const Shape& elem() const;  // vec only

  // Number of scalar leaves; the dimension of the flat coordinate space.
  std::size_t dim() const { return node_->dim; }

  bool operator==(const Shape& other) const;
  bool operator!=(const Shape& other) const { return !(*this == other); }

 private:
  struct Node {
    ShapeTag tag;
    std::vector<Shape> kids;  // 2 for Pair, 1 for Vec, else empty
    std::size_t len = 0;
    std::size_t dim = 0;
  };

  explicit Shape(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

enum class ValueTag { Scalar, Unit, Pair, Vec };

class Value {
 public:
  Value() : Value(scalar(0.0)) {}

  static Value scalar(double x);
  static Value unit();
  static Value pair(Value first, Value second);
  static Value vec(std::vector<Value> items);

  ValueTag tag() const { return node_->tag; }
  double num() const;                       // scalar only
  const Value& fst() const;                 // pair only
  const Value& snd() const;                 // pair only
  const std::vector<Value>& items() const;  // vec only

 private:
  struct Node {
    ValueTag tag;
    double num = 0.0;
    std::vector<Value> items;  // 2 entries for Pair, n for Vec
  };

  explicit Value(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Shape of a value, reconstructed structurally.
Shape shape_of(const Value& v);
bool conforms(const Value& v, const Shape& s);

// Flat coordinate order is depth-first, left to right.
std::vector<double> flatten(const Value& v);
Value unflatten(const Shape& s, const std::vector<double>& coords);

Value zero_value(const Shape& s);
// One-hot value with a 1 at flat coordinate i.
Value basis_value(const Shape& s, std::size_t i);

// Pointwise vector-space structure. Both operands must share a shape.
Value value_add(const Value& a, const Value& b);
Value value_scale(double s, const Value& v);

Value random_value(const Shape& s, SplitMix64& rng, double lo, double hi);

struct ShapeParseError : std::runtime_error {
  ShapeParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg), pos(pos) {}
  std::size_t pos;  // byte offset into the input
};

// Grammar: R | 1 | (S,S) | [n x S], whitespace insensitive.
Shape parse_shape(const std::string& text);

std::string show_shape(const Shape& s);
std::string show_value(const Value& v);

// Shortest round-trip rendering of a double, shared by value and term
// printers so constants always display identically.
std::string show_number(double x);

}  // namespace catgrad
