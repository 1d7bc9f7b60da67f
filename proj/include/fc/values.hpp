#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fc {

using DeviceId = std::int64_t;

/// Base class for every error raised by the runtime.
class FcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by compare() when the operands are in different comparable classes.
class IncomparableError : public FcError {
 public:
  using FcError::FcError;
};

class TypeError : public FcError {
 public:
  using FcError::FcError;
};

/// A local value: a constructor tree whose leaves are numbers, booleans,
/// strings, null or device identifiers. Tuples are constructors named
/// "Tuple" and 2-D vectors are constructors named "Vec2".
class LocalValue {
 public:
  enum class Kind { Number, Boolean, String, Null, Device, Constructor };

  LocalValue() = default;

  static LocalValue number(double v);
  static LocalValue boolean(bool v);
  static LocalValue string(std::string v);
  static LocalValue null();
  static LocalValue device(DeviceId id);
  static LocalValue constructor(std::string name, std::vector<LocalValue> args = {});
  static LocalValue tuple(std::vector<LocalValue> elems);
  static LocalValue vec2(double x, double y);

  Kind kind() const { return kind_; }
  bool is_number() const { return kind_ == Kind::Number; }
  bool is_boolean() const { return kind_ == Kind::Boolean; }
  bool is_null() const { return kind_ == Kind::Null; }
  bool is_device() const { return kind_ == Kind::Device; }
  bool is_constructor() const { return kind_ == Kind::Constructor; }
  bool is_constructor(std::string_view name) const {
    return kind_ == Kind::Constructor && text_ == name;
  }
  /// Numbers and device identifiers share one numeric class.
  bool is_numeric() const { return kind_ == Kind::Number || kind_ == Kind::Device; }

  double as_number() const;  // accepts devices too
  bool as_boolean() const;
  const std::string& as_string() const;
  DeviceId as_device() const;
  const std::string& ctor_name() const;
  const std::vector<LocalValue>& ctor_args() const;
  /// Components of a Vec2 constructor.
  std::pair<double, double> as_vec2() const;

  friend bool operator==(const LocalValue& a, const LocalValue& b);

 private:
  Kind kind_ = Kind::Null;
  double num_ = 0.0;
  bool bool_ = false;
  DeviceId dev_ = 0;
  std::string text_;
  std::vector<LocalValue> args_;
};

std::string_view kind_name(LocalValue::Kind k);

/// phi: a map from device identifiers to local values. The self entry is
/// always present; hood folds decide whether it participates.
struct NeighbouringValue {
  DeviceId self = 0;
  std::map<DeviceId, LocalValue> entries;

  const LocalValue& self_value() const { return entries.at(self); }
  friend bool operator==(const NeighbouringValue&, const NeighbouringValue&) = default;
};

using Value = std::variant<LocalValue, NeighbouringValue>;

inline bool is_field(const Value& v) { return std::holds_alternative<NeighbouringValue>(v); }
const LocalValue& as_local(const Value& v);
const NeighbouringValue& as_field(const Value& v);

/// Total order inside each comparable class: numeric (numbers and devices,
/// -inf < finite < +inf), booleans (False < True), strings, null, and
/// constructors with equal name and arity (lexicographic on arguments).
std::strong_ordering compare(const LocalValue& a, const LocalValue& b);

/// Structural equality. Numbers compare exactly.
bool equal(const Value& a, const Value& b);

// ---------------------------------------------------------------------------
// Value trees and alignment paths

enum class NodeTag { None, Then, Else, Frame, Skipped };

/// theta: one node per evaluated sub-expression. If nodes carry the branch
/// taken, user-function calls carry their frame, and sub-expressions that
/// were not evaluated (a rep init after the first round) are Skipped.
struct ValueTree {
  Value value = LocalValue::null();
  NodeTag tag = NodeTag::None;
  std::string frame;  // function name when tag == Frame
  int site = -1;      // call-site index when tag == Frame
  std::vector<ValueTree> children;

  friend bool operator==(const ValueTree&, const ValueTree&);
  std::size_t node_count() const;
};

struct PathStep {
  enum class Kind { Child, Branch, Frame };
  Kind kind = Kind::Child;
  int index = 0;          // Child: child index; Frame: call-site index
  bool then_branch = true;
  std::string function;   // Frame only

  static PathStep child(int i) { return {Kind::Child, i, true, {}}; }
  static PathStep branch(bool then) { return {Kind::Branch, 0, then, {}}; }
  static PathStep frame(std::string fn, int site) { return {Kind::Frame, site, true, std::move(fn)}; }

  friend bool operator==(const PathStep&, const PathStep&) = default;
};

using Path = std::vector<PathStep>;

std::string to_string(const Path& path);

/// Node addressed by path, or nullptr. Branch and frame steps must match the
/// tags recorded in the tree; skipped nodes are never returned.
const ValueTree* vt_find(const ValueTree& tree, const Path& path);
std::optional<Value> vt_lookup(const ValueTree& tree, const Path& path);

/// Received exports of neighbours, newest per neighbour.
struct ReceivedExport {
  ValueTree tree;
  double received_at = 0.0;
};
using NeighbourExports = std::map<DeviceId, ReceivedExport>;

// ---------------------------------------------------------------------------
// Stable text encoding
//
//   number   3  -0.5  1e+300  inf  -inf
//   boolean  True False   null  Null   string  "a\"b"
//   device   #12            constructor  Name  Name(a, b)
//   field    {#1 | #1: 3, #2: 4}       (self id before the bar)
//   tree     <value tag child...>  with tag one of  -  T  E  S  F:name:site

std::string encode(const LocalValue& v);
std::string encode(const Value& v);
std::string encode(const ValueTree& t);
LocalValue decode_local(std::string_view text);
Value decode_value(std::string_view text);
ValueTree decode_tree(std::string_view text);

std::string format_number(double v);

}  // namespace fc
