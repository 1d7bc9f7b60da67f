#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fc/context.hpp"
#include "fc/values.hpp"

namespace fc {

enum class HoodKind { Min, Max, Sum, Any, All };
enum class SelfPolicy { Include, Exclude };

/// Folds a neighbouring value. On an empty domain (after excluding self):
/// sum -> 0, any -> False, all -> True, min/max -> the self entry.
/// min/max ties resolve to the smallest device id.
LocalValue hood_fold(HoodKind kind, SelfPolicy policy, const NeighbouringValue& field);

/// c ? a : b, applied entrywise when any argument is a neighbouring value.
Value mux(const Value& c, const Value& a, const Value& b);

/// Signed angle from u to v in degrees, in (-180, 180]. Throws on zero vectors.
double angle(Vec2 u, Vec2 v);

Vec2 to_vec2(const LocalValue& v);
LocalValue from_vec2(Vec2 v);

/// Reads a sensor, `myID` or `nbrVector` from the round context.
Value sense(const RoundContext& ctx, std::string_view name);

/// Applies `fn` pointwise. Local arguments are promoted to constant fields;
/// field arguments are restricted to the intersection of their domains.
Value lift(std::span<const Value> args,
           const std::function<LocalValue(std::span<const LocalValue>)>& fn);

struct Builtin {
  std::string name;
  int arity = 0;  // -1 for variadic
  std::function<Value(std::span<const Value>, const RoundContext&)> apply;
};

/// Looks up a built-in by surface name; nullptr when absent. Constructor
/// applications (capitalised names) are not in this table.
const Builtin* find_builtin(std::string_view name);
std::vector<std::string> builtin_names();

/// A piecewise-constant sensor reading over local time.
struct SensorTimeline {
  std::vector<std::pair<double, Value>> points;  // strictly increasing times

  void set(double time, Value v);
  /// Latest point at or before `time`.
  std::optional<Value> at(double time) const;
};

}  // namespace fc
