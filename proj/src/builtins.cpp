#include "fc/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "fc/lang.hpp"

namespace fc {

LocalValue hood_fold(HoodKind kind, SelfPolicy policy, const NeighbouringValue& field) {
  auto included = [&](DeviceId id) { return policy == SelfPolicy::Include || id != field.self; };
  switch (kind) {
    case HoodKind::Sum: {
      double sum = 0.0;
      for (const auto& [id, v] : field.entries) {
        if (included(id)) sum += v.as_number();
      }
      return LocalValue::number(sum);
    }
    case HoodKind::Any:
    case HoodKind::All: {
      const bool want_any = kind == HoodKind::Any;
      bool acc = !want_any;
      for (const auto& [id, v] : field.entries) {
        if (!included(id)) continue;
        const bool b = v.as_boolean();
        acc = want_any ? (acc || b) : (acc && b);
      }
      return LocalValue::boolean(acc);
    }
    case HoodKind::Min:
    case HoodKind::Max: {
      const LocalValue* best = nullptr;
      // Entries are visited in ascending id order; a strict improvement is
      // required to replace the incumbent, so ties go to the smallest id.
      for (const auto& [id, v] : field.entries) {
        if (!included(id)) continue;
        if (!best) {
          best = &v;
          continue;
        }
        const auto c = compare(v, *best);
        if ((kind == HoodKind::Min && c < 0) || (kind == HoodKind::Max && c > 0)) best = &v;
      }
      return best ? *best : field.self_value();
    }
  }
  return LocalValue::null();
}

Value lift(std::span<const Value> args,
           const std::function<LocalValue(std::span<const LocalValue>)>& fn) {
  const NeighbouringValue* first_field = nullptr;
  for (const auto& a : args) {
    if (const auto* f = std::get_if<NeighbouringValue>(&a)) {
      first_field = f;
      break;
    }
  }
  std::vector<LocalValue> locals(args.size());
  if (!first_field) {
    for (std::size_t i = 0; i < args.size(); ++i) locals[i] = std::get<LocalValue>(args[i]);
    return fn(locals);
  }
  NeighbouringValue out;
  out.self = first_field->self;
  for (const auto& [id, unused] : first_field->entries) {
    bool in_domain = true;
    for (std::size_t i = 0; i < args.size() && in_domain; ++i) {
      if (const auto* f = std::get_if<NeighbouringValue>(&args[i])) {
        auto it = f->entries.find(id);
        if (it == f->entries.end()) {
          in_domain = false;
        } else {
          locals[i] = it->second;
        }
      } else {
        locals[i] = std::get<LocalValue>(args[i]);
      }
    }
    if (in_domain) out.entries.emplace(id, fn(locals));
  }
  return out;
}

Value mux(const Value& c, const Value& a, const Value& b) {
  const Value args[] = {c, a, b};
  return lift(args, [](std::span<const LocalValue> v) {
    return v[0].as_boolean() ? v[1] : v[2];
  });
}

Vec2 to_vec2(const LocalValue& v) {
  auto [x, y] = v.as_vec2();
  return {x, y};
}

LocalValue from_vec2(Vec2 v) { return LocalValue::vec2(v.x, v.y); }

double angle(Vec2 u, Vec2 v) {
  if ((u.x == 0.0 && u.y == 0.0) || (v.x == 0.0 && v.y == 0.0)) {
    throw TypeError("angle is undefined for a zero vector");
  }
  const double cross = u.x * v.y - u.y * v.x;
  const double dot = u.x * v.x + u.y * v.y;
  double deg = std::atan2(cross, dot) * 180.0 / std::numbers::pi;
  if (deg <= -180.0) deg = 180.0;
  return deg;
}

Value sense(const RoundContext& ctx, std::string_view name) {
  if (name == "myID") return LocalValue::device(ctx.self);
  if (name == "nbrVector") {
    auto self_pos = ctx.position_of.find(ctx.self);
    if (self_pos == ctx.position_of.end()) throw FcError("device has no position for nbrVector()");
    NeighbouringValue f;
    f.self = ctx.self;
    f.entries.emplace(ctx.self, LocalValue::vec2(0.0, 0.0));
    for (const auto& [id, pos] : ctx.position_of) {
      if (id == ctx.self || !ctx.neighbours.count(id)) continue;
      f.entries.emplace(id, LocalValue::vec2(pos.x - self_pos->second.x, pos.y - self_pos->second.y));
    }
    return f;
  }
  if (auto it = ctx.sensors.find(name); it != ctx.sensors.end()) return it->second;
  throw FcError("unknown sensor '" + std::string(name) + "'");
}

void SensorTimeline::set(double time, Value v) {
  auto it = std::lower_bound(points.begin(), points.end(), time,
                             [](const auto& p, double t) { return p.first < t; });
  if (it != points.end() && it->first == time) {
    it->second = std::move(v);
  } else {
    points.insert(it, {time, std::move(v)});
  }
}

std::optional<Value> SensorTimeline::at(double time) const {
  auto it = std::upper_bound(points.begin(), points.end(), time,
                             [](double t, const auto& p) { return t < p.first; });
  if (it == points.begin()) return std::nullopt;
  return std::prev(it)->second;
}

namespace {

using Locals = std::span<const LocalValue>;

bool is_vec(const LocalValue& v) { return v.is_constructor("Vec2"); }

LocalValue add(Locals a) {
  if (is_vec(a[0]) && is_vec(a[1])) {
    const Vec2 u = to_vec2(a[0]), v = to_vec2(a[1]);
    return from_vec2({u.x + v.x, u.y + v.y});
  }
  return LocalValue::number(a[0].as_number() + a[1].as_number());
}

LocalValue sub(Locals a) {
  if (is_vec(a[0]) && is_vec(a[1])) {
    const Vec2 u = to_vec2(a[0]), v = to_vec2(a[1]);
    return from_vec2({u.x - v.x, u.y - v.y});
  }
  return LocalValue::number(a[0].as_number() - a[1].as_number());
}

LocalValue mul(Locals a) {
  if (is_vec(a[1]) && !is_vec(a[0])) {
    const double k = a[0].as_number();
    const Vec2 v = to_vec2(a[1]);
    return from_vec2({k * v.x, k * v.y});
  }
  if (is_vec(a[0]) && !is_vec(a[1])) {
    const double k = a[1].as_number();
    const Vec2 v = to_vec2(a[0]);
    return from_vec2({k * v.x, k * v.y});
  }
  return LocalValue::number(a[0].as_number() * a[1].as_number());
}

LocalValue neg(Locals a) {
  if (is_vec(a[0])) {
    const Vec2 v = to_vec2(a[0]);
    return from_vec2({-v.x, -v.y});
  }
  return LocalValue::number(-a[0].as_number());
}

/// Equality as seen by the == operator: numbers and device ids compare by
/// numeric value, everything else structurally.
bool op_equal(const LocalValue& a, const LocalValue& b) {
  if (a.is_numeric() && b.is_numeric()) return a.as_number() == b.as_number();
  if (a.is_constructor() && b.is_constructor()) {
    if (a.ctor_name() != b.ctor_name() || a.ctor_args().size() != b.ctor_args().size()) return false;
    for (std::size_t i = 0; i < a.ctor_args().size(); ++i) {
      if (!op_equal(a.ctor_args()[i], b.ctor_args()[i])) return false;
    }
    return true;
  }
  return a == b;
}

const LocalValue& projection(const LocalValue& t, double index) {
  const auto& args = t.ctor_args();
  const double i = std::floor(index);
  if (i != index || i < 1 || i > static_cast<double>(args.size())) {
    throw TypeError("projection index " + format_number(index) + " out of range for " + encode(t));
  }
  return args[static_cast<std::size_t>(i) - 1];
}

bool is_zero(Vec2 v) { return v.x == 0.0 && v.y == 0.0; }

// The self entry of nbrVector() is the zero vector, so entrywise the angle of
// a zero vector reads as 0 rather than aborting the round.
Value angle_builtin(std::span<const Value> args, const RoundContext&) {
  if (!is_field(args[0]) && !is_field(args[1])) {
    return LocalValue::number(angle(to_vec2(as_local(args[0])), to_vec2(as_local(args[1]))));
  }
  return lift(args, [](Locals a) {
    const Vec2 u = to_vec2(a[0]), v = to_vec2(a[1]);
    return LocalValue::number(is_zero(u) || is_zero(v) ? 0.0 : angle(u, v));
  });
}

Builtin lifted(std::string name, int arity, std::function<LocalValue(Locals)> fn) {
  return Builtin{name, arity, [fn = std::move(fn)](std::span<const Value> args, const RoundContext&) {
                   return lift(args, fn);
                 }};
}

Builtin hood(std::string name, HoodKind kind, SelfPolicy policy) {
  return Builtin{name, 1, [kind, policy, name](std::span<const Value> args, const RoundContext&) -> Value {
                   if (!is_field(args[0])) {
                     throw TypeError(name + " expects a neighbouring value, got " + encode(args[0]));
                   }
                   return hood_fold(kind, policy, as_field(args[0]));
                 }};
}

std::map<std::string, Builtin, std::less<>> make_table() {
  std::vector<Builtin> all = {
      lifted("+", 2, add),
      lifted("-", 2, sub),
      lifted("*", 2, mul),
      lifted("/", 2, [](Locals a) { return LocalValue::number(a[0].as_number() / a[1].as_number()); }),
      lifted("%", 2, [](Locals a) { return LocalValue::number(std::fmod(a[0].as_number(), a[1].as_number())); }),
      lifted(std::string(kNegate), 1, neg),
      lifted("==", 2, [](Locals a) { return LocalValue::boolean(op_equal(a[0], a[1])); }),
      lifted("!=", 2, [](Locals a) { return LocalValue::boolean(!op_equal(a[0], a[1])); }),
      lifted("<", 2, [](Locals a) { return LocalValue::boolean(compare(a[0], a[1]) < 0); }),
      lifted("<=", 2, [](Locals a) { return LocalValue::boolean(compare(a[0], a[1]) <= 0); }),
      lifted(">", 2, [](Locals a) { return LocalValue::boolean(compare(a[0], a[1]) > 0); }),
      lifted(">=", 2, [](Locals a) { return LocalValue::boolean(compare(a[0], a[1]) >= 0); }),
      lifted("&&", 2, [](Locals a) { return LocalValue::boolean(a[0].as_boolean() && a[1].as_boolean()); }),
      lifted("||", 2, [](Locals a) { return LocalValue::boolean(a[0].as_boolean() || a[1].as_boolean()); }),
      lifted("!", 1, [](Locals a) { return LocalValue::boolean(!a[0].as_boolean()); }),
      lifted("mux", 3, [](Locals a) { return a[0].as_boolean() ? a[1] : a[2]; }),
      lifted("min", 2, [](Locals a) { return compare(a[1], a[0]) < 0 ? a[1] : a[0]; }),
      lifted("max", 2, [](Locals a) { return compare(a[1], a[0]) > 0 ? a[1] : a[0]; }),
      lifted("abs", 1, [](Locals a) { return LocalValue::number(std::fabs(a[0].as_number())); }),
      lifted("1st", 1, [](Locals a) { return projection(a[0], 1); }),
      lifted("2nd", 1, [](Locals a) { return projection(a[0], 2); }),
      lifted("3rd", 1, [](Locals a) { return projection(a[0], 3); }),
      lifted("nth", 2, [](Locals a) { return projection(a[0], a[1].as_number()); }),
      Builtin{"angle", 2, angle_builtin},
      hood("minHood", HoodKind::Min, SelfPolicy::Exclude),
      hood("maxHood", HoodKind::Max, SelfPolicy::Exclude),
      hood("sumHood", HoodKind::Sum, SelfPolicy::Exclude),
      hood("anyHood", HoodKind::Any, SelfPolicy::Exclude),
      hood("allHood", HoodKind::All, SelfPolicy::Exclude),
      hood("minHoodPlusSelf", HoodKind::Min, SelfPolicy::Include),
      hood("maxHoodPlusSelf", HoodKind::Max, SelfPolicy::Include),
      hood("sumHoodPlusSelf", HoodKind::Sum, SelfPolicy::Include),
      hood("anyHoodPlusSelf", HoodKind::Any, SelfPolicy::Include),
      hood("allHoodPlusSelf", HoodKind::All, SelfPolicy::Include),
      Builtin{"myID", 0, [](std::span<const Value>, const RoundContext& ctx) { return sense(ctx, "myID"); }},
      Builtin{"nbrVector", 0,
              [](std::span<const Value>, const RoundContext& ctx) { return sense(ctx, "nbrVector"); }},
  };
  std::map<std::string, Builtin, std::less<>> table;
  for (auto& b : all) {
    std::string key = b.name;
    table.emplace(std::move(key), std::move(b));
  }
  return table;
}

const std::map<std::string, Builtin, std::less<>>& table() {
  static const auto t = make_table();
  return t;
}

}  // namespace

const Builtin* find_builtin(std::string_view name) {
  const auto& t = table();
  auto it = t.find(name);
  return it == t.end() ? nullptr : &it->second;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [name, b] : table()) out.push_back(name);
  return out;
}

}  // namespace fc
