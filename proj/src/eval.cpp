#include "fc/eval.hpp"

#include <algorithm>
#include <cctype>

#include "fc/builtins.hpp"

namespace fc {

EvalError::EvalError(Path path, const std::string& what)
    : FcError("at " + to_string(path) + ": " + what), path_(std::move(path)), detail_(what) {}

NeighbouringValue gather_nbr(const RoundContext& ctx, const Path& path, NbrScope scope,
                             const LocalValue& own) {
  NeighbouringValue field;
  field.self = ctx.self;
  field.entries.emplace(ctx.self, own);
  Path value_path = path;
  value_path.push_back(PathStep::child(0));

  const LocationId* here = nullptr;
  if (auto it = ctx.location_of.find(ctx.self); it != ctx.location_of.end()) here = &it->second;

  for (const auto& [id, received] : ctx.neighbours) {
    if (id == ctx.self) continue;
    if (scope != NbrScope::All) {
      auto loc = ctx.location_of.find(id);
      const bool same = here && loc != ctx.location_of.end() && loc->second == *here;
      if (scope == NbrScope::Local && !same) continue;
      if (scope == NbrScope::Remote && same) continue;
    }
    const ValueTree* node = vt_find(received.tree, value_path);
    if (!node || is_field(node->value)) continue;
    field.entries.emplace(id, as_local(node->value));
  }
  return field;
}

std::optional<Value> rep_prev(const RoundContext& ctx, const Path& path) {
  if (!ctx.previous) return std::nullopt;
  return vt_lookup(*ctx.previous, path);
}

namespace {

constexpr int kMaxCallDepth = 2000;

using Env = std::map<std::string, Value, std::less<>>;

class Evaluator {
 public:
  Evaluator(const Program& program, const RoundContext& ctx, const NbrObserver& observer)
      : program_(program), ctx_(ctx), observer_(observer) {}

  ValueTree eval(const Expr& e, const Env& env) {
    switch (e.kind) {
      case ExprKind::Lit: return leaf(e.literal);
      case ExprKind::Var: return leaf(lookup_var(e.name, env));
      case ExprKind::Call: return eval_call(e, env);
      case ExprKind::If: return eval_if(e, env);
      case ExprKind::Nbr: return eval_nbr(e, env);
      case ExprKind::Rep: return eval_rep(e, env);
      case ExprKind::Let:
      case ExprKind::Tuple: fail("program is not in core form");
    }
    fail("unknown expression");
  }

 private:
  static ValueTree leaf(Value v) {
    ValueTree t;
    t.value = std::move(v);
    return t;
  }

  [[noreturn]] void fail(const std::string& what) const { throw EvalError(path_, what); }

  Value lookup_var(const std::string& name, const Env& env) const {
    if (auto it = env.find(name); it != env.end()) return it->second;
    if (auto it = ctx_.constants.find(name); it != ctx_.constants.end()) return it->second;
    fail("unknown variable '" + name + "'");
  }

  ValueTree child(int index, const Expr& e, const Env& env) {
    path_.push_back(PathStep::child(index));
    ValueTree t = eval(e, env);
    path_.pop_back();
    return t;
  }

  ValueTree eval_call(const Expr& e, const Env& env) {
    ValueTree node;
    std::vector<Value> args;
    args.reserve(e.args.size());
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      node.children.push_back(child(static_cast<int>(i), e.args[i], env));
      args.push_back(node.children.back().value);
    }

    if (const FunctionDecl* fn = program_.find(e.name)) {
      if (fn->params.size() != args.size()) {
        fail("function '" + e.name + "' expects " + std::to_string(fn->params.size()) + " arguments, got " +
             std::to_string(args.size()));
      }
      if (++depth_ > kMaxCallDepth) fail("call depth limit exceeded in '" + e.name + "'");
      Env inner;
      for (std::size_t i = 0; i < args.size(); ++i) inner[fn->params[i]] = args[i];
      node.tag = NodeTag::Frame;
      node.frame = e.name;
      node.site = e.site;
      path_.push_back(PathStep::frame(e.name, e.site));
      node.children.push_back(child(static_cast<int>(args.size()), fn->body, inner));
      path_.pop_back();
      --depth_;
      node.value = node.children.back().value;
      return node;
    }

    try {
      if (!e.name.empty() && std::isupper(static_cast<unsigned char>(e.name[0]))) {
        const std::string name = e.name;
        node.value = lift(args, [&name](std::span<const LocalValue> xs) {
          return LocalValue::constructor(name, {xs.begin(), xs.end()});
        });
        return node;
      }
      if (const Builtin* b = find_builtin(e.name)) {
        if (b->arity >= 0 && static_cast<std::size_t>(b->arity) != args.size()) {
          fail("built-in '" + e.name + "' expects " + std::to_string(b->arity) + " arguments, got " +
               std::to_string(args.size()));
        }
        node.value = b->apply(args, ctx_);
        return node;
      }
      if (args.empty()) {
        node.value = sense(ctx_, e.name);
        return node;
      }
    } catch (const EvalError&) {
      throw;
    } catch (const FcError& err) {
      fail(err.what());
    }
    fail("unknown function '" + e.name + "'");
  }

  ValueTree eval_if(const Expr& e, const Env& env) {
    ValueTree node;
    node.children.push_back(child(0, e.args[0], env));
    const Value& c = node.children[0].value;
    if (is_field(c) || !as_local(c).is_boolean()) {
      fail("if condition must be a local Boolean, got " + encode(c));
    }
    const bool taken = as_local(c).as_boolean();
    node.tag = taken ? NodeTag::Then : NodeTag::Else;
    path_.push_back(PathStep::branch(taken));
    node.children.push_back(child(1, taken ? e.args[1] : e.args[2], env));
    path_.pop_back();
    node.value = node.children[1].value;
    return node;
  }

  ValueTree eval_nbr(const Expr& e, const Env& env) {
    ValueTree node;
    node.children.push_back(child(0, e.args[0], env));
    const Value& own = node.children[0].value;
    if (is_field(own)) fail("nbr body must evaluate to a local value, got " + encode(own));
    NeighbouringValue field = gather_nbr(ctx_, path_, e.scope, as_local(own));
    if (observer_) observer_(path_, field);
    node.value = std::move(field);
    return node;
  }

  ValueTree eval_rep(const Expr& e, const Env& env) {
    ValueTree node;
    std::optional<Value> prev = rep_prev(ctx_, path_);
    if (prev) {
      ValueTree skipped;
      skipped.tag = NodeTag::Skipped;
      skipped.value = LocalValue::null();
      node.children.push_back(std::move(skipped));
    } else {
      node.children.push_back(child(0, e.args[0], env));
      prev = node.children[0].value;
    }
    Env inner = env;
    inner[e.params[0]] = *prev;
    node.children.push_back(child(1, e.bodies[0], inner));
    node.value = node.children[1].value;
    return node;
  }

  const Program& program_;
  const RoundContext& ctx_;
  const NbrObserver& observer_;
  Path path_;
  int depth_ = 0;
};

}  // namespace

Export eval_round(const Program& program, const RoundContext& ctx, const NbrObserver& observer) {
  Evaluator ev(program, ctx, observer);
  Export out;
  out.tree = ev.eval(program.main, {});
  out.root_value = out.tree.value;
  return out;
}

namespace {

class SiteWalker {
 public:
  SiteWalker(const Program& program, const std::function<bool(const Expr&)>& pred)
      : program_(program), pred_(pred) {}

  void walk(const Expr& e) {
    if (pred_(e)) out.emplace_back(path_, &e);
    switch (e.kind) {
      case ExprKind::Lit:
      case ExprKind::Var: return;
      case ExprKind::If:
        child(0, e.args[0]);
        for (bool taken : {true, false}) {
          path_.push_back(PathStep::branch(taken));
          child(1, taken ? e.args[1] : e.args[2]);
          path_.pop_back();
        }
        return;
      case ExprKind::Rep:
        child(0, e.args[0]);
        child(1, e.bodies[0]);
        return;
      default: break;
    }
    for (std::size_t i = 0; i < e.args.size(); ++i) child(static_cast<int>(i), e.args[i]);
    if (e.kind != ExprKind::Call) return;
    const FunctionDecl* fn = program_.find(e.name);
    if (!fn || std::find(stack_.begin(), stack_.end(), e.name) != stack_.end()) return;
    stack_.push_back(e.name);
    path_.push_back(PathStep::frame(e.name, e.site));
    child(static_cast<int>(e.args.size()), fn->body);
    path_.pop_back();
    stack_.pop_back();
  }

  std::vector<std::pair<Path, const Expr*>> out;

 private:
  void child(int i, const Expr& e) {
    path_.push_back(PathStep::child(i));
    walk(e);
    path_.pop_back();
  }

  const Program& program_;
  const std::function<bool(const Expr&)>& pred_;
  Path path_;
  std::vector<std::string> stack_;
};

}  // namespace

std::vector<std::pair<Path, const Expr*>> static_sites(const Program& program,
                                                       const std::function<bool(const Expr&)>& pred) {
  SiteWalker w(program, pred);
  w.walk(program.main);
  return std::move(w.out);
}

}  // namespace fc
