#include <set>

#include "fc/lang.hpp"

namespace fc {

namespace {

void free_vars(const Expr& e, std::multiset<std::string>& bound, std::set<std::string>& out) {
  switch (e.kind) {
    case ExprKind::Var:
      if (!bound.count(e.name)) out.insert(e.name);
      return;
    case ExprKind::Rep:
      for (const auto& a : e.args) free_vars(a, bound, out);
      for (const auto& p : e.params) bound.insert(p);
      for (const auto& b : e.bodies) free_vars(b, bound, out);
      for (const auto& p : e.params) bound.erase(bound.find(p));
      return;
    case ExprKind::Let:
      free_vars(e.args[0], bound, out);
      bound.insert(e.name);
      free_vars(e.args[1], bound, out);
      bound.erase(bound.find(e.name));
      return;
    default:
      for (const auto& a : e.args) free_vars(a, bound, out);
      for (const auto& b : e.bodies) free_vars(b, bound, out);
  }
}

/// Free variables in sorted order.
std::vector<std::string> free_variables(const Expr& e) {
  std::multiset<std::string> bound;
  std::set<std::string> out;
  free_vars(e, bound, out);
  return {out.begin(), out.end()};
}

Expr projection(const std::string& tuple_var, std::size_t index, SourcePos pos) {
  Expr t = Expr::var(tuple_var, pos);
  if (index == 1) return Expr::call("1st", {std::move(t)}, pos);
  if (index == 2) return Expr::call("2nd", {std::move(t)}, pos);
  return Expr::call("nth", {std::move(t), Expr::lit(LocalValue::number(static_cast<double>(index)), pos)}, pos);
}

class Desugarer {
 public:
  explicit Desugarer(const Program& in) : in_(in) {
    for (const auto& [name, f] : in.functions) taken_.insert(name);
  }

  Program run() {
    Program out;
    for (const auto& name : in_.order) {
      const FunctionDecl& f = in_.functions.at(name);
      FunctionDecl g{f.name, f.params, lower(f.body), f.pos};
      out.order.push_back(name);
      out.functions.emplace(name, std::move(g));
    }
    out.main = lower(in_.main);
    for (auto& g : generated_) {
      out.order.push_back(g.name);
      std::string n = g.name;
      out.functions.emplace(std::move(n), std::move(g));
    }
    number_call_sites(out);
    return out;
  }

 private:
  std::string fresh(std::string_view stem) {
    for (;;) {
      std::string name = "_" + std::string(stem) + std::to_string(counter_++);
      if (taken_.insert(name).second) return name;
    }
  }

  Expr lower(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Let: return lower_let(e.name, e.args[0], e.args[1], e.pos);
      case ExprKind::Tuple: {
        std::vector<Expr> elems;
        for (const auto& a : e.args) elems.push_back(lower(a));
        return Expr::call("Tuple", std::move(elems), e.pos);
      }
      case ExprKind::Rep:
        if (e.params.size() > 1) return lower_multi_rep(e);
        break;
      default: break;
    }
    Expr out = e;
    for (auto& a : out.args) a = lower(a);
    for (auto& b : out.bodies) b = lower(b);
    return out;
  }

  // let x = bound in body  ==>  _letK(bound, fv...) with def _letK(x, fv...) {body}
  Expr lower_let(const std::string& var, const Expr& bound, const Expr& body, SourcePos pos) {
    const std::string fn = fresh("let");
    Expr lowered_bound = lower(bound);
    Expr lowered_body = lower(body);
    std::vector<std::string> params{var};
    std::vector<Expr> args;
    args.push_back(std::move(lowered_bound));
    for (auto& v : free_variables(lowered_body)) {
      if (v == var) continue;
      args.push_back(Expr::var(v, pos));
      params.push_back(std::move(v));
    }
    generated_.push_back(FunctionDecl{fn, std::move(params), std::move(lowered_body), pos});
    return Expr::call(fn, std::move(args), pos);
  }

  // rep (v1..vn) {(x1..xn) => e1..en}  ==>
  // rep ([v1..vn]) {(t) => let x1 = 1st(t) in ... let xn = nth(t, n) in [e1..en]}
  Expr lower_multi_rep(const Expr& e) {
    const std::string t = fresh("rep");
    Expr init;
    init.kind = ExprKind::Tuple;
    init.pos = e.pos;
    init.args = e.args;

    Expr result;
    result.kind = ExprKind::Tuple;
    result.pos = e.pos;
    result.args = e.bodies;

    Expr body = std::move(result);
    for (std::size_t i = e.params.size(); i-- > 0;) {
      Expr let;
      let.kind = ExprKind::Let;
      let.pos = e.pos;
      let.name = e.params[i];
      let.args.push_back(projection(t, i + 1, e.pos));
      let.args.push_back(std::move(body));
      body = std::move(let);
    }

    Expr rep;
    rep.kind = ExprKind::Rep;
    rep.pos = e.pos;
    rep.params = {t};
    rep.args.push_back(lower(init));
    rep.bodies.push_back(lower(body));
    return rep;
  }

  const Program& in_;
  std::set<std::string> taken_;
  std::vector<FunctionDecl> generated_;
  int counter_ = 0;
};

bool core_expr(const Expr& e) {
  bool ok = true;
  for_each_expr(e, [&ok](const Expr& x) {
    if (x.kind == ExprKind::Let || x.kind == ExprKind::Tuple ||
        (x.kind == ExprKind::Rep && x.params.size() != 1)) {
      ok = false;
    }
  });
  return ok;
}

}  // namespace

Program desugar(const Program& program) { return Desugarer(program).run(); }

bool is_core(const Program& program) {
  for (const auto& [name, f] : program.functions) {
    if (!core_expr(f.body)) return false;
  }
  return core_expr(program.main);
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.name != b.name || a.scope != b.scope || a.params != b.params ||
      a.args.size() != b.args.size() || a.bodies.size() != b.bodies.size()) {
    return false;
  }
  if (a.kind == ExprKind::Lit && !(a.literal == b.literal)) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_structure(a.args[i], b.args[i])) return false;
  }
  for (std::size_t i = 0; i < a.bodies.size(); ++i) {
    if (!same_structure(a.bodies[i], b.bodies[i])) return false;
  }
  return true;
}

bool same_structure(const Program& a, const Program& b) {
  if (a.order != b.order || a.functions.size() != b.functions.size()) return false;
  for (const auto& [name, f] : a.functions) {
    const FunctionDecl* g = b.find(name);
    if (!g || g->params != f.params || !same_structure(f.body, g->body)) return false;
  }
  return same_structure(a.main, b.main);
}

}  // namespace fc
