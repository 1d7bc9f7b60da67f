#include <cmath>

#include "fc/lang.hpp"

namespace fc {

namespace {

constexpr int kPrecLet = 0;
constexpr int kPrecUnary = 7;
constexpr int kPrecAtom = 8;

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  return -1;
}

bool is_binary(const Expr& e) {
  return e.kind == ExprKind::Call && e.args.size() == 2 && binary_precedence(e.name) > 0;
}

bool is_unary(const Expr& e) {
  return e.kind == ExprKind::Call && e.args.size() == 1 && (e.name == kNegate || e.name == kNot);
}

bool is_negative_literal(const Expr& e) {
  return e.kind == ExprKind::Lit && e.literal.is_number() && std::signbit(e.literal.as_number());
}

int precedence(const Expr& e) {
  if (e.kind == ExprKind::Let) return kPrecLet;
  if (is_binary(e)) return binary_precedence(e.name);
  if (is_unary(e) || is_negative_literal(e)) return kPrecUnary;
  return kPrecAtom;
}

void print_literal(std::string& out, const LocalValue& v) {
  switch (v.kind()) {
    case LocalValue::Kind::Number: {
      const double d = v.as_number();
      if (std::isinf(d)) {
        out += d > 0 ? "infinity" : "-infinity";
      } else {
        out += format_number(d);
      }
      return;
    }
    case LocalValue::Kind::Boolean: out += v.as_boolean() ? "true" : "false"; return;
    case LocalValue::Kind::Null: out += "null"; return;
    case LocalValue::Kind::Constructor:
      out += v.ctor_name();
      if (!v.ctor_args().empty()) {
        out += '(';
        for (std::size_t i = 0; i < v.ctor_args().size(); ++i) {
          if (i) out += ", ";
          print_literal(out, v.ctor_args()[i]);
        }
        out += ')';
      }
      return;
    case LocalValue::Kind::String:
    case LocalValue::Kind::Device: out += encode(v); return;
  }
}

void print(std::string& out, const Expr& e);

void print_list(std::string& out, const std::vector<Expr>& es) {
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (i) out += ", ";
    print(out, es[i]);
  }
}

void print_operand(std::string& out, const Expr& e, bool parens) {
  if (parens) out += '(';
  print(out, e);
  if (parens) out += ')';
}

void print(std::string& out, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Var: out += e.name; return;
    case ExprKind::Lit: print_literal(out, e.literal); return;
    case ExprKind::Tuple:
      out += '[';
      print_list(out, e.args);
      out += ']';
      return;
    case ExprKind::If:
      out += "if (";
      print(out, e.args[0]);
      out += ") {";
      print(out, e.args[1]);
      out += "} {";
      print(out, e.args[2]);
      out += '}';
      return;
    case ExprKind::Nbr:
      out += e.scope == NbrScope::Local ? "nbrLocal{" : (e.scope == NbrScope::Remote ? "nbrRemote{" : "nbr{");
      print(out, e.args[0]);
      out += '}';
      return;
    case ExprKind::Rep: {
      out += "rep (";
      print_list(out, e.args);
      out += ") { (";
      for (std::size_t i = 0; i < e.params.size(); ++i) {
        if (i) out += ", ";
        out += e.params[i];
      }
      out += ") => ";
      print_list(out, e.bodies);
      out += " }";
      return;
    }
    case ExprKind::Let:
      out += "let " + e.name + " = ";
      print(out, e.args[0]);
      out += " in ";
      print(out, e.args[1]);
      return;
    case ExprKind::Call: break;
  }
  if (is_binary(e)) {
    const int p = binary_precedence(e.name);
    print_operand(out, e.args[0], precedence(e.args[0]) < p);
    out += ' ' + e.name + ' ';
    print_operand(out, e.args[1], precedence(e.args[1]) <= p);
    return;
  }
  if (is_unary(e)) {
    out += e.name == kNegate ? "-" : "!";
    const Expr& operand = e.args[0];
    print_operand(out, operand, precedence(operand) < kPrecAtom);
    return;
  }
  out += e.name;
  out += '(';
  print_list(out, e.args);
  out += ')';
}

}  // namespace

std::string pretty_print(const Expr& expr) {
  std::string out;
  print(out, expr);
  return out;
}

std::string pretty_print(const Program& program) {
  std::string out;
  for (const auto& name : program.order) {
    const FunctionDecl& f = program.functions.at(name);
    out += "def " + f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += f.params[i];
    }
    out += ") {\n  ";
    out += pretty_print(f.body);
    out += "\n}\n\n";
  }
  out += pretty_print(program.main);
  return out;
}

}  // namespace fc
