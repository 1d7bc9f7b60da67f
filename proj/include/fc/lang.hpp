#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fc/values.hpp"

namespace fc {

struct SourcePos {
  int line = 1;
  int column = 1;
  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

enum class NbrScope { All, Local, Remote };

enum class ExprKind { Var, Lit, Call, If, Nbr, Rep, Let, Tuple };

/// One AST node. Children live in `args`, interpreted per kind:
///   Call   args = call arguments, name = function
///   If     args = {condition, then, else}
///   Nbr    args = {body}
///   Rep    args = initial values, params = state names, bodies = one per name
///   Let    args = {bound, body}, name = bound variable
///   Tuple  args = elements
struct Expr {
  ExprKind kind = ExprKind::Lit;
  SourcePos pos;
  std::string name;
  LocalValue literal;
  NbrScope scope = NbrScope::All;
  std::vector<std::string> params;
  std::vector<Expr> args;
  std::vector<Expr> bodies;
  /// Call-site index, assigned per enclosing function body (pre-order).
  int site = -1;

  static Expr var(std::string n, SourcePos p = {});
  static Expr lit(LocalValue v, SourcePos p = {});
  static Expr call(std::string fn, std::vector<Expr> args, SourcePos p = {});
};

struct FunctionDecl {
  std::string name;
  std::vector<std::string> params;
  Expr body;
  SourcePos pos;
};

struct Program {
  std::map<std::string, FunctionDecl> functions;
  /// Declaration order, used for printing.
  std::vector<std::string> order;
  Expr main;

  const FunctionDecl* find(const std::string& name) const {
    auto it = functions.find(name);
    return it == functions.end() ? nullptr : &it->second;
  }
};

enum class DiagKind { Lexical, Syntax, DuplicateFunction, DuplicateParameter, ArityMismatch };

std::string_view diag_kind_name(DiagKind k);

struct Diagnostic {
  DiagKind kind;
  SourcePos pos;
  std::string message;
};

std::string to_string(const Diagnostic& d);

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

ParseResult parse(std::string_view source);

/// Parses or throws FcError carrying the first diagnostic.
Program parse_or_throw(std::string_view source);

/// Core form: no Let, no Tuple literal, every Rep single-valued.
Program desugar(const Program& program);
bool is_core(const Program& program);

/// Assigns call-site indices in pre-order within each function body and main.
void number_call_sites(Program& program);

std::string pretty_print(const Program& program);
std::string pretty_print(const Expr& expr);

/// Structural equality ignoring source positions.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const Program& a, const Program& b);

/// Visits every node in pre-order.
template <typename F>
void for_each_expr(const Expr& e, F&& f) {
  f(e);
  for (const auto& a : e.args) for_each_expr(a, f);
  for (const auto& b : e.bodies) for_each_expr(b, f);
}

/// Replaces nullary constructor literals named in `constants` by their values.
void bind_constants(Program& program, const std::map<std::string, LocalValue>& constants);

/// Names of built-in operators as they appear in Call nodes.
inline constexpr std::string_view kNegate = "neg";
inline constexpr std::string_view kNot = "!";

}  // namespace fc
