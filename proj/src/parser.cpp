#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "fc/lang.hpp"

namespace fc {

Expr Expr::var(std::string n, SourcePos p) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(n);
  e.pos = p;
  return e;
}

Expr Expr::lit(LocalValue v, SourcePos p) {
  Expr e;
  e.kind = ExprKind::Lit;
  e.literal = std::move(v);
  e.pos = p;
  return e;
}

Expr Expr::call(std::string fn, std::vector<Expr> args, SourcePos p) {
  Expr e;
  e.kind = ExprKind::Call;
  e.name = std::move(fn);
  e.args = std::move(args);
  e.pos = p;
  return e;
}

std::string_view diag_kind_name(DiagKind k) {
  switch (k) {
    case DiagKind::Lexical: return "lexical error";
    case DiagKind::Syntax: return "syntax error";
    case DiagKind::DuplicateFunction: return "duplicate function";
    case DiagKind::DuplicateParameter: return "duplicate parameter";
    case DiagKind::ArityMismatch: return "arity mismatch";
  }
  return "error";
}

std::string to_string(const Diagnostic& d) {
  return std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " +
         std::string(diag_kind_name(d.kind)) + ": " + d.message;
}

namespace {

enum class Tok { Number, String, Ident, Ctor, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0;
  SourcePos pos;
};

struct ParseFailure {
  Diagnostic diag;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = src_[i_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        lex_number_or_ordinal(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.text = take_word();
        t.kind = std::isupper(static_cast<unsigned char>(t.text[0])) ? Tok::Ctor : Tok::Ident;
      } else if (c == '"') {
        lex_string(t);
      } else {
        lex_punct(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg, SourcePos p) {
    throw ParseFailure{{DiagKind::Lexical, p, msg}};
  }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[i_]) & 0xC0) != 0x80) {
      ++col_;  // count UTF-8 code points, not continuation bytes
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[i_]))) {
        advance();
      } else if (src_.substr(i_, 2) == "//") {
        while (i_ < src_.size() && src_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string take_word() {
    std::string w;
    while (i_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
      w += src_[i_];
      advance();
    }
    return w;
  }

  void lex_number_or_ordinal(Token& t) {
    std::string digits;
    while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
      digits += src_[i_];
      advance();
    }
    // 1st, 2nd, 3rd, nth-style projection names.
    if (i_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[i_])) &&
        src_[i_] != 'e' && src_[i_] != 'E') {
      t.kind = Tok::Ident;
      t.text = digits + take_word();
      return;
    }
    std::string text = digits;
    if (i_ + 1 < src_.size() && src_[i_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[i_ + 1]))) {
      text += '.';
      advance();
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        text += src_[i_];
        advance();
      }
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) {
        while (i_ < j) {
          text += src_[i_];
          advance();
        }
        while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
          text += src_[i_];
          advance();
        }
      }
    }
    if (i_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
      fail("malformed number '" + text + src_[i_] + "'", t.pos);
    }
    t.kind = Tok::Number;
    t.text = text;
    std::from_chars(text.data(), text.data() + text.size(), t.number);
  }

  void lex_string(Token& t) {
    advance();
    std::string s;
    while (i_ < src_.size() && src_[i_] != '"') {
      char c = src_[i_];
      if (c == '\n') fail("unterminated string literal", t.pos);
      if (c == '\\') {
        advance();
        if (i_ >= src_.size()) break;
        const char e = src_[i_];
        c = e == 'n' ? '\n' : (e == 't' ? '\t' : e);
      }
      s += c;
      advance();
    }
    if (i_ >= src_.size()) fail("unterminated string literal", t.pos);
    advance();
    t.kind = Tok::String;
    t.text = std::move(s);
  }

  void lex_punct(Token& t) {
    static const char* const two[] = {"=>", "==", "!=", "<=", ">=", "&&", "||"};
    for (const char* op : two) {
      if (src_.substr(i_, 2) == op) {
        t.kind = Tok::Punct;
        t.text = op;
        advance();
        advance();
        return;
      }
    }
    static const std::string_view one = "(){}[],+-*/%<>!=";
    if (one.find(src_[i_]) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = std::string(1, src_[i_]);
      advance();
      return;
    }
    fail(std::string("unexpected character '") + src_[i_] + "'", t.pos);
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string, std::less<>> kKeywords = {
    "def", "if", "nbr", "nbrLocal", "nbrRemote", "rep", "let", "in",
    "infinity", "true", "false", "null"};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (is_ident("def")) {
      FunctionDecl f = function();
      if (p.functions.count(f.name)) {
        throw ParseFailure{{DiagKind::DuplicateFunction, f.pos, "function '" + f.name + "' is already defined"}};
      }
      p.order.push_back(f.name);
      p.functions.emplace(f.name, std::move(f));
    }
    if (cur().kind == Tok::End) syntax("missing main expression");
    p.main = expr();
    if (cur().kind != Tok::End) syntax("unexpected '" + cur().text + "' after main expression");
    return p;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_ident(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }

  [[noreturn]] void syntax(const std::string& msg) const {
    throw ParseFailure{{DiagKind::Syntax, cur().pos, msg}};
  }

  Token take() { return toks_[pos_++]; }

  void expect(std::string_view p) {
    if (!is_punct(p)) {
      syntax("expected '" + std::string(p) + "' but found " +
             (cur().kind == Tok::End ? std::string("end of input") : "'" + cur().text + "'"));
    }
    ++pos_;
  }

  std::string identifier() {
    if (cur().kind != Tok::Ident || kKeywords.count(cur().text)) {
      syntax("expected identifier but found '" + cur().text + "'");
    }
    return take().text;
  }

  FunctionDecl function() {
    FunctionDecl f;
    f.pos = cur().pos;
    ++pos_;  // def
    f.name = identifier();
    expect("(");
    std::set<std::string> seen;
    if (!is_punct(")")) {
      for (;;) {
        const SourcePos p = cur().pos;
        std::string name = identifier();
        if (!seen.insert(name).second) {
          throw ParseFailure{{DiagKind::DuplicateParameter, p, "parameter '" + name + "' repeated in '" + f.name + "'"}};
        }
        f.params.push_back(std::move(name));
        if (!is_punct(",")) break;
        ++pos_;
      }
    }
    expect(")");
    expect("{");
    f.body = expr();
    expect("}");
    return f;
  }

  Expr expr() { return binary(0); }

  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return -1;
  }

  Expr binary(int min_prec) {
    Expr lhs = unary();
    for (;;) {
      if (cur().kind != Tok::Punct) return lhs;
      const int prec = precedence(cur().text);
      if (prec < 0 || prec < min_prec) return lhs;
      const Token op = take();
      Expr rhs = binary(prec + 1);
      lhs = Expr::call(op.text, {std::move(lhs), std::move(rhs)}, op.pos);
    }
  }

  Expr unary() {
    if (is_punct("-")) {
      const SourcePos p = take().pos;
      Expr operand = unary();
      if (operand.kind == ExprKind::Lit && operand.literal.is_number()) {
        operand.literal = LocalValue::number(-operand.literal.as_number());
        operand.pos = p;
        return operand;
      }
      return Expr::call(std::string(kNegate), {std::move(operand)}, p);
    }
    if (is_punct("!")) {
      const SourcePos p = take().pos;
      return Expr::call(std::string(kNot), {unary()}, p);
    }
    return primary();
  }

  std::vector<Expr> args_until(std::string_view close) {
    std::vector<Expr> out;
    if (is_punct(close)) return out;
    for (;;) {
      out.push_back(expr());
      if (!is_punct(",")) break;
      ++pos_;
    }
    return out;
  }

  Expr primary() {
    const Token& t = cur();
    const SourcePos p = t.pos;
    switch (t.kind) {
      case Tok::Number:
        ++pos_;
        return Expr::lit(LocalValue::number(t.number), p);
      case Tok::String: {
        Token s = take();
        return Expr::lit(LocalValue::string(s.text), p);
      }
      case Tok::Ctor: {
        const std::string name = take().text;
        if (name == "True" || name == "False") return Expr::lit(LocalValue::boolean(name == "True"), p);
        if (name == "Null") return Expr::lit(LocalValue::null(), p);
        if (is_punct("(")) {
          ++pos_;
          auto args = args_until(")");
          expect(")");
          return Expr::call(name, std::move(args), p);
        }
        return Expr::lit(LocalValue::constructor(name), p);
      }
      case Tok::Punct:
        if (t.text == "(") {
          ++pos_;
          Expr inner = expr();
          expect(")");
          return inner;
        }
        if (t.text == "[") {
          ++pos_;
          Expr e;
          e.kind = ExprKind::Tuple;
          e.pos = p;
          e.args = args_until("]");
          expect("]");
          return e;
        }
        syntax("unexpected '" + t.text + "'");
      case Tok::End:
        syntax("unexpected end of input");
      case Tok::Ident:
        break;
    }
    const std::string& w = t.text;
    if (w == "infinity") {
      ++pos_;
      return Expr::lit(LocalValue::number(std::numeric_limits<double>::infinity()), p);
    }
    if (w == "true" || w == "false") {
      ++pos_;
      return Expr::lit(LocalValue::boolean(w == "true"), p);
    }
    if (w == "null") {
      ++pos_;
      return Expr::lit(LocalValue::null(), p);
    }
    if (w == "if") return if_expr();
    if (w == "nbr" || w == "nbrLocal" || w == "nbrRemote") return nbr_expr();
    if (w == "rep") return rep_expr();
    if (w == "let") return let_expr();
    if (w == "def") syntax("function definitions must precede the main expression");
    if (w == "in") syntax("unexpected 'in'");
    std::string name = take().text;
    if (is_punct("(")) {
      ++pos_;
      auto args = args_until(")");
      expect(")");
      return Expr::call(std::move(name), std::move(args), p);
    }
    return Expr::var(std::move(name), p);
  }

  Expr if_expr() {
    Expr e;
    e.kind = ExprKind::If;
    e.pos = take().pos;
    expect("(");
    e.args.push_back(expr());
    expect(")");
    expect("{");
    e.args.push_back(expr());
    expect("}");
    expect("{");
    e.args.push_back(expr());
    expect("}");
    return e;
  }

  Expr nbr_expr() {
    Expr e;
    e.kind = ExprKind::Nbr;
    const Token kw = take();
    e.pos = kw.pos;
    e.scope = kw.text == "nbrLocal" ? NbrScope::Local
                                    : (kw.text == "nbrRemote" ? NbrScope::Remote : NbrScope::All);
    expect("{");
    e.args.push_back(expr());
    expect("}");
    return e;
  }

  Expr rep_expr() {
    Expr e;
    e.kind = ExprKind::Rep;
    e.pos = take().pos;
    expect("(");
    e.args = args_until(")");
    expect(")");
    expect("{");
    expect("(");
    std::set<std::string> seen;
    if (!is_punct(")")) {
      for (;;) {
        const SourcePos p = cur().pos;
        std::string name = identifier();
        if (!seen.insert(name).second) {
          throw ParseFailure{{DiagKind::DuplicateParameter, p, "rep parameter '" + name + "' repeated"}};
        }
        e.params.push_back(std::move(name));
        if (!is_punct(",")) break;
        ++pos_;
      }
    }
    expect(")");
    expect("=>");
    e.bodies = args_until("}");
    expect("}");
    if (e.args.empty()) {
      throw ParseFailure{{DiagKind::Syntax, e.pos, "rep needs at least one initial value"}};
    }
    if (e.args.size() != e.params.size() || e.params.size() != e.bodies.size()) {
      throw ParseFailure{{DiagKind::ArityMismatch, e.pos,
                          "rep has " + std::to_string(e.args.size()) + " initial values, " +
                              std::to_string(e.params.size()) + " parameters and " +
                              std::to_string(e.bodies.size()) + " bodies"}};
    }
    return e;
  }

  Expr let_expr() {
    Expr e;
    e.kind = ExprKind::Let;
    e.pos = take().pos;
    e.name = identifier();
    expect("=");
    e.args.push_back(expr());
    if (!is_ident("in")) syntax("expected 'in' after let binding");
    ++pos_;
    e.args.push_back(expr());
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void check_arity(const Program& p, const Expr& root) {
  for_each_expr(root, [&](const Expr& e) {
    if (e.kind != ExprKind::Call) return;
    if (const FunctionDecl* f = p.find(e.name); f && f->params.size() != e.args.size()) {
      throw ParseFailure{{DiagKind::ArityMismatch, e.pos,
                          "'" + e.name + "' takes " + std::to_string(f->params.size()) +
                              " arguments but is called with " + std::to_string(e.args.size())}};
    }
  });
}

}  // namespace

ParseResult parse(std::string_view source) {
  ParseResult result;
  try {
    Parser parser(Lexer(source).run());
    Program p = parser.program();
    for (const auto& name : p.order) check_arity(p, p.functions.at(name).body);
    check_arity(p, p.main);
    number_call_sites(p);
    result.program = std::move(p);
  } catch (const ParseFailure& f) {
    result.diagnostics.push_back(f.diag);
  }
  return result;
}

Program parse_or_throw(std::string_view source) {
  ParseResult r = parse(source);
  if (!r.ok()) throw FcError(to_string(r.diagnostics.front()));
  return std::move(*r.program);
}

void number_call_sites(Program& program) {
  auto number = [](Expr& root) {
    int next = 0;
    auto visit = [&next](auto& self, Expr& e) -> void {
      if (e.kind == ExprKind::Call) e.site = next++;
      for (auto& a : e.args) self(self, a);
      for (auto& b : e.bodies) self(self, b);
    };
    visit(visit, root);
  };
  for (auto& [name, f] : program.functions) number(f.body);
  number(program.main);
}

void bind_constants(Program& program, const std::map<std::string, LocalValue>& constants) {
  auto bind = [&constants](Expr& root) {
    auto visit = [&constants](auto& self, Expr& e) -> void {
      if (e.kind == ExprKind::Lit && e.literal.is_constructor() && e.literal.ctor_args().empty()) {
        if (auto it = constants.find(e.literal.ctor_name()); it != constants.end()) {
          e.literal = it->second;
        }
      }
      for (auto& a : e.args) self(self, a);
      for (auto& b : e.bodies) self(self, b);
    };
    visit(visit, root);
  };
  for (auto& [name, f] : program.functions) bind(f.body);
  bind(program.main);
}

}  // namespace fc
