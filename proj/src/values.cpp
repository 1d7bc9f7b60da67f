#include "fc/values.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace fc {

LocalValue LocalValue::number(double v) {
  LocalValue r;
  r.kind_ = Kind::Number;
  r.num_ = v;
  return r;
}

LocalValue LocalValue::boolean(bool v) {
  LocalValue r;
  r.kind_ = Kind::Boolean;
  r.bool_ = v;
  return r;
}

LocalValue LocalValue::string(std::string v) {
  LocalValue r;
  r.kind_ = Kind::String;
  r.text_ = std::move(v);
  return r;
}

LocalValue LocalValue::null() { return LocalValue{}; }

LocalValue LocalValue::device(DeviceId id) {
  LocalValue r;
  r.kind_ = Kind::Device;
  r.dev_ = id;
  return r;
}

LocalValue LocalValue::constructor(std::string name, std::vector<LocalValue> args) {
  LocalValue r;
  r.kind_ = Kind::Constructor;
  r.text_ = std::move(name);
  r.args_ = std::move(args);
  return r;
}

LocalValue LocalValue::tuple(std::vector<LocalValue> elems) {
  return constructor("Tuple", std::move(elems));
}

LocalValue LocalValue::vec2(double x, double y) {
  return constructor("Vec2", {number(x), number(y)});
}

std::string_view kind_name(LocalValue::Kind k) {
  switch (k) {
    case LocalValue::Kind::Number: return "number";
    case LocalValue::Kind::Boolean: return "boolean";
    case LocalValue::Kind::String: return "string";
    case LocalValue::Kind::Null: return "null";
    case LocalValue::Kind::Device: return "device";
    case LocalValue::Kind::Constructor: return "constructor";
  }
  return "?";
}

namespace {

[[noreturn]] void wrong_kind(std::string_view wanted, const LocalValue& got) {
  throw TypeError("expected " + std::string(wanted) + ", got " + encode(got));
}

}  // namespace

double LocalValue::as_number() const {
  if (kind_ == Kind::Number) return num_;
  if (kind_ == Kind::Device) return static_cast<double>(dev_);
  wrong_kind("number", *this);
}

bool LocalValue::as_boolean() const {
  if (kind_ != Kind::Boolean) wrong_kind("boolean", *this);
  return bool_;
}

const std::string& LocalValue::as_string() const {
  if (kind_ != Kind::String) wrong_kind("string", *this);
  return text_;
}

DeviceId LocalValue::as_device() const {
  if (kind_ != Kind::Device) wrong_kind("device id", *this);
  return dev_;
}

const std::string& LocalValue::ctor_name() const {
  if (kind_ != Kind::Constructor) wrong_kind("constructor", *this);
  return text_;
}

const std::vector<LocalValue>& LocalValue::ctor_args() const {
  if (kind_ != Kind::Constructor) wrong_kind("constructor", *this);
  return args_;
}

std::pair<double, double> LocalValue::as_vec2() const {
  if (!is_constructor("Vec2") || args_.size() != 2) wrong_kind("Vec2", *this);
  return {args_[0].as_number(), args_[1].as_number()};
}

bool operator==(const LocalValue& a, const LocalValue& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case LocalValue::Kind::Number: return a.num_ == b.num_;
    case LocalValue::Kind::Boolean: return a.bool_ == b.bool_;
    case LocalValue::Kind::String: return a.text_ == b.text_;
    case LocalValue::Kind::Null: return true;
    case LocalValue::Kind::Device: return a.dev_ == b.dev_;
    case LocalValue::Kind::Constructor: return a.text_ == b.text_ && a.args_ == b.args_;
  }
  return false;
}

const LocalValue& as_local(const Value& v) {
  if (const auto* l = std::get_if<LocalValue>(&v)) return *l;
  throw TypeError("expected a local value, got a neighbouring value " + encode(v));
}

const NeighbouringValue& as_field(const Value& v) {
  if (const auto* f = std::get_if<NeighbouringValue>(&v)) return *f;
  throw TypeError("expected a neighbouring value, got " + encode(v));
}

std::strong_ordering compare(const LocalValue& a, const LocalValue& b) {
  using K = LocalValue::Kind;
  if (a.is_numeric() && b.is_numeric()) {
    const double x = a.as_number();
    const double y = b.as_number();
    if (std::isnan(x) || std::isnan(y)) throw IncomparableError("NaN is not comparable");
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (a.kind() != b.kind()) {
    throw IncomparableError("cannot compare " + encode(a) + " with " + encode(b));
  }
  switch (a.kind()) {
    case K::Boolean: return a.as_boolean() <=> b.as_boolean();
    case K::String: {
      const int c = a.as_string().compare(b.as_string());
      return c < 0 ? std::strong_ordering::less
                   : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    case K::Null: return std::strong_ordering::equal;
    case K::Constructor: {
      if (a.ctor_name() != b.ctor_name() || a.ctor_args().size() != b.ctor_args().size()) {
        throw IncomparableError("cannot compare " + encode(a) + " with " + encode(b));
      }
      for (std::size_t i = 0; i < a.ctor_args().size(); ++i) {
        const auto c = compare(a.ctor_args()[i], b.ctor_args()[i]);
        if (c != std::strong_ordering::equal) return c;
      }
      return std::strong_ordering::equal;
    }
    default: break;
  }
  throw IncomparableError("cannot compare " + encode(a) + " with " + encode(b));
}

bool equal(const Value& a, const Value& b) { return a == b; }

bool operator==(const ValueTree& a, const ValueTree& b) {
  return a.tag == b.tag && a.frame == b.frame && a.site == b.site && a.value == b.value &&
         a.children == b.children;
}

std::size_t ValueTree::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

std::string to_string(const Path& path) {
  std::string out = "/";
  for (const auto& s : path) {
    switch (s.kind) {
      case PathStep::Kind::Child: out += std::to_string(s.index); break;
      case PathStep::Kind::Branch: out += s.then_branch ? "then" : "else"; break;
      case PathStep::Kind::Frame: out += s.function + "@" + std::to_string(s.index); break;
    }
    out += '/';
  }
  return out;
}

const ValueTree* vt_find(const ValueTree& tree, const Path& path) {
  const ValueTree* node = &tree;
  for (const auto& step : path) {
    if (node->tag == NodeTag::Skipped) return nullptr;
    switch (step.kind) {
      case PathStep::Kind::Child:
        if (step.index < 0 || static_cast<std::size_t>(step.index) >= node->children.size()) {
          return nullptr;
        }
        node = &node->children[static_cast<std::size_t>(step.index)];
        break;
      case PathStep::Kind::Branch:
        if (node->tag != (step.then_branch ? NodeTag::Then : NodeTag::Else)) return nullptr;
        break;
      case PathStep::Kind::Frame:
        if (node->tag != NodeTag::Frame || node->frame != step.function || node->site != step.index) {
          return nullptr;
        }
        break;
    }
  }
  if (node->tag == NodeTag::Skipped) return nullptr;
  return node;
}

std::optional<Value> vt_lookup(const ValueTree& tree, const Path& path) {
  if (const ValueTree* n = vt_find(tree, path)) return n->value;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Encoding

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

namespace {

void encode_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
}

void encode_into(std::string& out, const LocalValue& v) {
  switch (v.kind()) {
    case LocalValue::Kind::Number: out += format_number(v.as_number()); break;
    case LocalValue::Kind::Boolean: out += v.as_boolean() ? "True" : "False"; break;
    case LocalValue::Kind::String: encode_string(out, v.as_string()); break;
    case LocalValue::Kind::Null: out += "Null"; break;
    case LocalValue::Kind::Device: out += '#' + std::to_string(v.as_device()); break;
    case LocalValue::Kind::Constructor:
      out += v.ctor_name();
      if (!v.ctor_args().empty()) {
        out += '(';
        for (std::size_t i = 0; i < v.ctor_args().size(); ++i) {
          if (i) out += ", ";
          encode_into(out, v.ctor_args()[i]);
        }
        out += ')';
      }
      break;
  }
}

void encode_into(std::string& out, const Value& v) {
  if (const auto* l = std::get_if<LocalValue>(&v)) {
    encode_into(out, *l);
    return;
  }
  const auto& f = std::get<NeighbouringValue>(v);
  out += "{#" + std::to_string(f.self) + " |";
  bool first = true;
  for (const auto& [id, val] : f.entries) {
    out += first ? " #" : ", #";
    first = false;
    out += std::to_string(id) + ": ";
    encode_into(out, val);
  }
  out += '}';
}

void encode_into(std::string& out, const ValueTree& t) {
  out += '<';
  encode_into(out, t.value);
  out += ' ';
  switch (t.tag) {
    case NodeTag::None: out += '-'; break;
    case NodeTag::Then: out += 'T'; break;
    case NodeTag::Else: out += 'E'; break;
    case NodeTag::Skipped: out += 'S'; break;
    case NodeTag::Frame: out += "F:" + t.frame + ":" + std::to_string(t.site); break;
  }
  for (const auto& c : t.children) {
    out += ' ';
    encode_into(out, c);
  }
  out += '>';
}

class Decoder {
 public:
  explicit Decoder(std::string_view text) : s_(text) {}

  LocalValue local() {
    skip_ws();
    if (at_end()) fail("unexpected end of input");
    const char c = s_[i_];
    if (c == '"') return LocalValue::string(string_lit());
    if (c == '#') {
      ++i_;
      return LocalValue::device(static_cast<DeviceId>(number_token()));
    }
    if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      return LocalValue::number(number_token());
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::string word = ident();
      if (word == "True" || word == "true") return LocalValue::boolean(true);
      if (word == "False" || word == "false") return LocalValue::boolean(false);
      if (word == "Null" || word == "null") return LocalValue::null();
      if (word == "inf" || word == "infinity") return LocalValue::number(std::numeric_limits<double>::infinity());
      if (!std::isupper(static_cast<unsigned char>(word[0]))) fail("constructor names are capitalised: '" + word + "'");
      std::vector<LocalValue> args;
      skip_ws();
      if (peek('(')) {
        ++i_;
        skip_ws();
        if (!peek(')')) {
          for (;;) {
            args.push_back(local());
            skip_ws();
            if (peek(',')) {
              ++i_;
              continue;
            }
            break;
          }
        }
        expect(')');
      }
      return LocalValue::constructor(word, std::move(args));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Value value() {
    skip_ws();
    if (!peek('{')) return local();
    ++i_;
    NeighbouringValue f;
    skip_ws();
    expect('#');
    f.self = static_cast<DeviceId>(number_token());
    skip_ws();
    expect('|');
    skip_ws();
    while (!peek('}')) {
      expect('#');
      const auto id = static_cast<DeviceId>(number_token());
      skip_ws();
      expect(':');
      f.entries[id] = local();
      skip_ws();
      if (peek(',')) ++i_;
      skip_ws();
    }
    expect('}');
    if (!f.entries.count(f.self)) fail("neighbouring value lacks its self entry");
    return f;
  }

  ValueTree tree() {
    skip_ws();
    expect('<');
    ValueTree t;
    t.value = value();
    skip_ws();
    const std::string tag = token();
    if (tag == "-") {
      t.tag = NodeTag::None;
    } else if (tag == "T") {
      t.tag = NodeTag::Then;
    } else if (tag == "E") {
      t.tag = NodeTag::Else;
    } else if (tag == "S") {
      t.tag = NodeTag::Skipped;
    } else if (tag.rfind("F:", 0) == 0) {
      const auto colon = tag.rfind(':');
      if (colon <= 2) fail("malformed frame tag " + tag);
      t.tag = NodeTag::Frame;
      t.frame = tag.substr(2, colon - 2);
      t.site = std::stoi(tag.substr(colon + 1));
    } else {
      fail("unknown node tag " + tag);
    }
    skip_ws();
    while (!peek('>')) {
      t.children.push_back(tree());
      skip_ws();
    }
    expect('>');
    return t;
  }

  void finish() {
    skip_ws();
    if (!at_end()) fail("trailing characters");
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw FcError("value decode error at offset " + std::to_string(i_) + ": " + msg);
  }
  bool at_end() const { return i_ >= s_.size(); }
  bool peek(char c) const { return !at_end() && s_[i_] == c; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++i_;
  }
  std::string ident() {
    const std::size_t start = i_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    return std::string(s_.substr(start, i_ - start));
  }
  std::string token() {
    const std::size_t start = i_;
    while (!at_end() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '>' &&
           s_[i_] != '<') {
      ++i_;
    }
    return std::string(s_.substr(start, i_ - start));
  }
  double number_token() {
    const std::size_t start = i_;
    if (peek('-') || peek('+')) ++i_;
    if (s_.substr(i_, 3) == "inf") {
      i_ += 3;
      const double inf = std::numeric_limits<double>::infinity();
      return s_[start] == '-' ? -inf : inf;
    }
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' ||
                         s_[i_] == 'e' || s_[i_] == 'E' ||
                         ((s_[i_] == '-' || s_[i_] == '+') && (s_[i_ - 1] == 'e' || s_[i_ - 1] == 'E')))) {
      ++i_;
    }
    std::string_view tok = s_.substr(start, i_ - start);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("bad number '" + std::string(tok) + "'");
    return v;
  }
  std::string string_lit() {
    expect('"');
    std::string out;
    while (!at_end() && s_[i_] != '"') {
      char c = s_[i_++];
      if (c == '\\') {
        if (at_end()) fail("unterminated escape");
        const char e = s_[i_++];
        c = e == 'n' ? '\n' : (e == 't' ? '\t' : e);
      }
      out += c;
    }
    expect('"');
    return out;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

std::string encode(const LocalValue& v) {
  std::string out;
  encode_into(out, v);
  return out;
}

std::string encode(const Value& v) {
  std::string out;
  encode_into(out, v);
  return out;
}

std::string encode(const ValueTree& t) {
  std::string out;
  encode_into(out, t);
  return out;
}

LocalValue decode_local(std::string_view text) {
  Decoder d(text);
  LocalValue v = d.local();
  d.finish();
  return v;
}

Value decode_value(std::string_view text) {
  Decoder d(text);
  Value v = d.value();
  d.finish();
  return v;
}

ValueTree decode_tree(std::string_view text) {
  Decoder d(text);
  ValueTree t = d.tree();
  d.finish();
  return t;
}

}  // namespace fc
