#include "nabif/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace nabif::expr {

namespace {

enum class Tok : std::uint8_t {
  Num,
  Ident,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  End,
};

struct Token {
  Tok type{Tok::End};
  std::size_t offset{0};
  std::string_view text;
  double num{0.0};
};

struct FnEntry {
  std::string_view name;
  Fn fn;
};

constexpr std::array<FnEntry, 7> kFunctions{{
    {"exp", Fn::Exp},
    {"log", Fn::Log},
    {"sin", Fn::Sin},
    {"cos", Fn::Cos},
    {"tanh", Fn::Tanh},
    {"abs", Fn::Abs},
    {"sqrt", Fn::Sqrt},
}};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& current() const { return cur_; }

  void advance() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    cur_.offset = pos_;
    if (pos_ >= src_.size()) {
      cur_.type = Tok::End;
      cur_.text = {};
      return;
    }
    char c = src_[pos_];
    switch (c) {
      case '+': single(Tok::Plus); return;
      case '-': single(Tok::Minus); return;
      case '*': single(Tok::Star); return;
      case '/': single(Tok::Slash); return;
      case '^': single(Tok::Caret); return;
      case '(': single(Tok::LParen); return;
      case ')': single(Tok::RParen); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        ++pos_;
      }
      cur_.type = Tok::Ident;
      cur_.text = src_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "token",
                     "unexpected character '" + std::string(1, c) +
                         "' at offset " + std::to_string(pos_));
  }

 private:
  void single(Tok t) {
    cur_.type = t;
    cur_.text = src_.substr(pos_, 1);
    ++pos_;
  }

  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          ++pos_;
        }
      } else {
        pos_ = mark;  // "2e" is the number 2 followed by identifier e
      }
    }
    cur_.type = Tok::Num;
    cur_.text = src_.substr(start, pos_ - start);
    double v = 0;
    auto res = std::from_chars(cur_.text.data(), cur_.text.data() + cur_.text.size(), v);
    if (res.ec != std::errc{}) {
      throw ParseError(ParseErrorKind::UnexpectedToken, start, "number",
                       "malformed numeric literal at offset " +
                           std::to_string(start));
    }
    cur_.num = v;
  }

  std::string_view src_;
  std::size_t pos_{0};
  Token cur_;
};

}  // namespace

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Expression run() {
    if (lex_.current().type == Tok::End) {
      throw ParseError(ParseErrorKind::EmptyInput, 0, "expression",
                       "empty expression");
    }
    out_.root_ = parse_sum();
    const Token& t = lex_.current();
    if (t.type == Tok::RParen) {
      throw ParseError(ParseErrorKind::UnbalancedParenthesis, t.offset,
                       "end of input",
                       "unbalanced ')' at offset " + std::to_string(t.offset));
    }
    if (t.type != Tok::End) {
      throw ParseError(ParseErrorKind::UnexpectedToken, t.offset,
                       "operator or end of input",
                       "unexpected token at offset " + std::to_string(t.offset));
    }
    return std::move(out_);
  }

 private:
  std::int32_t add_node(Node n) {
    out_.nodes_.push_back(n);
    return static_cast<std::int32_t>(out_.nodes_.size() - 1);
  }

  std::int32_t parse_sum() {
    std::int32_t lhs = parse_term();
    for (;;) {
      Tok t = lex_.current().type;
      if (t == Tok::Plus || t == Tok::Minus) {
        lex_.advance();
        std::int32_t rhs = parse_term();
        Node n;
        n.kind = (t == Tok::Plus) ? Kind::Add : Kind::Sub;
        n.a = lhs;
        n.b = rhs;
        lhs = add_node(n);
      } else {
        return lhs;
      }
    }
  }

  std::int32_t parse_term() {
    std::int32_t lhs = parse_unary();
    for (;;) {
      Tok t = lex_.current().type;
      if (t == Tok::Star || t == Tok::Slash) {
        lex_.advance();
        std::int32_t rhs = parse_unary();
        Node n;
        n.kind = (t == Tok::Star) ? Kind::Mul : Kind::Div;
        n.a = lhs;
        n.b = rhs;
        lhs = add_node(n);
      } else {
        return lhs;
      }
    }
  }

  // Unary minus binds weaker than ^, so -x^2 is -(x^2).
  std::int32_t parse_unary() {
    if (lex_.current().type == Tok::Minus) {
      lex_.advance();
      std::int32_t operand = parse_unary();
      Node n;
      n.kind = Kind::Neg;
      n.a = operand;
      return add_node(n);
    }
    return parse_power();
  }

  std::int32_t parse_power() {
    std::int32_t base = parse_primary();
    if (lex_.current().type == Tok::Caret) {
      lex_.advance();
      std::int32_t exponent = parse_unary();  // right associative, 2^-3 legal
      Node n;
      n.kind = Kind::Pow;
      n.a = base;
      n.b = exponent;
      return add_node(n);
    }
    return base;
  }

  std::int32_t parse_primary() {
    const Token t = lex_.current();
    switch (t.type) {
      case Tok::Num: {
        lex_.advance();
        Node n;
        n.kind = Kind::Literal;
        n.value = t.num;
        return add_node(n);
      }
      case Tok::Ident:
        return parse_ident(t);
      case Tok::LParen: {
        lex_.advance();
        std::int32_t inner = parse_sum();
        expect_rparen();
        return inner;
      }
      case Tok::End:
        throw ParseError(ParseErrorKind::UnexpectedToken, t.offset,
                         "number, variable, function or '('",
                         "unexpected end of input at offset " +
                             std::to_string(t.offset));
      case Tok::RParen:
        throw ParseError(ParseErrorKind::UnbalancedParenthesis, t.offset,
                         "number, variable, function or '('",
                         "unbalanced ')' at offset " + std::to_string(t.offset));
      default:
        throw ParseError(ParseErrorKind::UnexpectedToken, t.offset,
                         "number, variable, function or '('",
                         "unexpected token at offset " + std::to_string(t.offset));
    }
  }

  std::int32_t parse_ident(const Token& t) {
    lex_.advance();
    if (t.text == "t") return variable(Kind::VarT, 0);
    if (t.text == "x") return variable(Kind::VarX, 1);
    if (t.text == "mu") return variable(Kind::VarMu, 2);
    for (const FnEntry& e : kFunctions) {
      if (t.text == e.name) {
        if (lex_.current().type != Tok::LParen) {
          throw ParseError(ParseErrorKind::UnexpectedToken,
                           lex_.current().offset, "(",
                           "expected '(' after function '" +
                               std::string(t.text) + "' at offset " +
                               std::to_string(lex_.current().offset));
        }
        lex_.advance();
        std::int32_t arg = parse_sum();
        expect_rparen();
        Node n;
        n.kind = Kind::Call;
        n.fn = e.fn;
        n.a = arg;
        return add_node(n);
      }
    }
    throw ParseError(ParseErrorKind::UnknownIdentifier, t.offset,
                     "t, x, mu or a function name",
                     "unknown identifier '" + std::string(t.text) +
                         "' at offset " + std::to_string(t.offset));
  }

  std::int32_t variable(Kind kind, int slot) {
    out_.uses_[slot] = true;
    Node n;
    n.kind = kind;
    return add_node(n);
  }

  void expect_rparen() {
    const Token& t = lex_.current();
    if (t.type != Tok::RParen) {
      throw ParseError(ParseErrorKind::UnbalancedParenthesis, t.offset, ")",
                       "unbalanced '(': expected ')' at offset " +
                           std::to_string(t.offset));
    }
    lex_.advance();
  }

  Lexer lex_;
  Expression out_;
};

Expression Expression::parse(std::string_view source) {
  Parser p(source);
  return p.run();
}

const char* fn_name(Fn fn) noexcept {
  switch (fn) {
    case Fn::Exp: return "exp";
    case Fn::Log: return "log";
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tanh: return "tanh";
    case Fn::Abs: return "abs";
    case Fn::Sqrt: return "sqrt";
  }
  return "?";
}

double ipow(double base, long long exponent) noexcept {
  if (exponent < 0) return 1.0 / ipow(base, -exponent);
  double result = 1.0;
  double acc = base;
  while (exponent > 0) {
    if (exponent & 1) result *= acc;
    acc *= acc;
    exponent >>= 1;
  }
  return result;
}

namespace {

inline double apply_pow(double base, double e) noexcept {
  // Integer exponents are computed by repeated multiplication so that
  // even/odd powers of negative bases are exact; anything else defers
  // to std::pow (NaN for a negative base, reported by checked eval).
  if (e == std::nearbyint(e) && std::fabs(e) <= 1024.0) {
    return ipow(base, static_cast<long long>(e));
  }
  return std::pow(base, e);
}

inline double apply_fn(Fn fn, double v) noexcept {
  switch (fn) {
    case Fn::Exp: return std::exp(v);
    case Fn::Log: return std::log(v);
    case Fn::Sin: return std::sin(v);
    case Fn::Cos: return std::cos(v);
    case Fn::Tanh: return std::tanh(v);
    case Fn::Abs: return std::fabs(v);
    case Fn::Sqrt: return std::sqrt(v);
  }
  return 0.0;
}

}  // namespace

double Expression::eval_node(std::int32_t i, double t, double x,
                             double mu) const noexcept {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  switch (n.kind) {
    case Kind::Literal: return n.value;
    case Kind::VarT: return t;
    case Kind::VarX: return x;
    case Kind::VarMu: return mu;
    case Kind::Add: return eval_node(n.a, t, x, mu) + eval_node(n.b, t, x, mu);
    case Kind::Sub: return eval_node(n.a, t, x, mu) - eval_node(n.b, t, x, mu);
    case Kind::Mul: return eval_node(n.a, t, x, mu) * eval_node(n.b, t, x, mu);
    case Kind::Div: return eval_node(n.a, t, x, mu) / eval_node(n.b, t, x, mu);
    case Kind::Pow:
      return apply_pow(eval_node(n.a, t, x, mu), eval_node(n.b, t, x, mu));
    case Kind::Neg: return -eval_node(n.a, t, x, mu);
    case Kind::Call: return apply_fn(n.fn, eval_node(n.a, t, x, mu));
  }
  return 0.0;
}

double Expression::eval(double t, double x, double mu) const noexcept {
  return eval_node(root_, t, x, mu);
}

double Expression::eval_node_checked(std::int32_t i, double t, double x,
                                     double mu, std::string& path) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  double v = 0.0;
  switch (n.kind) {
    case Kind::Literal: v = n.value; break;
    case Kind::VarT: v = t; break;
    case Kind::VarX: v = x; break;
    case Kind::VarMu: v = mu; break;
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Div:
    case Kind::Pow: {
      path.push_back('a');
      path.push_back('/');
      double lhs = eval_node_checked(n.a, t, x, mu, path);
      path.resize(path.size() - 2);
      path.push_back('b');
      path.push_back('/');
      double rhs = eval_node_checked(n.b, t, x, mu, path);
      path.resize(path.size() - 2);
      switch (n.kind) {
        case Kind::Add: v = lhs + rhs; break;
        case Kind::Sub: v = lhs - rhs; break;
        case Kind::Mul: v = lhs * rhs; break;
        case Kind::Div: v = lhs / rhs; break;
        default: v = apply_pow(lhs, rhs); break;
      }
      break;
    }
    case Kind::Neg: {
      path.push_back('a');
      path.push_back('/');
      v = -eval_node_checked(n.a, t, x, mu, path);
      path.resize(path.size() - 2);
      break;
    }
    case Kind::Call: {
      path.push_back('a');
      path.push_back('/');
      v = apply_fn(n.fn, eval_node_checked(n.a, t, x, mu, path));
      path.resize(path.size() - 2);
      break;
    }
  }
  if (!std::isfinite(v)) {
    std::string sub;
    print_node(i, 0, false, sub);
    std::string where = "root/" + path;
    if (!where.empty() && where.back() == '/') where.pop_back();
    throw NonFiniteError(sub, where);
  }
  return v;
}

double Expression::eval_checked(double t, double x, double mu) const {
  std::string path;
  return eval_node_checked(root_, t, x, mu, path);
}

namespace {

std::string format_literal(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline int node_prec(Kind k) noexcept {
  switch (k) {
    case Kind::Add:
    case Kind::Sub: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Neg: return 3;
    case Kind::Pow: return 4;
    default: return 5;
  }
}

}  // namespace

void Expression::print_node(std::int32_t i, int parent_prec,
                            bool rhs_of_nonassoc, std::string& out) const {
  const Node& n = nodes_[static_cast<std::size_t>(i)];
  int prec = node_prec(n.kind);
  bool need_parens =
      prec < parent_prec || (prec == parent_prec && rhs_of_nonassoc);
  if (need_parens) out.push_back('(');
  switch (n.kind) {
    case Kind::Literal: out += format_literal(n.value); break;
    case Kind::VarT: out.push_back('t'); break;
    case Kind::VarX: out.push_back('x'); break;
    case Kind::VarMu: out += "mu"; break;
    case Kind::Add:
      print_node(n.a, 1, false, out);
      out += " + ";
      print_node(n.b, 1, true, out);
      break;
    case Kind::Sub:
      print_node(n.a, 1, false, out);
      out += " - ";
      print_node(n.b, 1, true, out);
      break;
    case Kind::Mul:
      print_node(n.a, 2, false, out);
      out.push_back('*');
      print_node(n.b, 2, true, out);
      break;
    case Kind::Div:
      print_node(n.a, 2, false, out);
      out.push_back('/');
      print_node(n.b, 2, true, out);
      break;
    case Kind::Pow:
      // ^ is right associative: the left side needs parens at equal
      // precedence, the right side accepts unary expressions unchanged.
      print_node(n.a, 5, false, out);
      out.push_back('^');
      print_node(n.b, 3, false, out);
      break;
    case Kind::Neg:
      out.push_back('-');
      print_node(n.a, 3, false, out);
      break;
    case Kind::Call:
      out += fn_name(n.fn);
      out.push_back('(');
      print_node(n.a, 0, false, out);
      out.push_back(')');
      break;
  }
  if (need_parens) out.push_back(')');
}

std::string Expression::str() const {
  std::string out;
  if (root_ >= 0) print_node(root_, 0, false, out);
  return out;
}

namespace {

bool nodes_equal(const std::vector<Node>& an, std::int32_t ai,
                 const std::vector<Node>& bn, std::int32_t bi) {
  if ((ai < 0) != (bi < 0)) return false;
  if (ai < 0) return true;
  const Node& a = an[static_cast<std::size_t>(ai)];
  const Node& b = bn[static_cast<std::size_t>(bi)];
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Kind::Literal:
      return a.value == b.value;
    case Kind::VarT:
    case Kind::VarX:
    case Kind::VarMu:
      return true;
    case Kind::Call:
      if (a.fn != b.fn) return false;
      return nodes_equal(an, a.a, bn, b.a);
    case Kind::Neg:
      return nodes_equal(an, a.a, bn, b.a);
    default:
      return nodes_equal(an, a.a, bn, b.a) && nodes_equal(an, a.b, bn, b.b);
  }
}

}  // namespace

bool Expression::structurally_equal(const Expression& other) const noexcept {
  return nodes_equal(nodes_, root_, other.nodes_, other.root_);
}

}  // namespace nabif::expr
