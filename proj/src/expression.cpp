#include "hypfol/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "hypfol/error.hpp"

namespace hypfol {

struct Expression::Node {
  Kind kind;
  double value = 0.0;  // Number
  int var = 0;         // Variable (zero-based)
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

double checked(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string("non-finite result in ") + what);
  }
  return v;
}

double eval_node(const Expression::Node& n, std::span<const double> x) {
  using K = Expression::Kind;
  switch (n.kind) {
    case K::Number:
      return n.value;
    case K::Variable:
      if (static_cast<std::size_t>(n.var) >= x.size()) {
        throw DomainError("variable x" + std::to_string(n.var + 1) + " not bound");
      }
      return x[n.var];
    case K::Negate:
      return -eval_node(*n.lhs, x);
    case K::Add:
      return checked(eval_node(*n.lhs, x) + eval_node(*n.rhs, x), "+");
    case K::Sub:
      return checked(eval_node(*n.lhs, x) - eval_node(*n.rhs, x), "-");
    case K::Mul:
      return checked(eval_node(*n.lhs, x) * eval_node(*n.rhs, x), "*");
    case K::Div:
      return checked(eval_node(*n.lhs, x) / eval_node(*n.rhs, x), "/");
    case K::Pow:
      return checked(std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x)), "^");
    case K::Call: {
      const double a = eval_node(*n.lhs, x);
      switch (n.func) {
        case Expression::Func::Sin: return std::sin(a);
        case Expression::Func::Cos: return std::cos(a);
        case Expression::Func::Exp: return checked(std::exp(a), "exp");
        case Expression::Func::Sqrt:
          if (a < 0.0) throw DomainError("sqrt of negative argument");
          return std::sqrt(a);
        case Expression::Func::Cosh: return checked(std::cosh(a), "cosh");
        case Expression::Func::Sinh: return checked(std::sinh(a), "sinh");
        case Expression::Func::Tanh: return std::tanh(a);
      }
    }
  }
  return 0.0;
}

int max_var_node(const Expression::Node& n) {
  int m = n.kind == Expression::Kind::Variable ? n.var + 1 : 0;
  if (n.lhs) m = std::max(m, max_var_node(*n.lhs));
  if (n.rhs) m = std::max(m, max_var_node(*n.rhs));
  return m;
}

void print_node(const Expression::Node& n, std::string& out) {
  using K = Expression::Kind;
  switch (n.kind) {
    case K::Number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      if (n.value < 0.0) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case K::Variable:
      out += 'x';
      out += std::to_string(n.var + 1);
      return;
    case K::Negate:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case K::Call:
      out += Expression::func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: {
      static constexpr const char* ops = "+-*/^";
      const int idx = static_cast<int>(n.kind) - static_cast<int>(K::Add);
      out += '(';
      print_node(*n.lhs, out);
      out += ops[idx];
      print_node(*n.rhs, out);
      out += ')';
    }
  }
}

class Parser {
 public:
  Parser(std::string_view text, int max_vars) : s_(text), max_vars_(max_vars) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxParseDepth) throw ParseError("expression nested too deeply", p_.pos_);
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Expression::Kind k, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    DepthGuard g(*this);
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Expression::Kind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Expression::Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Expression::Kind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Expression::Kind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    DepthGuard g(*this);
    if (accept('-')) return make(Expression::Kind::Negate, unary());
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Expression::Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    const auto* first = s_.data() + start;
    const auto* last = s_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
    auto n = std::make_shared<Expression::Node>();
    n->kind = Expression::Kind::Number;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);

    if (id.size() > 1 && id[0] == 'x' &&
        id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int k = 0;
      auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (ec != std::errc() || k < 1 || k > max_vars_) {
        throw ParseError("variable " + std::string(id) + " out of range (n = " +
                             std::to_string(max_vars_) + ")",
                         start);
      }
      auto n = std::make_shared<Expression::Node>();
      n->kind = Expression::Kind::Variable;
      n->var = k - 1;
      return n;
    }

    static constexpr Expression::Func funcs[] = {
        Expression::Func::Sin,  Expression::Func::Cos,  Expression::Func::Exp,
        Expression::Func::Sqrt, Expression::Func::Cosh, Expression::Func::Sinh,
        Expression::Func::Tanh};
    for (auto f : funcs) {
      if (id == Expression::func_name(f)) {
        if (!accept('(')) throw ParseError("expected '(' after " + std::string(id), pos_);
        NodePtr arg = expr();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        auto n = std::make_shared<Expression::Node>();
        n->kind = Expression::Kind::Call;
        n->func = f;
        n->lhs = std::move(arg);
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(id) + "'", start);
  }

  std::string_view s_;
  int max_vars_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

Expression Expression::number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = v;
  return Expression(std::move(n));
}

Expression Expression::variable(int index) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->var = index;
  return Expression(std::move(n));
}

Expression Expression::negate(Expression a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Negate;
  n->lhs = std::move(a.root_);
  return Expression(std::move(n));
}

Expression Expression::binary(Kind op, Expression a, Expression b) {
  auto n = std::make_shared<Node>();
  n->kind = op;
  n->lhs = std::move(a.root_);
  n->rhs = std::move(b.root_);
  return Expression(std::move(n));
}

Expression Expression::call(Func f, Expression a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = f;
  n->lhs = std::move(a.root_);
  return Expression(std::move(n));
}

Expression::Kind Expression::kind() const { return root_->kind; }

double Expression::evaluate(std::span<const double> x) const {
  if (!root_) throw DomainError("evaluating empty expression");
  return eval_node(*root_, x);
}

int Expression::max_variable() const { return root_ ? max_var_node(*root_) : 0; }

std::string Expression::to_string() const {
  std::string out;
  if (root_) print_node(*root_, out);
  return out;
}

std::string_view Expression::func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Sqrt: return "sqrt";
    case Func::Cosh: return "cosh";
    case Func::Sinh: return "sinh";
    case Func::Tanh: return "tanh";
  }
  return "?";
}

Expression parse_expression(std::string_view text, int max_vars) {
  Parser p(text, max_vars);
  return Expression(p.parse());
}

}  // namespace hypfol
