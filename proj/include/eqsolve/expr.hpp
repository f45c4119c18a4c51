#pragma once

// Expression trees for real-valued equations, a recursive-descent parser for
// the equation-system text format, and residual evaluation.
//
// Text format: one equation per line, `<expr> = <expr>`. `#` starts a comment
// that runs to the end of the line; blank lines are ignored. Operators are
// `+ - * / ^` with the usual precedence, `^` right-associative and binding
// tighter than unary minus (so `-x^2` is `-(x^2)`), and unary minus binding
// tighter than `*` and `/`. Functions: sin cos exp ln sqrt abs.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "vector.hpp"

namespace eqsolve {

enum class UnaryOp { Neg, Sin, Cos, Exp, Ln, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

inline std::string_view to_string(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "-";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Ln: return "ln";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

inline std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "^";
  }
  return "?";
}

inline std::optional<UnaryOp> function_from_name(std::string_view name) {
  static constexpr std::array<std::pair<std::string_view, UnaryOp>, 6> table{{
      {"sin", UnaryOp::Sin},
      {"cos", UnaryOp::Cos},
      {"exp", UnaryOp::Exp},
      {"ln", UnaryOp::Ln},
      {"sqrt", UnaryOp::Sqrt},
      {"abs", UnaryOp::Abs},
  }};
  for (const auto& [n, op] : table)
    if (n == name) return op;
  return std::nullopt;
}

class Expression;

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct ConstantNode {
  double value;
};
struct VariableNode {
  std::string name;
  std::size_t index;
};
struct UnaryNode {
  UnaryOp op;
  NodePtr child;
};
struct BinaryNode {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};

struct Node {
  std::variant<ConstantNode, VariableNode, UnaryNode, BinaryNode> data;
};

}  // namespace detail

/// Immutable expression tree. Copies share structure.
class Expression {
public:
  using NodePtr = detail::NodePtr;

  static Expression constant(double value) { return Expression(make(detail::ConstantNode{value})); }

  static Expression variable(std::string name, std::size_t index) {
    return Expression(make(detail::VariableNode{std::move(name), index}));
  }

  static Expression unary(UnaryOp op, const Expression& child) {
    return Expression(make(detail::UnaryNode{op, child.root_}));
  }

  static Expression binary(BinaryOp op, const Expression& lhs, const Expression& rhs) {
    return Expression(make(detail::BinaryNode{op, lhs.root_, rhs.root_}));
  }

  const detail::Node& node() const { return *root_; }

  bool is_constant() const { return std::holds_alternative<detail::ConstantNode>(root_->data); }

  /// Left and right operands when the root is the binary operator `op`.
  std::optional<std::pair<Expression, Expression>> operands(BinaryOp op) const {
    const auto* b = std::get_if<detail::BinaryNode>(&root_->data);
    if (b == nullptr || b->op != op) return std::nullopt;
    return std::pair{Expression(b->lhs), Expression(b->rhs)};
  }

  /// Value at `point`, indexed by variable order. Throws DomainError instead
  /// of ever producing a NaN or infinity.
  double evaluate(std::span<const double> point) const { return eval<double>(*root_, point); }

  /// Same as evaluate, carried out in long double. Used where cancellation
  /// between nearby values matters, such as finite differences.
  long double evaluate_extended(std::span<const long double> point) const { return eval<long double>(*root_, point); }

  /// Fully parenthesized text that parses back to an identical tree.
  std::string to_string() const {
    std::string out;
    print(*root_, out);
    return out;
  }

  /// Largest variable index referenced plus one (0 for constant trees).
  std::size_t arity() const { return arity(*root_); }

  friend bool operator==(const Expression& a, const Expression& b) { return equal(*a.root_, *b.root_); }

private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  template <typename T>
  static NodePtr make(T&& payload) {
    return std::make_shared<const detail::Node>(detail::Node{std::forward<T>(payload)});
  }

  template <typename R>
  static R checked(R v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " is not finite");
    return v;
  }

  template <typename R>
  static R eval(const detail::Node& n, std::span<const R> point) {
    return std::visit(
        [&](const auto& node) -> R {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, detail::ConstantNode>) {
            return node.value;
          } else if constexpr (std::is_same_v<T, detail::VariableNode>) {
            if (node.index >= point.size())
              throw DimensionMismatch("variable '" + node.name + "' has no value in a point of length " +
                                      std::to_string(point.size()));
            return point[node.index];
          } else if constexpr (std::is_same_v<T, detail::UnaryNode>) {
            return apply(node.op, eval<R>(*node.child, point));
          } else {
            const R a = eval<R>(*node.lhs, point);
            const R b = eval<R>(*node.rhs, point);
            return apply(node.op, a, b);
          }
        },
        n.data);
  }

  template <typename R>
  static R apply(UnaryOp op, R x) {
    switch (op) {
      case UnaryOp::Neg: return -x;
      case UnaryOp::Sin: return checked(std::sin(x), "sin");
      case UnaryOp::Cos: return checked(std::cos(x), "cos");
      case UnaryOp::Exp: return checked(std::exp(x), "exp");
      case UnaryOp::Ln:
        if (!(x > 0.0)) throw DomainError("ln of non-positive value");
        return std::log(x);
      case UnaryOp::Sqrt:
        if (x < 0.0) throw DomainError("sqrt of negative value");
        return std::sqrt(x);
      case UnaryOp::Abs: return std::abs(x);
    }
    throw DomainError("unknown unary operator");
  }

  template <typename R>
  static R apply(BinaryOp op, R a, R b) {
    switch (op) {
      case BinaryOp::Add: return checked(a + b, "sum");
      case BinaryOp::Sub: return checked(a - b, "difference");
      case BinaryOp::Mul: return checked(a * b, "product");
      case BinaryOp::Div:
        if (b == 0.0) throw DomainError("division by zero");
        return checked(a / b, "quotient");
      case BinaryOp::Pow:
        if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
        if (a < 0.0 && std::trunc(b) != b) throw DomainError("negative base with non-integer exponent");
        return checked(std::pow(a, b), "power");
    }
    throw DomainError("unknown binary operator");
  }

  static void print_number(double v, std::string& out) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    const std::string_view text(buf.data(), static_cast<std::size_t>(end - buf.data()));
    if (std::signbit(v)) {
      out += '(';
      out += text;
      out += ')';
    } else {
      out += text;
    }
  }

  static void print(const detail::Node& n, std::string& out) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, detail::ConstantNode>) {
            print_number(node.value, out);
          } else if constexpr (std::is_same_v<T, detail::VariableNode>) {
            out += node.name;
          } else if constexpr (std::is_same_v<T, detail::UnaryNode>) {
            if (node.op == UnaryOp::Neg) {
              out += "(-";
              print(*node.child, out);
              out += ')';
            } else {
              out += eqsolve::to_string(node.op);
              out += '(';
              print(*node.child, out);
              out += ')';
            }
          } else {
            out += '(';
            print(*node.lhs, out);
            out += ' ';
            out += eqsolve::to_string(node.op);
            out += ' ';
            print(*node.rhs, out);
            out += ')';
          }
        },
        n.data);
  }

  static std::size_t arity(const detail::Node& n) {
    return std::visit(
        [](const auto& node) -> std::size_t {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, detail::ConstantNode>) return 0;
          else if constexpr (std::is_same_v<T, detail::VariableNode>) return node.index + 1;
          else if constexpr (std::is_same_v<T, detail::UnaryNode>) return arity(*node.child);
          else return std::max(arity(*node.lhs), arity(*node.rhs));
        },
        n.data);
  }

  static bool equal(const detail::Node& a, const detail::Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          const auto& y = std::get<T>(b.data);
          if constexpr (std::is_same_v<T, detail::ConstantNode>) {
            // Bitwise comparison so that 0.0 and -0.0 are distinct.
            return std::signbit(x.value) == std::signbit(y.value) && x.value == y.value;
          } else if constexpr (std::is_same_v<T, detail::VariableNode>) {
            return x.name == y.name && x.index == y.index;
          } else if constexpr (std::is_same_v<T, detail::UnaryNode>) {
            return x.op == y.op && equal(*x.child, *y.child);
          } else {
            return x.op == y.op && equal(*x.lhs, *y.lhs) && equal(*x.rhs, *y.rhs);
          }
        },
        a.data);
  }

  NodePtr root_;
};

inline double evaluate(const Expression& e, std::span<const double> point) { return e.evaluate(point); }

/// Ordered residual functions F(x) over a fixed, ordered list of variables.
/// Residual i is `lhs_i - rhs_i` of the i-th equation.
class EquationSystem {
public:
  EquationSystem(std::vector<std::string> variables, std::vector<Expression> residuals)
      : variables_(std::move(variables)), residuals_(std::move(residuals)) {
    if (variables_.empty()) throw InvalidConfig("equation system needs at least one variable");
    if (residuals_.empty()) throw InvalidConfig("equation system needs at least one equation");
    for (std::size_t i = 0; i < residuals_.size(); ++i)
      if (residuals_[i].arity() > variables_.size())
        throw InvalidConfig("equation " + std::to_string(i) + " references an undeclared variable");
  }

  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<Expression>& residuals() const noexcept { return residuals_; }
  std::size_t variable_count() const noexcept { return variables_.size(); }
  std::size_t equation_count() const noexcept { return residuals_.size(); }
  bool is_square() const noexcept { return variables_.size() == residuals_.size(); }

  friend bool operator==(const EquationSystem&, const EquationSystem&) = default;

private:
  std::vector<std::string> variables_;
  std::vector<Expression> residuals_;
};

namespace detail {

class LineParser {
public:
  LineParser(std::string_view text, std::size_t line, std::vector<std::string>& variables,
             std::unordered_map<std::string, std::size_t>& index)
      : text_(text), line_(line), variables_(variables), index_(index) {}

  Expression parse_equation() {
    check_balance();
    Expression lhs = parse_expr();
    skip_space();
    if (!consume('=')) fail("expected '='");
    Expression rhs = parse_expr();
    skip_space();
    if (pos_ != text_.size()) {
      if (text_[pos_] == '=') fail("more than one '=' in equation");
      fail(std::string("unexpected '") + text_[pos_] + "'");
    }
    return Expression::binary(BinaryOp::Sub, lhs, rhs);
  }

private:
  [[noreturn]] void fail(const std::string& message) const { throw SyntaxError(line_, pos_ + 1, message); }

  void check_balance() const {
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (text_[i] == '(') {
        open.push_back(i);
      } else if (text_[i] == ')') {
        if (open.empty()) throw UnbalancedParentheses(line_, i + 1, "unmatched ')'");
        open.pop_back();
      }
    }
    if (!open.empty()) throw UnbalancedParentheses(line_, open.back() + 1, "unmatched '('");
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
  static bool digit(char c) { return c >= '0' && c <= '9'; }

  Expression parse_expr() {
    Expression left = parse_term();
    for (;;) {
      if (consume('+')) left = Expression::binary(BinaryOp::Add, left, parse_term());
      else if (consume('-')) left = Expression::binary(BinaryOp::Sub, left, parse_term());
      else return left;
    }
  }

  Expression parse_term() {
    Expression left = parse_unary();
    for (;;) {
      if (consume('*')) left = Expression::binary(BinaryOp::Mul, left, parse_unary());
      else if (consume('/')) left = Expression::binary(BinaryOp::Div, left, parse_unary());
      else return left;
    }
  }

  Expression parse_unary() {
    if (consume('-')) {
      Expression operand = parse_unary();
      // A negated literal is folded into a negative constant.
      if (operand.is_constant())
        return Expression::constant(-std::get<ConstantNode>(operand.node().data).value);
      return Expression::unary(UnaryOp::Neg, operand);
    }
    if (consume('+')) return parse_unary();
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_primary();
    if (consume('^')) return Expression::binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  Expression parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression inner = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (digit(c) || c == '.') return parse_number();
    if (ident_start(c)) return parse_identifier();
    if (c == '=') fail("missing expression before '='");
    fail(std::string("unexpected '") + c + "'");
  }

  Expression parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && digit(text_[look])) {
        pos_ = look;
        while (pos_ < text_.size() && digit(text_[pos_])) ++pos_;
      }
    }
    const std::string_view literal = text_.substr(start, pos_ - start);
    if (literal == ".") {
      pos_ = start;
      fail("malformed number");
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc() || end != literal.data() + literal.size() || !std::isfinite(value)) {
      pos_ = start;
      fail("malformed number '" + std::string(literal) + "'");
    }
    if (pos_ < text_.size() && (ident_start(text_[pos_]) || text_[pos_] == '.'))
      fail("missing operator after number");
    return Expression::constant(value);
  }

  Expression parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    const std::size_t after_name = pos_;
    if (peek('(')) {
      const auto op = function_from_name(name);
      if (!op) throw UnknownFunction(line_, start + 1, name);
      ++pos_;
      Expression arg = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return Expression::unary(*op, arg);
    }
    pos_ = after_name;
    if (function_from_name(name)) {
      pos_ = start;
      fail("function '" + name + "' needs an argument in parentheses");
    }
    auto [it, inserted] = index_.try_emplace(name, variables_.size());
    if (inserted) variables_.push_back(name);
    return Expression::variable(std::move(name), it->second);
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
  std::vector<std::string>& variables_;
  std::unordered_map<std::string, std::size_t>& index_;
};

}  // namespace detail

/// Parses one equation per nonblank line. Variables are ordered by first
/// appearance.
inline EquationSystem parse_system(std::string_view text) {
  std::vector<std::string> variables;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<Expression> residuals;

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      detail::LineParser parser(line, line_no, variables, index);
      residuals.push_back(parser.parse_equation());
    }
    start = end + 1;
  }
  if (residuals.empty()) throw SyntaxError(line_no, 1, "no equations found");
  if (variables.empty()) throw SyntaxError(1, 1, "system has no variables");
  return EquationSystem(std::move(variables), std::move(residuals));
}

inline EquationSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open system file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_system(buffer.str());
}

/// Renders a system in the text format; `parse_system(to_string(s)) == s`.
inline std::string to_string(const EquationSystem& system) {
  std::string out;
  for (const auto& r : system.residuals()) {
    if (const auto sides = r.operands(BinaryOp::Sub)) {
      out += sides->first.to_string();
      out += " = ";
      out += sides->second.to_string();
    } else {
      out += r.to_string();
      out += " = 0";
    }
    out += '\n';
  }
  return out;
}

/// Residual vector F(point); DomainError carries the failing equation index.
inline Vector residual_vector(const EquationSystem& system, std::span<const double> point) {
  if (point.size() != system.variable_count())
    throw DimensionMismatch("point has " + std::to_string(point.size()) + " components, system has " +
                            std::to_string(system.variable_count()) + " variables");
  Vector r(system.equation_count());
  for (std::size_t i = 0; i < r.size(); ++i) {
    try {
      r[i] = system.residuals()[i].evaluate(point);
    } catch (const DomainError& e) {
      throw DomainError(e.reason(), i);
    }
  }
  return r;
}

inline double residual_norm(const EquationSystem& system, std::span<const double> point) {
  return norm2(residual_vector(system, point));
}

}  // namespace eqsolve
